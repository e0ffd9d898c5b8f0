#include "model_io.hpp"

#include "error.hpp"
#include "text_io.hpp"

namespace prom {

using nlohmann::json;

namespace {

json classifiers_to_json(const std::vector<LinearClassifier>& classifiers, const std::vector<PlattSigmoid>& calibration,
                         const std::vector<bool>& skipped) {
  json v = json::array(), b = json::array(), a = json::array(), pb = json::array();
  for (const auto& c : classifiers) {
    v.push_back(c.weights);
    b.push_back(c.bias);
  }
  for (const auto& s : calibration) {
    a.push_back(s.a);
    pb.push_back(s.b);
  }
  return {{"v", v}, {"b", b}, {"platt_a", a}, {"platt_b", pb}, {"skipped", skipped}};
}

struct ClassifierBlock {
  std::vector<LinearClassifier> classifiers;
  std::vector<PlattSigmoid> calibration;
  std::vector<bool> skipped;
};

ClassifierBlock classifiers_from_json(const json& j, std::size_t num_attributes, std::size_t feature_dim,
                                      const std::string& where) {
  ClassifierBlock out;
  const auto v = j.at("v").get<std::vector<std::vector<double>>>();
  const auto b = j.at("b").get<std::vector<double>>();
  const auto a = j.at("platt_a").get<std::vector<double>>();
  const auto pb = j.at("platt_b").get<std::vector<double>>();
  if (v.size() != num_attributes || b.size() != num_attributes || a.size() != num_attributes ||
      pb.size() != num_attributes)
    fail(ErrorCode::Parse, where + ": classifier count does not match the vocabulary");
  for (std::size_t m = 0; m < num_attributes; ++m) {
    if (v[m].size() != feature_dim)
      fail(ErrorCode::Parse, where + ": classifier " + std::to_string(m) + " has " + std::to_string(v[m].size()) +
                                 " weights, expected " + std::to_string(feature_dim));
    out.classifiers.push_back({v[m], b[m]});
    out.calibration.push_back({a[m], pb[m]});
  }
  out.skipped = j.contains("skipped") ? j["skipped"].get<std::vector<bool>>() : std::vector<bool>(num_attributes);
  if (out.skipped.size() != num_attributes) fail(ErrorCode::Parse, where + ": skipped flags do not match vocabulary");
  return out;
}

}  // namespace

json model_to_json(const ModelBundle& bundle) {
  json doc{{"version", kModelFileVersion}, {"vocab", vocabulary_to_json(bundle.vocab)}};
  if (!bundle.run.empty()) doc["run"] = bundle.run;

  if (bundle.ranker) {
    const auto& r = *bundle.ranker;
    doc["ranker"] = {{"w", r.weights},
                     {"mu", r.standardization.mean},
                     {"sigma", r.standardization.sigma},
                     {"hyper",
                      {{"C", r.hyper.C},
                       {"epochs", r.hyper.epochs},
                       {"similar_margin", r.hyper.similar_margin},
                       {"seed", r.hyper.seed}}}};
  }

  if (bundle.prominence) {
    const auto& p = *bundle.prominence;
    json block = classifiers_to_json(p.classifiers, p.calibration, p.skipped);
    block["positive_weight"] = p.positive_weight;
    block["negative_weight"] = p.negative_weight;
    block["feature_map"] = std::string(to_string(p.feature_map));
    block["score_reference"] = p.score_reference;
    block["hyper"] = {{"C", p.hyper.C},
                      {"calibration_fraction", p.hyper.calibration_fraction},
                      {"min_positives_for_split", p.hyper.min_positives_for_split},
                      {"refit_on_full", p.hyper.refit_on_full},
                      {"seed", p.hyper.seed}};
    doc["prominence"] = block;
  }

  json baselines = json::object();
  if (bundle.baselines.tfidf_weights) baselines["widest_tfidf"] = {{"weights", *bundle.baselines.tfidf_weights}};
  if (bundle.baselines.single_image) {
    const auto& s = *bundle.baselines.single_image;
    baselines["single_image"] = classifiers_to_json(s.classifiers, s.calibration, s.skipped);
  }
  if (bundle.baselines.prior)
    baselines["prior_frequency"] = {{"frequency", bundle.baselines.prior->frequency},
                                    {"seed", bundle.baselines.prior->seed}};
  if (!baselines.empty()) doc["baselines"] = baselines;
  return doc;
}

ModelBundle model_from_json(const json& doc, const std::string& context) {
  if (!doc.is_object()) fail(ErrorCode::Parse, context + ": model file must be a JSON object");
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    fail(ErrorCode::Parse, context + ": missing model file version");
  const int version = doc["version"].get<int>();
  if (version != kModelFileVersion)
    fail(ErrorCode::Parse, context + ": unsupported model file version " + std::to_string(version) +
                               " (this build reads version " + std::to_string(kModelFileVersion) + ")");

  ModelBundle bundle;
  try {
    bundle.vocab = vocabulary_from_json(doc.at("vocab"), context + ": vocab");
    const std::size_t M = bundle.vocab.size();
    if (doc.contains("run")) bundle.run = doc["run"];

    if (doc.contains("ranker")) {
      const auto& r = doc["ranker"];
      RankerModel model;
      model.weights = r.at("w").get<std::vector<std::vector<double>>>();
      model.standardization.mean = r.at("mu").get<std::vector<double>>();
      model.standardization.sigma = r.at("sigma").get<std::vector<double>>();
      if (model.weights.size() != M || model.standardization.mean.size() != M ||
          model.standardization.sigma.size() != M)
        fail(ErrorCode::Parse, context + ": ranker attribute count does not match the vocabulary");
      for (const auto& w : model.weights)
        if (w.size() != model.weights.front().size())
          fail(ErrorCode::Parse, context + ": ranker weight vectors differ in length");
      for (double s : model.standardization.sigma)
        if (!(s > 0.0)) fail(ErrorCode::Parse, context + ": ranker sigma must be positive");
      if (r.contains("hyper")) {
        const auto& h = r["hyper"];
        model.hyper.C = h.value("C", model.hyper.C);
        model.hyper.epochs = h.value("epochs", model.hyper.epochs);
        model.hyper.similar_margin = h.value("similar_margin", model.hyper.similar_margin);
        model.hyper.seed = h.value("seed", model.hyper.seed);
      }
      bundle.ranker = std::move(model);
    }

    if (doc.contains("prominence")) {
      const auto& p = doc["prominence"];
      ProminenceModel model;
      model.feature_map = feature_map_from_string(p.value("feature_map", std::string("mean_absdiff")));
      auto block = classifiers_from_json(p, M, feature_length(model.feature_map, M), context + ": prominence");
      model.classifiers = std::move(block.classifiers);
      model.calibration = std::move(block.calibration);
      model.skipped = std::move(block.skipped);
      model.positive_weight = p.value("positive_weight", std::vector<double>(M, 1.0));
      model.negative_weight = p.value("negative_weight", std::vector<double>(M, 1.0));
      model.score_reference = p.value("score_reference", std::string("ranker"));
      if (p.contains("hyper")) {
        const auto& h = p["hyper"];
        model.hyper.C = h.value("C", model.hyper.C);
        model.hyper.calibration_fraction = h.value("calibration_fraction", model.hyper.calibration_fraction);
        model.hyper.min_positives_for_split = h.value("min_positives_for_split", model.hyper.min_positives_for_split);
        model.hyper.refit_on_full = h.value("refit_on_full", model.hyper.refit_on_full);
        model.hyper.seed = h.value("seed", model.hyper.seed);
      }
      model.hyper.feature_map = model.feature_map;
      bundle.prominence = std::move(model);
    }

    if (doc.contains("baselines")) {
      const auto& b = doc["baselines"];
      if (b.contains("widest_tfidf")) {
        auto w = b["widest_tfidf"].at("weights").get<std::vector<double>>();
        if (w.size() != M) fail(ErrorCode::Parse, context + ": tf-idf weight count does not match the vocabulary");
        bundle.baselines.tfidf_weights = std::move(w);
      }
      if (b.contains("single_image")) {
        auto block = classifiers_from_json(b["single_image"], M, M, context + ": single_image");
        bundle.baselines.single_image = SingleImageModel{std::move(block.classifiers), std::move(block.calibration),
                                                         std::move(block.skipped)};
      }
      if (b.contains("prior_frequency")) {
        PriorModel prior;
        prior.frequency = b["prior_frequency"].at("frequency").get<std::vector<double>>();
        prior.seed = b["prior_frequency"].value("seed", std::uint64_t{0});
        if (prior.frequency.size() != M)
          fail(ErrorCode::Parse, context + ": prior frequency count does not match the vocabulary");
        bundle.baselines.prior = std::move(prior);
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, context + ": " + e.what());
  }
  return bundle;
}

void save_model(const ModelBundle& bundle, const std::string& path) {
  write_file(path, model_to_json(bundle).dump(1) + "\n");
}

ModelBundle load_model(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
  return model_from_json(doc, path);
}

}  // namespace prom
