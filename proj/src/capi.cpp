#include "prominence/prominence.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <initializer_list>
#include <new>
#include <string>

#include <json.hpp>

#include "baselines.hpp"
#include "dataset.hpp"
#include "describe.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "model_io.hpp"
#include "ranker.hpp"
#include "rng.hpp"
#include "search.hpp"
#include "service.hpp"
#include "synthetic.hpp"
#include "text_io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

struct pd_dataset {
  prom::Dataset data;
  std::string dir;
  bool synthetic = false;
};

struct pd_model {
  prom::ModelBundle bundle;
};

struct pd_scores {
  prom::ScoreMatrix scores;
  std::string reference;  // "ranker" or "external:<hash>"
};

namespace {

thread_local std::string last_error;

pd_status status_of(prom::ErrorCode code) {
  switch (code) {
    case prom::ErrorCode::InvalidArgument: return PD_ERR_INVALID_ARGUMENT;
    case prom::ErrorCode::Io: return PD_ERR_IO;
    case prom::ErrorCode::Parse: return PD_ERR_PARSE;
    case prom::ErrorCode::NotFound: return PD_ERR_NOT_FOUND;
    case prom::ErrorCode::State: return PD_ERR_STATE;
    case prom::ErrorCode::Capacity: return PD_ERR_CAPACITY;
    case prom::ErrorCode::Internal: return PD_ERR_INTERNAL;
  }
  return PD_ERR_INTERNAL;
}

template <typename F>
pd_status guarded(F&& body) {
  try {
    body();
    return PD_OK;
  } catch (const prom::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    last_error = e.what();
    return PD_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PD_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return PD_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) prom::fail(prom::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

// Parses an options document and rejects keys outside `allowed`.
json options(const char* text, std::initializer_list<const char*> allowed, const char* what) {
  if (!text || !*text) return json::object();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    prom::fail(prom::ErrorCode::Parse, std::string(what) + " options: " + e.what());
  }
  if (!doc.is_object()) prom::fail(prom::ErrorCode::InvalidArgument, std::string(what) + " options must be an object");
  for (const auto& [key, value] : doc.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) prom::fail(prom::ErrorCode::InvalidArgument, std::string(what) + ": unknown option '" + key + "'");
  }
  return doc;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const json& doc) {
  need(out, "output pointer");
  *out = dup_string(doc.dump());
}

prom::RankerHyper ranker_hyper(const json& o) {
  prom::RankerHyper h;
  h.C = o.value("C", h.C);
  h.epochs = o.value("epochs", h.epochs);
  h.similar_margin = o.value("similar_margin", h.similar_margin);
  h.seed = o.value("seed", h.seed);
  if (!(h.C > 0)) prom::fail(prom::ErrorCode::InvalidArgument, "ranker C must be positive");
  if (h.epochs < 1) prom::fail(prom::ErrorCode::InvalidArgument, "ranker epochs must be >= 1");
  return h;
}

prom::ProminenceHyper prominence_hyper(const json& o) {
  prom::ProminenceHyper h;
  h.C = o.value("C", h.C);
  h.feature_map = prom::feature_map_from_string(o.value("feature_map", std::string("mean_absdiff")));
  h.calibration_fraction = o.value("calibration_fraction", h.calibration_fraction);
  h.refit_on_full = o.value("refit_on_full", h.refit_on_full);
  h.seed = o.value("seed", h.seed);
  if (!(h.C > 0)) prom::fail(prom::ErrorCode::InvalidArgument, "prominence C must be positive");
  if (!(h.calibration_fraction > 0 && h.calibration_fraction < 1))
    prom::fail(prom::ErrorCode::InvalidArgument, "calibration_fraction must be in (0, 1)");
  return h;
}

// Score rows reordered to dataset image order.
prom::ScoreMatrix aligned(const prom::ScoreMatrix& scores, const prom::Dataset& ds) {
  if (scores.num_attributes() != ds.num_attributes())
    prom::fail(prom::ErrorCode::InvalidArgument, "scores have " + std::to_string(scores.num_attributes()) +
                                                     " attributes, dataset has " +
                                                     std::to_string(ds.num_attributes()));
  std::vector<std::string> ids;
  std::vector<double> values;
  for (const auto& img : ds.images) {
    const auto row = scores.find(img.id);
    if (!row) prom::fail(prom::ErrorCode::NotFound, "no scores for image '" + img.id + "'");
    ids.push_back(img.id);
    const auto r = scores.row(*row);
    values.insert(values.end(), r.begin(), r.end());
  }
  return {std::move(ids), ds.num_attributes(), std::move(values)};
}

void check_vocab(const prom::ModelBundle& b, const prom::Dataset& ds) {
  if (b.vocab.names != ds.vocab.names)
    prom::fail(prom::ErrorCode::InvalidArgument, "model vocabulary does not match the dataset vocabulary");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int k = 15; k >= 0; --k) {
    buf[k] = digits[v & 0xf];
    v >>= 4;
  }
  return {buf, 16};
}

json prediction_json(const prom::Prediction& p, const prom::AttributeVocabulary& vocab, const std::string& method,
                     const std::string& id_i, const std::string& id_j) {
  json ranked = json::array();
  for (std::size_t q = 0; q < p.ranked.size(); ++q) {
    const auto m = p.ranked[q];
    ranked.push_back({{"attribute_id", m},
                      {"attribute", vocab.name(m)},
                      {"score", p.scores[q]},
                      {"polarity", std::string(prom::to_string(p.polarity[m]))}});
  }
  return {{"i", id_i}, {"j", id_j}, {"method", method}, {"top", p.top()}, {"ranked", ranked}};
}

}  // namespace

extern "C" {

const char* pd_version(void) { return "1.0.0"; }

const char* pd_status_name(pd_status status) {
  switch (status) {
    case PD_OK: return "ok";
    case PD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PD_ERR_IO: return "io";
    case PD_ERR_PARSE: return "parse";
    case PD_ERR_NOT_FOUND: return "not_found";
    case PD_ERR_STATE: return "state";
    case PD_ERR_CAPACITY: return "capacity";
    case PD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pd_last_error(void) { return last_error.c_str(); }

void pd_string_free(char* s) { std::free(s); }

pd_status pd_hash_file(const char* path, uint64_t* out) {
  return guarded([&] {
    need(path, "path");
    need(out, "output pointer");
    *out = prom::fnv1a(prom::read_file(path));
  });
}

pd_status pd_synthesize(const char* spec_json, const char* out_dir) {
  return guarded([&] {
    need(out_dir, "output directory");
    const json o = options(spec_json,
                           {"M", "D", "n_images", "map_seed", "annotator_count", "alpha", "beta", "temperature", "seed",
                            "noise_sigma", "n_ordered_pairs", "n_similar_pairs", "n_labeled_pairs",
                            "ordered_threshold", "similar_threshold"},
                           "synthetic spec");
    const auto spec = prom::SyntheticSpec::from_json(o).normalized();
    prom::save_synthetic(prom::generate_synthetic(spec), out_dir);
  });
}

pd_status pd_dataset_load(const char* dir, const char* options_json, pd_dataset** out) {
  return guarded([&] {
    need(dir, "dataset directory");
    need(out, "output pointer");
    const json o = options(options_json, {"annotator_count"}, "dataset");
    prom::LoadOptions lo;
    lo.annotator_count = o.value("annotator_count", lo.annotator_count);
    auto ds = std::make_unique<pd_dataset>();
    ds->data = prom::load_dataset(prom::DatasetPaths::in_directory(dir), lo);
    ds->dir = dir;
    ds->synthetic = fs::exists(fs::path(dir) / "spec.json");
    *out = ds.release();
  });
}

void pd_dataset_free(pd_dataset* dataset) { delete dataset; }

pd_status pd_dataset_info(const pd_dataset* dataset, char** out_json) {
  return guarded([&] {
    need(dataset, "dataset");
    const auto& d = dataset->data;
    std::size_t ordered = 0, similar = 0;
    for (const auto& s : d.pair_sets) {
      ordered += s.ordered.size();
      similar += s.similar.size();
    }
    json info{{"M", d.num_attributes()},
              {"D", d.dim()},
              {"images", d.images.size()},
              {"ordered_pairs", ordered},
              {"similar_pairs", similar},
              {"vote_pairs", d.votes.pairs.size()},
              {"synthetic", dataset->synthetic}};
    if (!d.votes.pairs.empty()) {
      const auto st = prom::agreement_stats(d.votes);
      info["agreement"] = {{"pct_modal_3plus", st.pct_modal_3plus}, {"mean_unique_attrs", st.mean_unique_attrs}};
    }
    emit(out_json, info);
  });
}

pd_status pd_train_ranker(const pd_dataset* dataset, const char* options_json, pd_model** out) {
  return guarded([&] {
    need(dataset, "dataset");
    need(out, "output pointer");
    const json o = options(options_json, {"C", "epochs", "similar_margin", "seed"}, "ranker");
    auto model = std::make_unique<pd_model>();
    model->bundle.vocab = dataset->data.vocab;
    model->bundle.ranker = prom::train_ranker(dataset->data, ranker_hyper(o));
    *out = model.release();
  });
}

pd_status pd_model_create(const pd_dataset* dataset, pd_model** out) {
  return guarded([&] {
    need(dataset, "dataset");
    need(out, "output pointer");
    auto model = std::make_unique<pd_model>();
    model->bundle.vocab = dataset->data.vocab;
    *out = model.release();
  });
}

pd_status pd_model_load(const char* path, pd_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "output pointer");
    auto model = std::make_unique<pd_model>();
    model->bundle = prom::load_model(path);
    *out = model.release();
  });
}

pd_status pd_model_save(const pd_model* model, const char* path, const char* run_json) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    prom::ModelBundle copy = model->bundle;
    if (run_json && *run_json) copy.run = json::parse(run_json);
    prom::save_model(copy, path);
  });
}

void pd_model_free(pd_model* model) { delete model; }

pd_status pd_model_info(const pd_model* model, char** out_json) {
  return guarded([&] {
    need(model, "model");
    const auto& b = model->bundle;
    json baselines = json::array();
    if (b.baselines.tfidf_weights) baselines.push_back("widest");
    if (b.baselines.single_image) baselines.push_back("single");
    if (b.baselines.prior) baselines.push_back("prior");
    json info{{"version", prom::kModelFileVersion},
              {"M", b.vocab.size()},
              {"vocab", b.vocab.names},
              {"ranker", b.ranker.has_value()},
              {"prominence", b.prominence.has_value()},
              {"baselines", baselines}};
    if (b.prominence) info["score_reference"] = b.prominence->score_reference;
    if (!b.run.empty()) info["run"] = b.run;
    emit(out_json, info);
  });
}

pd_status pd_score(const pd_model* model, const pd_dataset* dataset, pd_scores** out) {
  return guarded([&] {
    need(model, "model");
    need(dataset, "dataset");
    need(out, "output pointer");
    if (!model->bundle.ranker) prom::fail(prom::ErrorCode::State, "model has no ranker");
    check_vocab(model->bundle, dataset->data);
    if (model->bundle.ranker->dim() != dataset->data.dim())
      prom::fail(prom::ErrorCode::InvalidArgument, "ranker dimension " + std::to_string(model->bundle.ranker->dim()) +
                                                       " does not match descriptors of dimension " +
                                                       std::to_string(dataset->data.dim()));
    auto s = std::make_unique<pd_scores>();
    s->scores = prom::score_all(*model->bundle.ranker, dataset->data.images);
    s->reference = "ranker";
    *out = s.release();
  });
}

pd_status pd_scores_ingest(const char* path, const pd_dataset* dataset, pd_scores** out) {
  return guarded([&] {
    need(path, "path");
    need(dataset, "dataset");
    need(out, "output pointer");
    std::vector<std::string> ids;
    for (const auto& img : dataset->data.images) ids.push_back(img.id);
    auto s = std::make_unique<pd_scores>();
    s->scores = aligned(prom::ingest_scores(path, dataset->data.num_attributes(), ids), dataset->data);
    s->reference = "external:" + hex64(prom::fnv1a(prom::read_file(path)));
    *out = s.release();
  });
}

pd_status pd_scores_save(const pd_scores* scores, const char* path) {
  return guarded([&] {
    need(scores, "scores");
    need(path, "path");
    const auto& sm = scores->scores;
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < sm.size(); ++k) rows.emplace_back(sm.row(k).begin(), sm.row(k).end());
    prom::write_score_csv(path, sm.ids(), rows);
  });
}

void pd_scores_free(pd_scores* scores) { delete scores; }

pd_status pd_train_prominence(pd_model* model, const pd_dataset* dataset, const pd_scores* scores,
                              const char* options_json) {
  return guarded([&] {
    need(model, "model");
    need(dataset, "dataset");
    need(scores, "scores");
    const json o = options(options_json, {"C", "feature_map", "calibration_fraction", "refit_on_full", "seed", "baselines"},
                           "prominence");
    const auto& ds = dataset->data;
    check_vocab(model->bundle, ds);
    if (ds.votes.pairs.empty()) prom::fail(prom::ErrorCode::State, "dataset has no vote table to learn from");
    const auto sm = aligned(scores->scores, ds);
    const auto pairs = prom::labeled_pairs(prom::ground_truth(ds.votes));
    const std::size_t M = ds.num_attributes();
    const auto hyper = prominence_hyper(o);

    prom::ModelBundle next = model->bundle;
    next.prominence = prom::train_prominence(sm, pairs, M, hyper);
    next.prominence->score_reference = scores->reference;
    next.baselines = {};
    if (o.value("baselines", true)) {
      next.baselines.tfidf_weights = prom::fit_tfidf_weights(sm, pairs, M);
      prom::SingleImageHyper sh;
      sh.C = hyper.C;
      sh.seed = prom::derive_seed(hyper.seed, 12);
      next.baselines.single_image = prom::train_single_image(sm, pairs, M, sh);
      next.baselines.prior = prom::prior_frequency(pairs, M, prom::derive_seed(hyper.seed, 13));
    }
    model->bundle = std::move(next);
  });
}

pd_status pd_predict(const pd_model* model, const pd_scores* scores, const char* id_i, const char* id_j,
                     const char* method, char** out_json) {
  return guarded([&] {
    need(model, "model");
    need(scores, "scores");
    need(id_i, "image id");
    need(id_j, "image id");
    const std::string name = method && *method ? method : "model";
    const auto& b = model->bundle;
    const auto& sm = scores->scores;
    const auto ri = sm.find(id_i);
    if (!ri) prom::fail(prom::ErrorCode::NotFound, std::string("unknown image '") + id_i + "'");
    const auto rj = sm.find(id_j);
    if (!rj) prom::fail(prom::ErrorCode::NotFound, std::string("unknown image '") + id_j + "'");
    if (sm.num_attributes() != b.vocab.size())
      prom::fail(prom::ErrorCode::InvalidArgument, "scores and model attribute counts differ");
    const prom::PairKey key{id_i, id_j};

    std::unique_ptr<prom::PairPredictor> predictor;
    if (name == "model") {
      if (!b.prominence) prom::fail(prom::ErrorCode::State, "model has no prominence model");
      predictor = std::make_unique<prom::ProminencePredictor>(*b.prominence);
    } else if (name == "widest") {
      if (!b.baselines.tfidf_weights) prom::fail(prom::ErrorCode::State, "model has no widest-difference weights");
      predictor = std::make_unique<prom::WidestPredictor>(*b.baselines.tfidf_weights);
    } else if (name == "single") {
      if (!b.baselines.single_image) prom::fail(prom::ErrorCode::State, "model has no single-image baseline");
      predictor = std::make_unique<prom::SingleImagePredictor>(*b.baselines.single_image);
    } else if (name == "prior") {
      if (!b.baselines.prior) prom::fail(prom::ErrorCode::State, "model has no prior-frequency baseline");
      predictor = std::make_unique<prom::PriorPredictor>(*b.baselines.prior);
    } else {
      prom::fail(prom::ErrorCode::InvalidArgument,
                 "unknown method '" + name + "' (expected model, widest, single or prior)");
    }
    emit(out_json, prediction_json(predictor->predict(sm.row(*ri), sm.row(*rj), key), b.vocab, name, id_i, id_j));
  });
}

pd_status pd_describe(const pd_model* model, const pd_scores* scores, const char* id_i, const char* id_j, size_t k,
                      char** out_json) {
  return guarded([&] {
    need(model, "model");
    need(scores, "scores");
    need(id_i, "image id");
    need(id_j, "image id");
    if (k < 1) prom::fail(prom::ErrorCode::InvalidArgument, "k must be >= 1");
    const auto& b = model->bundle;
    if (!b.prominence) prom::fail(prom::ErrorCode::State, "model has no prominence model");
    const auto& sm = scores->scores;
    const auto ri = sm.find(id_i);
    if (!ri) prom::fail(prom::ErrorCode::NotFound, std::string("unknown image '") + id_i + "'");
    const auto rj = sm.find(id_j);
    if (!rj) prom::fail(prom::ErrorCode::NotFound, std::string("unknown image '") + id_j + "'");
    emit(out_json, prom::explanation_json(*b.prominence, b.vocab, sm.row(*ri), sm.row(*rj), k, id_i, id_j));
  });
}

pd_status pd_evaluate(const pd_dataset* dataset, const char* options_json, char** out_json) {
  return guarded([&] {
    need(dataset, "dataset");
    const json o = options(options_json,
                           {"folds", "seed", "max_k", "methods", "ranker", "prominence", "scores_path", "oracle"},
                           "evaluate");
    const auto& ds = dataset->data;
    if (ds.votes.pairs.empty()) prom::fail(prom::ErrorCode::State, "dataset has no vote table to evaluate on");

    prom::CvOptions cv;
    cv.n_folds = o.value("folds", cv.n_folds);
    cv.seed = o.value("seed", cv.seed);
    cv.max_k = o.value("max_k", cv.max_k);
    if (o.contains("ranker")) {
      json r = o["ranker"];
      r.erase("seed");
      cv.ranker = ranker_hyper(r);
    }
    if (o.contains("prominence")) {
      json p = o["prominence"];
      p.erase("seed");
      cv.prominence = prominence_hyper(p);
    }
    if (o.contains("scores_path")) {
      std::vector<std::string> ids;
      for (const auto& img : ds.images) ids.push_back(img.id);
      cv.external_scores =
          aligned(prom::ingest_scores(o["scores_path"].get<std::string>(), ds.num_attributes(), ids), ds);
    }
    const bool use_oracle = o.value("oracle", dataset->synthetic);
    if (use_oracle) {
      if (!dataset->synthetic) prom::fail(prom::ErrorCode::State, "oracle labels need a synthetic dataset");
      cv.oracle_labels = prom::load_oracle_labels(dataset->dir, ds);
    }
    const auto methods =
        o.value("methods", std::vector<std::string>{"model", "widest", "single", "prior"});
    const auto result = prom::cross_validate(ds, prom::builtin_methods(methods, cv), cv);
    json summary = prom::summary_json(result);
    summary["agreement"] = {{"pct_modal_3plus", prom::agreement_stats(ds.votes).pct_modal_3plus},
                            {"mean_unique_attrs", prom::agreement_stats(ds.votes).mean_unique_attrs}};
    emit(out_json, json{{"summary", summary},
                        {"accuracy_csv", prom::accuracy_csv(result)},
                        {"gnuplot", prom::gnuplot_table(result)}});
  });
}

pd_status pd_search_experiment(const pd_model* model, const pd_dataset* dataset, const char* options_json,
                               char** out_json) {
  return guarded([&] {
    need(model, "model");
    need(dataset, "dataset");
    const json o = options(
        options_json,
        {"database_size", "targets", "iterations", "page_size", "references", "noise", "threshold", "seed"},
        "search");
    const auto& b = model->bundle;
    if (!b.ranker || !b.prominence)
      prom::fail(prom::ErrorCode::State, "search simulation needs a model with ranker and prominence");
    if (!dataset->synthetic)
      prom::fail(prom::ErrorCode::State, "search simulation needs a synthetic dataset (spec.json with oracle utility)");
    check_vocab(b, dataset->data);

    const std::size_t db_size = o.value("database_size", std::size_t{5000});
    const std::size_t n_targets = o.value("targets", std::size_t{200});
    const std::uint64_t seed = o.value("seed", std::uint64_t{0});
    if (n_targets < 1 || n_targets > db_size)
      prom::fail(prom::ErrorCode::InvalidArgument, "targets must be between 1 and the database size");
    prom::ExperimentConfig cfg;
    cfg.iterations = o.value("iterations", cfg.iterations);
    cfg.page_size = o.value("page_size", cfg.page_size);
    cfg.feedback.num_references = o.value("references", cfg.feedback.num_references);
    cfg.feedback.noise_probability = o.value("noise", cfg.feedback.noise_probability);
    cfg.feedback.true_difference_threshold = o.value("threshold", cfg.feedback.true_difference_threshold);
    cfg.seed = prom::derive_seed(seed, 3);
    if (cfg.feedback.noise_probability < 0 || cfg.feedback.noise_probability > 1)
      prom::fail(prom::ErrorCode::InvalidArgument, "noise must be in [0, 1]");

    const auto world = prom::load_latent_world(dataset->dir, dataset->data);
    auto [images, population] = prom::generate_population(world.spec, db_size, prom::derive_seed(seed, 1), "db");
    const auto scores = prom::score_all(*b.ranker, images);
    prom::Rng target_rng(prom::derive_seed(seed, 2));
    const auto targets = target_rng.sample_without_replacement(db_size, n_targets);
    const prom::ProminenceOracle oracle = [&population](std::size_t t, std::size_t ref) {
      return population.prominent(t, ref);
    };
    const auto result = prom::run_search_experiment(scores, *b.prominence, targets, oracle, cfg);
    json summary = prom::experiment_summary_json(result);
    summary["config"] = {{"database_size", db_size},
                         {"targets", n_targets},
                         {"iterations", cfg.iterations},
                         {"page_size", cfg.page_size},
                         {"references", cfg.feedback.num_references},
                         {"noise", cfg.feedback.noise_probability},
                         {"threshold", cfg.feedback.true_difference_threshold},
                         {"seed", seed}};
    emit(out_json, json{{"summary", summary}, {"csv", prom::experiment_csv(result, scores.ids())}});
  });
}

pd_status pd_serve(const pd_model* model, const pd_dataset* dataset, const pd_scores* scores,
                   const char* options_json) {
  return guarded([&] {
    need(model, "model");
    need(dataset, "dataset");
    const json o = options(options_json,
                           {"host", "port", "page_size", "session_ttl", "max_sessions", "asset_dir", "seed"}, "serve");
    check_vocab(model->bundle, dataset->data);
    prom::ServiceConfig cfg;
    cfg.page_size = o.value("page_size", cfg.page_size);
    cfg.session_ttl = std::chrono::seconds(o.value("session_ttl", static_cast<long long>(cfg.session_ttl.count())));
    cfg.max_sessions = o.value("max_sessions", cfg.max_sessions);
    cfg.asset_dir = o.value("asset_dir", std::string{});
    cfg.seed = o.value("seed", cfg.seed);

    prom::SearchDatabase db;
    if (scores) {
      db.name = "default";
      db.images = dataset->data.images;
      db.scores = aligned(scores->scores, dataset->data);
    } else {
      db = prom::make_database("default", dataset->data.images, model->bundle);
    }
    std::vector<prom::SearchDatabase> dbs;
    dbs.push_back(std::move(db));
    prom::Service service(model->bundle, std::move(dbs), cfg);
    prom::HttpServer server(service);
    const std::string host = o.value("host", std::string("127.0.0.1"));
    const int port = server.bind(host, o.value("port", 8080));
    std::fprintf(stderr, "serving on http://%s:%d\n", host.c_str(), port);
    server.listen();
  });
}

}  // extern "C"
