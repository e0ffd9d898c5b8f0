#include "eval.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "text_io.hpp"

namespace prom {

using nlohmann::json;

namespace {

void check_alignment(const std::vector<PairPrediction>& predictions, const std::vector<GroundTruthLabel>& labels) {
  if (predictions.size() != labels.size())
    fail(ErrorCode::InvalidArgument, "predictions and labels cover different pair counts");
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (std::minmax(predictions[k].i, predictions[k].j) != std::minmax(labels[k].i, labels[k].j))
      fail(ErrorCode::InvalidArgument, "prediction/label pair mismatch at position " + std::to_string(k));
  }
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double topk_accuracy(const std::vector<PairPrediction>& predictions, const std::vector<GroundTruthLabel>& labels,
                     std::size_t k) {
  require(k >= 1, "k must be >= 1");
  check_alignment(predictions, labels);
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const auto& truth = labels[p].ranked;
    const std::size_t depth = std::min(k, truth.size());
    const AttributeId predicted = predictions[p].prediction.top();
    if (std::find(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(depth), predicted) !=
        truth.begin() + static_cast<std::ptrdiff_t>(depth))
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double description_presence(const std::vector<PairPrediction>& predictions,
                            const std::vector<GroundTruthLabel>& labels, std::size_t k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  check_alignment(predictions, labels);
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const auto& truth = labels[p].ranked;
    const std::size_t depth = std::min(k, truth.size());
    const auto& ranked = predictions[p].prediction.ranked;
    const std::set<AttributeId> predicted(ranked.begin(),
                                          ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked.size())));
    std::size_t hits = 0;
    for (std::size_t d = 0; d < depth; ++d) hits += predicted.count(truth[d]);
    total += static_cast<double>(hits) / static_cast<double>(depth);
  }
  return total / static_cast<double>(labels.size());
}

Method builtin_method(const std::string& name, const CvOptions& options) {
  if (name == "model") {
    const ProminenceHyper hyper = options.prominence;
    return {name, [hyper](const FoldContext& ctx) -> std::unique_ptr<PairPredictor> {
              ProminenceHyper h = hyper;
              h.seed = derive_seed(ctx.seed, 11);
              return std::make_unique<ProminencePredictor>(
                  train_prominence(ctx.scores, ctx.train_pairs, ctx.dataset.num_attributes(), h));
            }};
  }
  if (name == "widest") {
    return {name, [](const FoldContext& ctx) -> std::unique_ptr<PairPredictor> {
              return std::make_unique<WidestPredictor>(
                  fit_tfidf_weights(ctx.scores, ctx.train_pairs, ctx.dataset.num_attributes()));
            }};
  }
  if (name == "single") {
    const double C = options.prominence.C;
    return {name, [C](const FoldContext& ctx) -> std::unique_ptr<PairPredictor> {
              SingleImageHyper h;
              h.C = C;
              h.seed = derive_seed(ctx.seed, 12);
              return std::make_unique<SingleImagePredictor>(
                  train_single_image(ctx.scores, ctx.train_pairs, ctx.dataset.num_attributes(), h));
            }};
  }
  if (name == "prior") {
    return {name, [](const FoldContext& ctx) -> std::unique_ptr<PairPredictor> {
              return std::make_unique<PriorPredictor>(
                  prior_frequency(ctx.train_pairs, ctx.dataset.num_attributes(), derive_seed(ctx.seed, 13)));
            }};
  }
  fail(ErrorCode::InvalidArgument, "unknown method '" + name + "' (expected model, widest, single or prior)");
}

std::vector<Method> builtin_methods(const std::vector<std::string>& names, const CvOptions& options) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(builtin_method(n, options));
  return out;
}

const MethodResult& CvResult::method(const std::string& name) const {
  for (const auto& m : methods)
    if (m.accuracy.method == name) return m;
  fail(ErrorCode::NotFound, "no results for method '" + name + "'");
}

CvResult cross_validate(const Dataset& dataset, const std::vector<Method>& methods, const CvOptions& options) {
  require(!methods.empty(), "cross validation needs at least one method");
  require(options.max_k >= 1, "max k must be >= 1");
  if (options.oracle_labels)
    require(options.oracle_labels->size() == dataset.votes.pairs.size(), "oracle labels do not match vote table");
  if (options.external_scores)
    require(options.external_scores->size() == dataset.images.size(), "external scores do not cover the dataset");

  const std::size_t n_images = dataset.images.size();
  const FoldAssignment folds = make_folds(n_images, options.n_folds, options.seed);
  const auto labels = ground_truth(dataset.votes);
  const std::size_t F = options.n_folds;
  const std::size_t K = options.max_k;

  struct FoldOutput {
    std::vector<std::vector<double>> accuracy;  // [method][k-1]
    std::vector<std::vector<double>> presence;
    std::vector<double> oracle_top1;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
  };
  std::vector<FoldOutput> outputs(F);

  // Validate test coverage up front so a bad fold count fails before training.
  for (std::size_t f = 0; f < F; ++f) {
    std::size_t n_test = 0;
    for (const auto& l : labels) n_test += folds.is_test(f, l.i, l.j);
    if (n_test == 0) fail(ErrorCode::InvalidArgument, "fold " + std::to_string(f) + " has no test pairs");
  }

  parallel_for(F, [&](std::size_t f) {
    const std::uint64_t fold_seed = derive_seed(options.seed, f);
    std::vector<bool> train_mask(n_images);
    for (ImageIndex k = 0; k < n_images; ++k) train_mask[k] = !folds.in_fold(f, k);

    ScoreMatrix scores;
    if (options.external_scores) {
      scores = *options.external_scores;
    } else {
      RankerHyper rh = options.ranker;
      rh.seed = derive_seed(fold_seed, 1);
      scores = score_all(train_ranker(dataset, rh, &train_mask), dataset.images);
    }

    std::vector<LabeledPair> train_pairs;
    std::vector<GroundTruthLabel> test_labels;
    std::vector<std::size_t> test_index;
    for (std::size_t p = 0; p < labels.size(); ++p) {
      const auto& l = labels[p];
      if (folds.is_train(f, l.i, l.j)) {
        train_pairs.push_back({l.i, l.j, l.top()});
      } else if (folds.is_test(f, l.i, l.j)) {
        test_labels.push_back(l);
        test_index.push_back(p);
      }
    }
    if (train_pairs.empty()) fail(ErrorCode::InvalidArgument, "fold " + std::to_string(f) + " has no training pairs");

    FoldOutput& out = outputs[f];
    out.n_train = train_pairs.size();
    out.n_test = test_labels.size();
    const FoldContext ctx{dataset, scores, train_pairs, f, fold_seed};
    for (const auto& method : methods) {
      const auto predictor = method.factory(ctx);
      std::vector<PairPrediction> preds;
      preds.reserve(test_labels.size());
      for (const auto& l : test_labels) {
        const PairKey key{dataset.images[l.i].id, dataset.images[l.j].id};
        preds.push_back({l.i, l.j, predictor->predict(scores.row(l.i), scores.row(l.j), key)});
      }
      std::vector<double> acc(K), pres(K);
      for (std::size_t k = 1; k <= K; ++k) {
        acc[k - 1] = topk_accuracy(preds, test_labels, k);
        pres[k - 1] = description_presence(preds, test_labels, k);
      }
      out.accuracy.push_back(std::move(acc));
      out.presence.push_back(std::move(pres));
      if (options.oracle_labels) {
        std::size_t hit = 0;
        for (std::size_t t = 0; t < preds.size(); ++t)
          hit += preds[t].prediction.top() == (*options.oracle_labels)[test_index[t]];
        out.oracle_top1.push_back(static_cast<double>(hit) / static_cast<double>(preds.size()));
      }
    }
  });

  CvResult result;
  result.n_folds = F;
  result.seed = options.seed;
  for (const auto& o : outputs) {
    result.train_pairs_per_fold.push_back(o.n_train);
    result.test_pairs_per_fold.push_back(o.n_test);
  }
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    MethodResult r;
    r.accuracy.method = r.presence.method = methods[mi].name;
    r.accuracy.n_folds = r.presence.n_folds = F;
    r.accuracy.mean.assign(K, 0.0);
    r.presence.mean.assign(K, 0.0);
    for (const auto& o : outputs) {
      r.accuracy.per_fold.push_back(o.accuracy[mi]);
      r.presence.per_fold.push_back(o.presence[mi]);
      for (std::size_t k = 0; k < K; ++k) {
        r.accuracy.mean[k] += o.accuracy[mi][k] / static_cast<double>(F);
        r.presence.mean[k] += o.presence[mi][k] / static_cast<double>(F);
      }
      if (options.oracle_labels) r.oracle_top1_per_fold.push_back(o.oracle_top1[mi]);
    }
    r.oracle_top1 = mean_of(r.oracle_top1_per_fold);
    result.methods.push_back(std::move(r));
  }
  return result;
}

std::string accuracy_csv(const CvResult& result) {
  std::string out = "method,k,fold,accuracy\n";
  for (const auto& m : result.methods) {
    for (std::size_t f = 0; f < m.accuracy.per_fold.size(); ++f) {
      for (std::size_t k = 0; k < m.accuracy.per_fold[f].size(); ++k)
        out += m.accuracy.method + "," + std::to_string(k + 1) + "," + std::to_string(f) + "," +
               format_double(m.accuracy.per_fold[f][k]) + "\n";
    }
  }
  return out;
}

json summary_json(const CvResult& result) {
  json methods = json::object();
  for (const auto& m : result.methods) {
    json entry{{"accuracy", m.accuracy.mean}, {"presence", m.presence.mean}};
    if (!m.oracle_top1_per_fold.empty()) {
      entry["oracle_top1"] = m.oracle_top1;
      entry["oracle_top1_per_fold"] = m.oracle_top1_per_fold;
    }
    methods[m.accuracy.method] = entry;
  }
  return json{{"n_folds", result.n_folds},
              {"seed", result.seed},
              {"train_pairs_per_fold", result.train_pairs_per_fold},
              {"test_pairs_per_fold", result.test_pairs_per_fold},
              {"methods", methods}};
}

std::string gnuplot_table(const CvResult& result) {
  std::string out = "# k";
  for (const auto& m : result.methods) out += " " + m.accuracy.method;
  out += "\n";
  const std::size_t K = result.methods.empty() ? 0 : result.methods.front().accuracy.mean.size();
  for (std::size_t k = 0; k < K; ++k) {
    out += std::to_string(k + 1);
    for (const auto& m : result.methods) out += " " + format_double(m.accuracy.mean[k]);
    out += "\n";
  }
  return out;
}

}  // namespace prom
