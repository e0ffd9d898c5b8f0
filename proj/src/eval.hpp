#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "baselines.hpp"
#include "dataset.hpp"
#include "prominence.hpp"
#include "ranker.hpp"

namespace prom {

struct PairPrediction {
  ImageIndex i = 0;
  ImageIndex j = 0;
  Prediction prediction;
};

// Ground truth at k is the first min(k, c) vote-ranked attributes, c being the
// number of attributes with any vote. A pair counts as correct when the
// predicted top attribute is in that set.
double topk_accuracy(const std::vector<PairPrediction>& predictions, const std::vector<GroundTruthLabel>& labels,
                     std::size_t k);

// Mean over pairs of |top-k predicted  ∩  top-min(k, c) truth| / min(k, c).
double description_presence(const std::vector<PairPrediction>& predictions,
                            const std::vector<GroundTruthLabel>& labels, std::size_t k);

struct AccuracyCurve {
  std::string method;
  std::size_t n_folds = 0;
  std::vector<double> mean;                   // index k-1
  std::vector<std::vector<double>> per_fold;  // [fold][k-1]
};

// What a method sees when it is fitted for one fold.
struct FoldContext {
  const Dataset& dataset;
  const ScoreMatrix& scores;  // rows follow dataset image order
  const std::vector<LabeledPair>& train_pairs;
  std::size_t fold;
  std::uint64_t seed;
};

using MethodFactory = std::function<std::unique_ptr<PairPredictor>(const FoldContext&)>;

struct Method {
  std::string name;
  MethodFactory factory;
};

struct CvOptions {
  std::size_t n_folds = 10;
  std::uint64_t seed = 0;
  std::size_t max_k = 5;
  RankerHyper ranker;
  ProminenceHyper prominence;
  // When set, these scores (dataset image order) replace per-fold ranker training.
  std::optional<ScoreMatrix> external_scores;
  // Oracle top labels parallel to dataset.votes.pairs, for synthetic data.
  std::optional<std::vector<AttributeId>> oracle_labels;
};

// Built-in methods: "model", "widest" (tf-idf weighted), "single", "prior".
Method builtin_method(const std::string& name, const CvOptions& options);
std::vector<Method> builtin_methods(const std::vector<std::string>& names, const CvOptions& options);

struct MethodResult {
  AccuracyCurve accuracy;
  AccuracyCurve presence;
  // Per-fold top-1 agreement with oracle labels, when those are available.
  std::vector<double> oracle_top1_per_fold;
  double oracle_top1 = 0.0;
};

struct CvResult {
  std::vector<MethodResult> methods;
  std::vector<std::size_t> train_pairs_per_fold;
  std::vector<std::size_t> test_pairs_per_fold;
  std::size_t n_folds = 0;
  std::uint64_t seed = 0;

  const MethodResult& method(const std::string& name) const;
};

CvResult cross_validate(const Dataset& dataset, const std::vector<Method>& methods, const CvOptions& options);

// method,k,fold,accuracy
std::string accuracy_csv(const CvResult& result);
nlohmann::json summary_json(const CvResult& result);
// Whitespace table: k followed by one mean accuracy column per method.
std::string gnuplot_table(const CvResult& result);

}  // namespace prom
