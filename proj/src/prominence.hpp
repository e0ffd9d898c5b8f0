#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "linear.hpp"
#include "ranker.hpp"

namespace prom {

// Symmetric joint representation of an unordered pair of score vectors.
enum class FeatureMap {
  MeanAbsDiff,      // (means, |differences|), length 2M
  Product,          // element-wise products, length M
  AbsDiff,          // |differences| only, length M
  WeightedAverage,  // 0.75 max + 0.25 min per attribute, length M
};

std::string_view to_string(FeatureMap map);
FeatureMap feature_map_from_string(std::string_view name);
std::size_t feature_length(FeatureMap map, std::size_t num_attributes);

std::vector<double> pair_feature(std::span<const double> r_i, std::span<const double> r_j,
                                 FeatureMap map = FeatureMap::MeanAbsDiff);

enum class Polarity { More, Less, Equal };

std::string_view to_string(Polarity p);
Polarity polarity_of(double r_i, double r_j);

// A ranked attribute list for one pair, shared by the model and all baselines.
struct Prediction {
  std::vector<AttributeId> ranked;
  std::vector<double> scores;  // parallel to `ranked`, non-increasing
  std::vector<Polarity> polarity;  // indexed by attribute id, sign of r_u - r_v

  AttributeId top() const { return ranked.front(); }
};

// Orders attribute ids by descending score, ties by ascending id.
std::vector<AttributeId> rank_by_score(std::span<const double> scores);

// Builds a Prediction from per-attribute scores.
Prediction make_prediction(std::span<const double> scores_by_attribute, std::span<const double> r_u,
                           std::span<const double> r_v);

// Identifies the pair being predicted; baselines that randomize use it to seed.
struct PairKey {
  std::string_view id_u;
  std::string_view id_v;
};

class PairPredictor {
 public:
  virtual ~PairPredictor() = default;
  virtual std::string name() const = 0;
  virtual Prediction predict(std::span<const double> r_u, std::span<const double> r_v, const PairKey& key) const = 0;
};

struct ProminenceHyper {
  double C = 0.1;
  FeatureMap feature_map = FeatureMap::MeanAbsDiff;
  double calibration_fraction = 0.2;
  std::size_t min_positives_for_split = 10;
  // After the sigmoid is fitted on the held-out split, retrain the classifier
  // on every training pair and keep the fitted sigmoid.
  bool refit_on_full = true;
  std::uint64_t seed = 0;
};

// A labeled pair in score-matrix row coordinates.
struct LabeledPair {
  std::size_t u = 0;
  std::size_t v = 0;
  AttributeId label = 0;
};

// Converts ground-truth labels (dataset image indices) into score rows. The
// score matrix rows must follow dataset image order.
std::vector<LabeledPair> labeled_pairs(const std::vector<GroundTruthLabel>& labels);

inline constexpr double kSkippedConfidence = 1e-6;

struct ProminenceModel {
  FeatureMap feature_map = FeatureMap::MeanAbsDiff;
  std::vector<LinearClassifier> classifiers;  // one per attribute
  std::vector<PlattSigmoid> calibration;
  std::vector<double> positive_weight;
  std::vector<double> negative_weight;
  std::vector<bool> skipped;  // attribute had no positive training pairs
  // Describes which scores the model was trained against ("ranker" or an
  // external file tag); predictions need scores standardized the same way.
  std::string score_reference = "ranker";
  ProminenceHyper hyper;

  std::size_t num_attributes() const { return classifiers.size(); }

  double raw_margin(AttributeId m, std::span<const double> feature) const;
  double confidence(AttributeId m, std::span<const double> feature) const;
  std::vector<double> confidences(std::span<const double> r_u, std::span<const double> r_v) const;
};

ProminenceModel train_prominence(const ScoreMatrix& scores, const std::vector<LabeledPair>& pairs,
                                 std::size_t num_attributes, const ProminenceHyper& hyper);

Prediction predict(const ProminenceModel& model, std::span<const double> r_u, std::span<const double> r_v);

class ProminencePredictor : public PairPredictor {
 public:
  explicit ProminencePredictor(ProminenceModel model) : model_(std::move(model)) {}
  std::string name() const override { return "model"; }
  Prediction predict(std::span<const double> r_u, std::span<const double> r_v, const PairKey&) const override {
    return prom::predict(model_, r_u, r_v);
  }
  const ProminenceModel& model() const { return model_; }

 private:
  ProminenceModel model_;
};

// One-vs-all calibrated linear classifiers over arbitrary row features. Shared
// by the pairwise model and the single-image baseline. Classes with fewer than
// `min_positives_for_split` positives are trained and calibrated on all rows.
struct OneVsAllFit {
  std::vector<LinearClassifier> classifiers;
  std::vector<PlattSigmoid> calibration;
  std::vector<double> positive_weight;
  std::vector<double> negative_weight;
  std::vector<bool> skipped;
};

OneVsAllFit fit_one_vs_all(const std::vector<std::vector<double>>& features, const std::vector<AttributeId>& labels,
                           std::size_t num_classes, double C, double calibration_fraction,
                           std::size_t min_positives_for_split, std::uint64_t seed,
                           const std::vector<std::size_t>& group = {}, bool refit_on_full = true);

}  // namespace prom
