#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prominence.hpp"

namespace prom {

// score_m = weight_m * |r_u[m] - r_v[m]|. Uniform weights give the plain
// widest relative difference.
std::vector<double> widest_difference_scores(std::span<const double> r_u, std::span<const double> r_v,
                                             std::span<const double> weights);
Prediction widest_difference(std::span<const double> r_u, std::span<const double> r_v,
                             std::span<const double> weights);

// tf_m = (count of m as top label + 1) / (N + M)
// idf_m = log(N / (1 + d_m)), d_m = pairs whose |dr_m| exceeds that attribute's
// median |dr_m|; weight_m = max(0, tf_m * idf_m).
std::vector<double> fit_tfidf_weights(const ScoreMatrix& scores, const std::vector<LabeledPair>& pairs,
                                      std::size_t num_attributes);

class WidestPredictor : public PairPredictor {
 public:
  explicit WidestPredictor(std::vector<double> weights) : weights_(std::move(weights)) {}
  std::string name() const override { return "widest"; }
  Prediction predict(std::span<const double> r_u, std::span<const double> r_v, const PairKey&) const override {
    return widest_difference(r_u, r_v, weights_);
  }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

// One-vs-all classifier on single-image score vectors. Each labeled pair
// contributes one row per image, both carrying the pair's label.
struct SingleImageModel {
  std::vector<LinearClassifier> classifiers;
  std::vector<PlattSigmoid> calibration;
  std::vector<bool> skipped;

  std::size_t num_attributes() const { return classifiers.size(); }
  // Mean of the two images' posteriors per attribute.
  std::vector<double> pair_scores(std::span<const double> r_u, std::span<const double> r_v) const;
};

struct SingleImageHyper {
  double C = 0.1;
  double calibration_fraction = 0.2;
  std::size_t min_positives_for_split = 10;
  std::uint64_t seed = 0;
};

// Rows of the projected training set, exposed for inspection in tests.
std::vector<std::pair<std::size_t, AttributeId>> single_image_rows(const std::vector<LabeledPair>& pairs);

SingleImageModel train_single_image(const ScoreMatrix& scores, const std::vector<LabeledPair>& pairs,
                                    std::size_t num_attributes, const SingleImageHyper& hyper);

class SingleImagePredictor : public PairPredictor {
 public:
  explicit SingleImagePredictor(SingleImageModel model) : model_(std::move(model)) {}
  std::string name() const override { return "single"; }
  Prediction predict(std::span<const double> r_u, std::span<const double> r_v, const PairKey&) const override {
    return make_prediction(model_.pair_scores(r_u, r_v), r_u, r_v);
  }
  const SingleImageModel& model() const { return model_; }

 private:
  SingleImageModel model_;
};

struct PriorModel {
  std::vector<double> frequency;
  std::uint64_t seed = 0;
};

PriorModel prior_frequency(const std::vector<LabeledPair>& pairs, std::size_t num_attributes, std::uint64_t seed);

// Order-independent hash of a pair of ids.
std::uint64_t pair_hash(std::string_view a, std::string_view b);

// Samples the top attribute with probability frequency_m from a stream keyed
// by the pair; the rest follow by descending frequency. The sampled attribute
// is scored 1, the others by their frequency.
class PriorPredictor : public PairPredictor {
 public:
  explicit PriorPredictor(PriorModel model) : model_(std::move(model)) {}
  std::string name() const override { return "prior"; }
  Prediction predict(std::span<const double> r_u, std::span<const double> r_v, const PairKey& key) const override;
  const PriorModel& model() const { return model_; }

 private:
  PriorModel model_;
};

// Everything the unified model file can carry besides ranker and prominence.
struct BaselineSet {
  std::optional<std::vector<double>> tfidf_weights;
  std::optional<SingleImageModel> single_image;
  std::optional<PriorModel> prior;
};

}  // namespace prom
