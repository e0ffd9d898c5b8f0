#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dataset.hpp"

namespace prom {

struct RankerHyper {
  double C = 1.0;
  std::size_t epochs = 200;
  double similar_margin = 0.1;
  std::uint64_t seed = 0;
};

inline constexpr double kSigmaFloor = 1e-8;

// Per-attribute centering and scaling of raw scores.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> sigma;

  double apply(AttributeId m, double raw) const { return (raw - mean[m]) / sigma[m]; }
};

// Mean and population stdev per column of `raw` (rows are images). A column
// with stdev below kSigmaFloor is reported as a zero variance attribute
// through the log; its sigma is floored and its center pinned to the first
// value so a constant column standardizes to exact zeros.
Standardization fit_standardization(const std::vector<std::vector<double>>& raw, std::size_t num_attributes,
                                    const AttributeVocabulary* vocab = nullptr);

struct RankerModel {
  std::vector<std::vector<double>> weights;  // M x D
  Standardization standardization;
  RankerHyper hyper;

  std::size_t num_attributes() const { return weights.size(); }
  std::size_t dim() const { return weights.empty() ? 0 : weights.front().size(); }
  double raw_score(AttributeId m, std::span<const double> x) const;
};

// Standardized relative attribute scores, one row of M values per image.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::vector<std::string> ids, std::size_t num_attributes, std::vector<double> values);

  std::size_t size() const { return ids_.size(); }
  std::size_t num_attributes() const { return num_attributes_; }
  const std::vector<std::string>& ids() const { return ids_; }

  std::span<const double> row(std::size_t k) const {
    return {values_.data() + k * num_attributes_, num_attributes_};
  }
  double at(std::size_t k, AttributeId m) const { return values_[k * num_attributes_ + m]; }

  std::optional<std::size_t> find(const std::string& id) const;
  std::size_t index_of(const std::string& id) const;
  std::span<const double> row(const std::string& id) const { return row(index_of(id)); }

 private:
  std::vector<std::string> ids_;
  std::size_t num_attributes_ = 0;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Trains one linear ranking function per attribute. When `train_mask` is given
// only pairs whose images are both in the mask are used, and the
// standardization is fitted over the masked images.
RankerModel train_ranker(const Dataset& dataset, const RankerHyper& hyper,
                         const std::vector<bool>* train_mask = nullptr);

// Raw w_m . x_i for every image, rows aligned with `images`.
std::vector<std::vector<double>> raw_scores(const RankerModel& model, const std::vector<ImageRecord>& images);

ScoreMatrix score_all(const RankerModel& model, const std::vector<ImageRecord>& images);

// Fraction of `pairs` (i ahead of j) with score(i) > score(j) on attribute m.
double ordered_satisfaction(const ScoreMatrix& scores, AttributeId m, const std::vector<IndexPair>& pairs);

// External score CSV, header image_id,score_0,...,score_{M-1}. Values are raw
// scores; ingestion standardizes them over the rows in the file. When
// `required_ids` is non-empty every id must be present.
ScoreMatrix ingest_scores(const std::string& path, std::size_t num_attributes,
                          const std::vector<std::string>& required_ids = {});

void write_score_csv(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<std::vector<double>>& raw);

}  // namespace prom
