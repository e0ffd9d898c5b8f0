#include "baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace prom {

std::vector<double> widest_difference_scores(std::span<const double> r_u, std::span<const double> r_v,
                                             std::span<const double> weights) {
  if (r_u.size() != r_v.size() || r_u.size() != weights.size())
    fail(ErrorCode::InvalidArgument, "widest difference: length mismatch");
  std::vector<double> s(r_u.size());
  for (std::size_t m = 0; m < s.size(); ++m) s[m] = weights[m] * std::abs(r_u[m] - r_v[m]);
  return s;
}

Prediction widest_difference(std::span<const double> r_u, std::span<const double> r_v,
                             std::span<const double> weights) {
  return make_prediction(widest_difference_scores(r_u, r_v, weights), r_u, r_v);
}

std::vector<double> fit_tfidf_weights(const ScoreMatrix& scores, const std::vector<LabeledPair>& pairs,
                                      std::size_t num_attributes) {
  if (pairs.empty()) fail(ErrorCode::InvalidArgument, "tf-idf weights need a non-empty training set");
  const std::size_t M = num_attributes;
  const double n = static_cast<double>(pairs.size());

  std::vector<double> counts(M, 0.0);
  for (const auto& p : pairs) counts.at(p.label) += 1.0;

  std::vector<double> weights(M);
  std::vector<double> diffs(pairs.size());
  for (AttributeId m = 0; m < M; ++m) {
    for (std::size_t k = 0; k < pairs.size(); ++k)
      diffs[k] = std::abs(scores.at(pairs[k].u, m) - scores.at(pairs[k].v, m));
    std::vector<double> sorted = diffs;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t h = sorted.size() / 2;
    const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
    const auto d = static_cast<double>(std::count_if(diffs.begin(), diffs.end(), [&](double x) { return x > median; }));
    const double tf = (counts[m] + 1.0) / (n + static_cast<double>(M));
    const double idf = std::log(n / (1.0 + d));
    weights[m] = std::max(0.0, tf * idf);
  }
  return weights;
}

std::vector<double> SingleImageModel::pair_scores(std::span<const double> r_u, std::span<const double> r_v) const {
  std::vector<double> s(num_attributes());
  for (AttributeId m = 0; m < s.size(); ++m) {
    const double pu = calibration[m](classifiers[m].margin(r_u));
    const double pv = calibration[m](classifiers[m].margin(r_v));
    s[m] = 0.5 * (pu + pv);
  }
  return s;
}

std::vector<std::pair<std::size_t, AttributeId>> single_image_rows(const std::vector<LabeledPair>& pairs) {
  std::vector<std::pair<std::size_t, AttributeId>> rows;
  rows.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    rows.emplace_back(p.u, p.label);
    rows.emplace_back(p.v, p.label);
  }
  return rows;
}

SingleImageModel train_single_image(const ScoreMatrix& scores, const std::vector<LabeledPair>& pairs,
                                    std::size_t num_attributes, const SingleImageHyper& hyper) {
  require(!pairs.empty(), "single-image baseline needs labeled pairs");
  const auto rows = single_image_rows(pairs);
  std::vector<std::vector<double>> features;
  std::vector<AttributeId> labels;
  std::vector<std::size_t> group;
  features.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = scores.row(rows[k].first);
    features.emplace_back(r.begin(), r.end());
    labels.push_back(rows[k].second);
    group.push_back(k / 2);
  }
  OneVsAllFit fit = fit_one_vs_all(features, labels, num_attributes, hyper.C, hyper.calibration_fraction,
                                   hyper.min_positives_for_split, hyper.seed, group);
  return {std::move(fit.classifiers), std::move(fit.calibration), std::move(fit.skipped)};
}

PriorModel prior_frequency(const std::vector<LabeledPair>& pairs, std::size_t num_attributes, std::uint64_t seed) {
  if (pairs.empty()) fail(ErrorCode::InvalidArgument, "prior frequency needs a non-empty training set");
  PriorModel model{std::vector<double>(num_attributes, 0.0), seed};
  for (const auto& p : pairs) model.frequency.at(p.label) += 1.0;
  for (auto& f : model.frequency) f /= static_cast<double>(pairs.size());
  return model;
}

std::uint64_t pair_hash(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  std::uint64_t h = fnv1a(a);
  h = fnv1a(std::string_view("\0", 1), h);
  return fnv1a(b, h);
}

Prediction PriorPredictor::predict(std::span<const double> r_u, std::span<const double> r_v,
                                   const PairKey& key) const {
  Rng rng(derive_seed(model_.seed, pair_hash(key.id_u, key.id_v)));
  const AttributeId sampled = rng.categorical(model_.frequency);
  std::vector<double> scores = model_.frequency;
  scores[sampled] = 1.0 + scores[sampled];
  Prediction p = make_prediction(scores, r_u, r_v);
  p.scores.front() = 1.0;
  return p;
}

}  // namespace prom
