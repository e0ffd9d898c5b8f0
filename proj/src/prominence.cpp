#include "prominence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "log.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace prom {

std::string_view to_string(FeatureMap map) {
  switch (map) {
    case FeatureMap::MeanAbsDiff: return "mean_absdiff";
    case FeatureMap::Product: return "product";
    case FeatureMap::AbsDiff: return "absdiff";
    case FeatureMap::WeightedAverage: return "weighted_average";
  }
  return "mean_absdiff";
}

FeatureMap feature_map_from_string(std::string_view name) {
  if (name == "mean_absdiff") return FeatureMap::MeanAbsDiff;
  if (name == "product") return FeatureMap::Product;
  if (name == "absdiff") return FeatureMap::AbsDiff;
  if (name == "weighted_average") return FeatureMap::WeightedAverage;
  fail(ErrorCode::InvalidArgument, "unknown feature map '" + std::string(name) + "'");
}

std::size_t feature_length(FeatureMap map, std::size_t num_attributes) {
  return map == FeatureMap::MeanAbsDiff ? 2 * num_attributes : num_attributes;
}

std::vector<double> pair_feature(std::span<const double> r_i, std::span<const double> r_j, FeatureMap map) {
  if (r_i.size() != r_j.size())
    fail(ErrorCode::InvalidArgument, "pair feature: score vectors differ in length (" +
                                         std::to_string(r_i.size()) + " vs " + std::to_string(r_j.size()) + ")");
  const std::size_t M = r_i.size();
  std::vector<double> phi(feature_length(map, M));
  // Each entry is built from commutative operations only, so swapping the
  // arguments yields a bit-identical vector.
  for (std::size_t m = 0; m < M; ++m) {
    const double a = r_i[m];
    const double b = r_j[m];
    switch (map) {
      case FeatureMap::MeanAbsDiff:
        phi[m] = (a + b) / 2.0;
        phi[M + m] = std::abs(a - b);
        break;
      case FeatureMap::Product:
        phi[m] = a * b;
        break;
      case FeatureMap::AbsDiff:
        phi[m] = std::abs(a - b);
        break;
      case FeatureMap::WeightedAverage:
        phi[m] = 0.75 * std::max(a, b) + 0.25 * std::min(a, b);
        break;
    }
  }
  return phi;
}

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::More: return "more";
    case Polarity::Less: return "less";
    case Polarity::Equal: return "equal";
  }
  return "equal";
}

Polarity polarity_of(double r_i, double r_j) {
  if (r_i > r_j) return Polarity::More;
  if (r_i < r_j) return Polarity::Less;
  return Polarity::Equal;
}

std::vector<AttributeId> rank_by_score(std::span<const double> scores) {
  std::vector<AttributeId> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](AttributeId a, AttributeId b) { return scores[a] > scores[b]; });
  return order;
}

Prediction make_prediction(std::span<const double> scores_by_attribute, std::span<const double> r_u,
                           std::span<const double> r_v) {
  Prediction p;
  p.ranked = rank_by_score(scores_by_attribute);
  p.scores.reserve(p.ranked.size());
  for (AttributeId m : p.ranked) p.scores.push_back(scores_by_attribute[m]);
  p.polarity.reserve(r_u.size());
  for (std::size_t m = 0; m < r_u.size(); ++m) p.polarity.push_back(polarity_of(r_u[m], r_v[m]));
  return p;
}

std::vector<LabeledPair> labeled_pairs(const std::vector<GroundTruthLabel>& labels) {
  std::vector<LabeledPair> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back({l.i, l.j, l.top()});
  return out;
}

OneVsAllFit fit_one_vs_all(const std::vector<std::vector<double>>& features, const std::vector<AttributeId>& labels,
                           std::size_t num_classes, double C, double calibration_fraction,
                           std::size_t min_positives_for_split, std::uint64_t seed,
                           const std::vector<std::size_t>& group, bool refit_on_full) {
  require(!features.empty(), "one-vs-all: empty training set");
  require(features.size() == labels.size(), "one-vs-all: label count mismatch");
  require(group.empty() || group.size() == features.size(), "one-vs-all: group count mismatch");
  const std::size_t n = features.size();

  // Held-out calibration rows, split by group so projected rows of one pair
  // stay together.
  std::vector<std::size_t> group_of(n);
  std::size_t num_groups = 0;
  for (std::size_t k = 0; k < n; ++k) {
    group_of[k] = group.empty() ? k : group[k];
    num_groups = std::max(num_groups, group_of[k] + 1);
  }
  std::vector<std::size_t> groups(num_groups);
  std::iota(groups.begin(), groups.end(), 0);
  Rng split_rng(derive_seed(seed, 0xca11b));
  split_rng.shuffle(groups);
  const auto n_calib_groups = static_cast<std::size_t>(std::ceil(calibration_fraction * static_cast<double>(num_groups)));
  std::vector<bool> calib_group(num_groups, false);
  for (std::size_t g = 0; g < n_calib_groups && g < num_groups; ++g) calib_group[groups[g]] = true;
  std::vector<bool> is_calib(n);
  for (std::size_t k = 0; k < n; ++k) is_calib[k] = calib_group[group_of[k]];

  OneVsAllFit fit;
  fit.classifiers.resize(num_classes);
  fit.calibration.resize(num_classes);
  fit.positive_weight.assign(num_classes, 1.0);
  fit.negative_weight.assign(num_classes, 1.0);
  fit.skipped.assign(num_classes, false);

  parallel_for(num_classes, [&](std::size_t m) {
    std::size_t total_pos = 0, train_pos = 0, calib_pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (labels[k] != m) continue;
      ++total_pos;
      (is_calib[k] ? calib_pos : train_pos) += 1;
    }
    if (total_pos == 0) {
      fit.skipped[m] = true;
      fit.classifiers[m].weights.assign(features.front().size(), 0.0);
      fit.calibration[m] = {0.0, std::log(1.0 / kSkippedConfidence - 1.0)};
      return;
    }
    const bool split = total_pos >= min_positives_for_split && train_pos > 0 && calib_pos > 0;

    std::vector<std::vector<double>> train_x;
    std::vector<bool> train_y;
    for (std::size_t k = 0; k < n; ++k) {
      if (split && is_calib[k]) continue;
      train_x.push_back(features[k]);
      train_y.push_back(labels[k] == m);
    }
    const double n_train = static_cast<double>(train_x.size());
    const auto n_pos = static_cast<double>(std::count(train_y.begin(), train_y.end(), true));
    const double n_neg = n_train - n_pos;
    fit.positive_weight[m] = n_train / (2.0 * n_pos);
    fit.negative_weight[m] = n_neg > 0 ? n_train / (2.0 * n_neg) : 1.0;

    LinearSvmParams params;
    params.C = C;
    params.positive_weight = fit.positive_weight[m];
    params.negative_weight = fit.negative_weight[m];
    params.seed = derive_seed(seed, m);
    fit.classifiers[m] = train_linear_svm(train_x, train_y, params);

    std::vector<double> margins;
    std::vector<bool> calib_y;
    for (std::size_t k = 0; k < n; ++k) {
      if (split && !is_calib[k]) continue;
      margins.push_back(fit.classifiers[m].margin(features[k]));
      calib_y.push_back(labels[k] == m);
    }
    fit.calibration[m] = fit_platt(margins, calib_y);
    if (split && refit_on_full) {
      std::vector<bool> all_y(n);
      for (std::size_t k = 0; k < n; ++k) all_y[k] = labels[k] == m;
      fit.classifiers[m] = train_linear_svm(features, all_y, params);
    }
  });
  return fit;
}

double ProminenceModel::raw_margin(AttributeId m, std::span<const double> feature) const {
  return classifiers[m].margin(feature);
}

double ProminenceModel::confidence(AttributeId m, std::span<const double> feature) const {
  if (m < skipped.size() && skipped[m]) return kSkippedConfidence;
  return calibration[m](raw_margin(m, feature));
}

std::vector<double> ProminenceModel::confidences(std::span<const double> r_u, std::span<const double> r_v) const {
  const auto phi = pair_feature(r_u, r_v, feature_map);
  std::vector<double> out(num_attributes());
  for (AttributeId m = 0; m < out.size(); ++m) out[m] = confidence(m, phi);
  return out;
}

ProminenceModel train_prominence(const ScoreMatrix& scores, const std::vector<LabeledPair>& pairs,
                                 std::size_t num_attributes, const ProminenceHyper& hyper) {
  require(!pairs.empty(), "prominence training needs labeled pairs");
  require(scores.num_attributes() == num_attributes, "score matrix attribute count mismatch");
  std::vector<std::vector<double>> features;
  std::vector<AttributeId> labels;
  features.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    require(p.u < scores.size() && p.v < scores.size(), "labeled pair references a missing score row");
    require(p.label < num_attributes, "label out of range");
    features.push_back(pair_feature(scores.row(p.u), scores.row(p.v), hyper.feature_map));
    labels.push_back(p.label);
  }
  OneVsAllFit fit = fit_one_vs_all(features, labels, num_attributes, hyper.C, hyper.calibration_fraction,
                                   hyper.min_positives_for_split, hyper.seed, {}, hyper.refit_on_full);
  ProminenceModel model;
  model.feature_map = hyper.feature_map;
  model.classifiers = std::move(fit.classifiers);
  model.calibration = std::move(fit.calibration);
  model.positive_weight = std::move(fit.positive_weight);
  model.negative_weight = std::move(fit.negative_weight);
  model.skipped = std::move(fit.skipped);
  model.hyper = hyper;
  for (AttributeId m = 0; m < num_attributes; ++m)
    if (model.skipped[m])
      log::warn("attribute " + std::to_string(m) + " has no positive training pairs; confidence fixed to 1e-6");
  return model;
}

Prediction predict(const ProminenceModel& model, std::span<const double> r_u, std::span<const double> r_v) {
  return make_prediction(model.confidences(r_u, r_v), r_u, r_v);
}

}  // namespace prom
