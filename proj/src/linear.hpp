#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace prom {

struct LinearSvmParams {
  double C = 1.0;
  double positive_weight = 1.0;
  double negative_weight = 1.0;
  double tolerance = 0.1;
  std::size_t max_iterations = 1000;
  std::uint64_t seed = 0;
};

struct LinearClassifier {
  std::vector<double> weights;
  double bias = 0.0;

  double margin(std::span<const double> x) const {
    double s = bias;
    for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * x[k];
    return s;
  }
};

// L2-regularized hinge-loss SVM trained by dual coordinate descent. The bias
// is learned as the weight of an implicit constant feature. Rows of `x` all
// have the same length; labels are true for the positive class.
LinearClassifier train_linear_svm(const std::vector<std::vector<double>>& x, const std::vector<bool>& positive,
                                  const LinearSvmParams& params);

// Sigmoid P(y = 1 | f) = 1 / (1 + exp(a f + b)).
struct PlattSigmoid {
  double a = 0.0;
  double b = 0.0;

  double operator()(double margin) const;
};

struct PlattTargets {
  double positive;
  double negative;
};

PlattTargets platt_targets(std::size_t num_positive, std::size_t num_negative);

// Maximum-likelihood sigmoid fit with smoothed targets, by Newton's method
// with backtracking line search.
PlattSigmoid fit_platt(std::span<const double> margins, const std::vector<bool>& positive);

}  // namespace prom
