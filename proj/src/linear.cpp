#include "linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace prom {

LinearClassifier train_linear_svm(const std::vector<std::vector<double>>& x, const std::vector<bool>& positive,
                                  const LinearSvmParams& params) {
  require(!x.empty(), "linear svm: empty training set");
  require(x.size() == positive.size(), "linear svm: label count mismatch");
  const std::size_t n = x.size();
  const std::size_t dim = x.front().size();

  std::vector<double> w(dim + 1, 0.0);  // last entry is the bias weight
  std::vector<double> alpha(n, 0.0);
  std::vector<double> q_diag(n);
  std::vector<double> upper(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = 1.0;
    for (double v : x[i]) q += v * v;
    q_diag[i] = q;
    upper[i] = params.C * (positive[i] ? params.positive_weight : params.negative_weight);
  }

  Rng rng(params.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
    rng.shuffle(order);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
      const double y = positive[i] ? 1.0 : -1.0;
      const auto& xi = x[i];
      double wx = w[dim];
      for (std::size_t d = 0; d < dim; ++d) wx += w[d] * xi[d];
      const double g = y * wx - 1.0;
      double pg = g;
      if (alpha[i] == 0.0)
        pg = std::min(g, 0.0);
      else if (alpha[i] == upper[i])
        pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg != 0.0) {
        const double old = alpha[i];
        alpha[i] = std::clamp(old - g / q_diag[i], 0.0, upper[i]);
        const double delta = (alpha[i] - old) * y;
        for (std::size_t d = 0; d < dim; ++d) w[d] += delta * xi[d];
        w[dim] += delta;
      }
    }
    if (pg_max - pg_min < params.tolerance) break;
  }

  LinearClassifier clf;
  clf.bias = w[dim];
  w.pop_back();
  clf.weights = std::move(w);
  return clf;
}

namespace {

constexpr double kProbabilityFloor = 1e-12;

}  // namespace

double PlattSigmoid::operator()(double margin) const {
  const double z = a * margin + b;
  // Evaluate in the form that cannot overflow.
  const double p = z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

PlattTargets platt_targets(std::size_t num_positive, std::size_t num_negative) {
  return {(static_cast<double>(num_positive) + 1.0) / (static_cast<double>(num_positive) + 2.0),
          1.0 / (static_cast<double>(num_negative) + 2.0)};
}

PlattSigmoid fit_platt(std::span<const double> margins, const std::vector<bool>& positive) {
  require(margins.size() == positive.size(), "platt: label count mismatch");
  require(!margins.empty(), "platt: empty calibration set");
  const std::size_t n = margins.size();
  const std::size_t n_pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
  const PlattTargets targets = platt_targets(n_pos, n - n_pos);

  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = positive[i] ? targets.positive : targets.negative;

  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = margins[i] * a + b;
      if (z >= 0)
        f += t[i] * z + std::log1p(std::exp(-z));
      else
        f += (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  constexpr std::size_t kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  constexpr double kEps = 1e-5;

  double a = 0.0;
  double b = std::log((static_cast<double>(n - n_pos) + 1.0) / (static_cast<double>(n_pos) + 1.0));
  double fval = objective(a, b);
  for (std::size_t iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = margins[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += margins[i] * margins[i] * d2;
      h22 += d2;
      h21 += margins[i] * d2;
      const double d1 = t[i] - p;
      g1 += margins[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool moved = false;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    if (!moved) break;
  }
  return {a, b};
}

}  // namespace prom
