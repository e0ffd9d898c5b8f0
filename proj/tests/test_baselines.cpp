#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "baselines.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "support.hpp"

using namespace prom;

namespace {

std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t M, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(n, std::vector<double>(M));
  for (auto& r : rows)
    for (auto& v : r) v = rng.normal();
  return rows;
}

std::vector<LabeledPair> consecutive_pairs(std::size_t n, const std::vector<AttributeId>& labels) {
  std::vector<LabeledPair> out;
  for (std::size_t k = 0; k < labels.size(); ++k) out.push_back({k % n, (k + 1) % n, labels[k]});
  return out;
}

// Independent tf-idf reference: median by nth_element, explicit loops.
double tfidf_reference(const std::vector<std::vector<double>>& rows, const std::vector<LabeledPair>& pairs,
                       std::size_t M, AttributeId m) {
  const double n = pairs.size();
  double count = 0;
  std::vector<double> d;
  for (const auto& p : pairs) {
    count += p.label == m;
    d.push_back(std::abs(rows[p.u][m] - rows[p.v][m]));
  }
  auto lo = d, hi = d;
  std::nth_element(lo.begin(), lo.begin() + (d.size() - 1) / 2, lo.end());
  std::nth_element(hi.begin(), hi.begin() + d.size() / 2, hi.end());
  const double median = 0.5 * (lo[(d.size() - 1) / 2] + hi[d.size() / 2]);
  double above = 0;
  for (double x : d) above += x > median;
  return std::max(0.0, (count + 1) / (n + M) * std::log(n / (1 + above)));
}

}  // namespace

TEST_CASE("widest difference worked examples") {
  const std::vector<double> ru{0.9, 0.1}, rv{0.1, 0.3};
  CHECK(widest_difference(ru, rv, std::vector<double>{1, 1}).top() == 0);
  CHECK(widest_difference(ru, rv, std::vector<double>{0, 1}).top() == 1);
  const auto same = widest_difference(ru, ru, std::vector<double>{1, 1});
  CHECK(same.scores == std::vector<double>{0, 0});
  CHECK(same.ranked == std::vector<AttributeId>{0, 1});
  CHECK_THROWS_AS(widest_difference(ru, rv, std::vector<double>{1}), Error);
}

TEST_CASE("uniform widest difference is shift invariant and symmetric") {
  const auto rows = random_rows(100, 5, 3);
  const std::vector<double> w(5, 1.0);
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    auto a = rows[k], b = rows[k + 1];
    const auto p = widest_difference(a, b, w);
    CHECK(p.ranked == widest_difference(b, a, w).ranked);
    for (std::size_t m = 0; m < 5; ++m) a[m] += 0.25, b[m] += 0.25;
    CHECK(widest_difference(a, b, w).top() == p.top());
  }
}

TEST_CASE("tf-idf weights match an independent computation") {
  const auto rows = random_rows(30, 10, 8);
  const auto scores = testing::score_rows(rows);
  std::vector<AttributeId> labels;
  for (int k = 0; k < 9; ++k) labels.push_back(k % 3);
  const auto pairs = consecutive_pairs(30, labels);
  const auto w = fit_tfidf_weights(scores, pairs, 10);
  for (AttributeId m = 0; m < 10; ++m) CHECK(w[m] == doctest::Approx(tfidf_reference(rows, pairs, 10, m)));

  // Attribute 7 is never labeled: tf = (0 + 1) / (9 + 10). With 9 pairs 4 lie
  // above the median, so idf = log(9 / 5).
  CHECK(w[7] == doctest::Approx(std::log(9.0 / 5.0) / 19.0));
  CHECK(fit_tfidf_weights(scores, pairs, 10) == w);
  CHECK_THROWS_AS(fit_tfidf_weights(scores, {}, 10), Error);
}

TEST_CASE("tf-idf favors the dominant label") {
  const auto rows = random_rows(40, 4, 9);
  const auto pairs = consecutive_pairs(40, std::vector<AttributeId>(40, 2));
  const auto scores = testing::score_rows(rows);
  const auto w = fit_tfidf_weights(scores, pairs, 4);
  // Every attribute has the same idf (half the pairs are above the median)
  // when the pair count is even, so the tf term decides.
  for (AttributeId m = 0; m < 4; ++m)
    if (m != 2) CHECK(w[2] > w[m]);
}

TEST_CASE("single image projection doubles rows and predicts symmetrically") {
  const auto rows = random_rows(60, 4, 10);
  const auto scores = testing::score_rows(rows);
  std::vector<AttributeId> labels;
  for (std::size_t k = 0; k < 200; ++k) labels.push_back(rows[k % 60][0] > 0 ? 0 : (k % 3) + 1);
  const auto pairs = consecutive_pairs(60, labels);
  CHECK(single_image_rows(pairs).size() == 2 * pairs.size());
  SingleImagePredictor pred(train_single_image(scores, pairs, 4, {}));
  for (std::size_t k = 0; k + 1 < 60; ++k) {
    const auto p = pred.predict(rows[k], rows[k + 1], {});
    const auto q = pred.predict(rows[k + 1], rows[k], {});
    CHECK(p.ranked == q.ranked);
    CHECK(p.scores == q.scores);
  }
}

TEST_CASE("prior frequency sampling") {
  std::vector<AttributeId> labels;
  for (int k = 0; k < 100; ++k) labels.push_back(k % 2 ? 1 : 2);
  const auto pairs = consecutive_pairs(10, labels);
  PriorPredictor prior(prior_frequency(pairs, 4, 17));
  CHECK(prior.model().frequency == std::vector<double>{0, 0.5, 0.5, 0});

  const std::vector<double> r(4, 0.0);
  int ones = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::string a = "u" + std::to_string(k), b = "v" + std::to_string(k);
    const auto p = prior.predict(r, r, {a, b});
    CHECK((p.top() == 1 || p.top() == 2));
    ones += p.top() == 1;
    CHECK(prior.predict(r, r, {b, a}).top() == p.top());
  }
  CHECK(ones >= 450);
  CHECK(ones <= 550);

  PriorPredictor single(prior_frequency(consecutive_pairs(10, std::vector<AttributeId>(20, 3)), 4, 1));
  for (int k = 0; k < 50; ++k) CHECK(single.predict(r, r, {std::to_string(k), "x"}).top() == 3);
  CHECK_THROWS_AS(prior_frequency({}, 4, 0), Error);
}

TEST_CASE("prior matched to the label distribution scores sum of squared frequencies") {
  const std::vector<double> freq{0.5, 0.3, 0.2};
  Rng rng(21);
  std::vector<AttributeId> labels;
  for (int k = 0; k < 20000; ++k) labels.push_back(rng.categorical(freq));
  PriorPredictor prior(prior_frequency(consecutive_pairs(10, labels), 3, 5));
  const std::vector<double> r(3, 0.0);
  Rng truth(22);
  int hits = 0;
  const int n = 2000;
  for (int k = 0; k < n; ++k)
    hits += prior.predict(r, r, {"a" + std::to_string(k), "b"}).top() == truth.categorical(freq);
  const double expected = 0.25 + 0.09 + 0.04;
  CHECK(std::abs(double(hits) / n - expected) <= 0.03);
}

TEST_CASE("pair hash is order independent") {
  CHECK(pair_hash("a", "b") == pair_hash("b", "a"));
  CHECK(pair_hash("ab", "c") != pair_hash("a", "bc"));
}
