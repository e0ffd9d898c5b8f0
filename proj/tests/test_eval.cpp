#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "error.hpp"
#include "eval.hpp"
#include "rng.hpp"
#include "synthetic.hpp"

using namespace prom;

namespace {

GroundTruthLabel label(std::map<AttributeId, int> votes, ImageIndex i = 0, ImageIndex j = 1) {
  return ground_truth(VoteEntry{i, j, std::move(votes)});
}

PairPrediction ranked(std::vector<AttributeId> order, ImageIndex i = 0, ImageIndex j = 1) {
  PairPrediction p{i, j, {}};
  p.prediction.ranked = std::move(order);
  p.prediction.scores.assign(p.prediction.ranked.size(), 0.0);
  return p;
}

// Predicts a fixed ranking for every pair.
class FixedPredictor : public PairPredictor {
 public:
  explicit FixedPredictor(std::vector<AttributeId> order) : order_(std::move(order)) {}
  std::string name() const override { return "fixed"; }
  Prediction predict(std::span<const double>, std::span<const double>, const PairKey&) const override {
    Prediction p;
    p.ranked = order_;
    p.scores.assign(order_.size(), 0.0);
    return p;
  }

 private:
  std::vector<AttributeId> order_;
};

// Looks up the vote-ranked truth for the pair.
class TruthPredictor : public PairPredictor {
 public:
  explicit TruthPredictor(const Dataset& ds) {
    for (const auto& e : ds.votes.pairs) {
      const auto key = std::minmax(ds.images[e.i].id, ds.images[e.j].id);
      truth_[key] = ground_truth(e).ranked;
    }
  }
  std::string name() const override { return "truth"; }
  Prediction predict(std::span<const double>, std::span<const double>, const PairKey& key) const override {
    Prediction p;
    p.ranked = truth_.at(std::minmax(std::string(key.id_u), std::string(key.id_v)));
    p.scores.assign(p.ranked.size(), 0.0);
    return p;
  }

 private:
  std::map<std::pair<std::string, std::string>, std::vector<AttributeId>> truth_;
};

SyntheticData small_data(std::size_t labeled = 600) {
  SyntheticSpec s;
  s.num_images = 150;
  s.num_ordered_pairs = 1500;
  s.num_labeled_pairs = labeled;
  return generate_synthetic(s.normalized());
}

}  // namespace

TEST_CASE("top-k accuracy worked examples") {
  const auto votes = label({{1, 4}, {3, 2}, {2, 1}});
  CHECK(topk_accuracy({ranked({3})}, {votes}, 1) == 0.0);
  CHECK(topk_accuracy({ranked({3})}, {votes}, 2) == 1.0);
  const auto unanimous = label({{4, 7}});
  CHECK(topk_accuracy({ranked({4})}, {unanimous}, 3) == 1.0);
  CHECK(topk_accuracy({ranked({1})}, {unanimous}, 3) == 0.0);
}

TEST_CASE("top-k accuracy validates its inputs") {
  const auto l = label({{1, 7}});
  CHECK_THROWS_AS(topk_accuracy({ranked({1})}, {l}, 0), Error);
  CHECK_THROWS_AS(topk_accuracy({ranked({1}), ranked({1})}, {l}, 1), Error);
  CHECK_THROWS_AS(topk_accuracy({ranked({1}, 0, 2)}, {l}, 1), Error);
  CHECK(topk_accuracy({ranked({1}, 1, 0)}, {l}, 1) == 1.0);
}

TEST_CASE("description presence worked examples") {
  const auto truth = label({{1, 3}, {4, 2}, {5, 1}, {2, 1}});
  REQUIRE(truth.ranked == std::vector<AttributeId>{1, 4, 2, 5});
  CHECK(description_presence({ranked({1, 4, 2, 0})}, {truth}, 3) == 1.0);
  CHECK(description_presence({ranked({0, 3, 6, 1})}, {truth}, 3) == 0.0);
  const auto gt = label({{1, 3}, {4, 2}, {5, 1}});
  CHECK(description_presence({ranked({1, 2, 3})}, {gt}, 3) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(description_presence({ranked({1})}, {gt}, 0), Error);
}

TEST_CASE("accuracy is monotone in k for arbitrary predictions") {
  Rng rng(4);
  std::vector<PairPrediction> preds;
  std::vector<GroundTruthLabel> labels;
  for (int p = 0; p < 300; ++p) {
    std::map<AttributeId, int> votes;
    for (int v = 0; v < 7; ++v) votes[rng.below(10)] += 1;
    labels.push_back(label(votes, p, p + 1));
    std::vector<AttributeId> order(10);
    for (AttributeId m = 0; m < 10; ++m) order[m] = m;
    rng.shuffle(order);
    preds.push_back(ranked(order, p, p + 1));
  }
  double prev = 0.0;
  for (std::size_t k = 1; k <= 10; ++k) {
    const double a = topk_accuracy(preds, labels, k);
    CHECK(a >= prev);
    CHECK((a >= 0.0 && a <= 1.0));
    prev = a;
  }
}

TEST_CASE("truth predictor scores 1 at every k") {
  const auto data = small_data();
  CvOptions opt;
  opt.n_folds = 5;
  opt.ranker.epochs = 20;
  const auto& ds = data.dataset;
  const Method truth{"truth", [&ds](const FoldContext&) { return std::make_unique<TruthPredictor>(ds); }};
  const auto r = cross_validate(ds, {truth}, opt);
  for (double a : r.method("truth").accuracy.mean) CHECK(a == 1.0);
  for (double a : r.method("truth").presence.mean) CHECK(a == doctest::Approx(1.0));
}

TEST_CASE("constant attribute on uniform labels scores chance") {
  auto data = small_data(2000);
  // One unanimous vote per pair on a uniformly drawn attribute.
  Rng rng(31);
  for (auto& e : data.dataset.votes.pairs) e.votes = {{rng.below(10), 7}};
  CvOptions opt;
  opt.n_folds = 2;
  opt.ranker.epochs = 5;
  const Method constant{"constant", [](const FoldContext&) {
                          return std::make_unique<FixedPredictor>(std::vector<AttributeId>{4, 0, 1, 2, 3, 5, 6, 7, 8, 9});
                        }};
  const auto r = cross_validate(data.dataset, {constant}, opt);
  CHECK(std::abs(r.method("constant").accuracy.mean[0] - 0.1) <= 0.03);
}

TEST_CASE("cross validation is reproducible and reports every method") {
  const auto data = small_data();
  CvOptions opt;
  opt.n_folds = 4;
  opt.seed = 9;
  opt.ranker.epochs = 20;
  opt.oracle_labels = data.oracle_labels;
  const auto methods = builtin_methods({"model", "widest", "single", "prior"}, opt);
  const auto a = cross_validate(data.dataset, methods, opt);
  const auto b = cross_validate(data.dataset, methods, opt);
  CHECK(accuracy_csv(a) == accuracy_csv(b));
  CHECK(summary_json(a) == summary_json(b));
  CHECK(a.methods.size() == 4);
  for (const auto& m : a.methods) {
    CHECK(m.accuracy.per_fold.size() == 4);
    CHECK(m.oracle_top1_per_fold.size() == 4);
    for (std::size_t k = 1; k < m.accuracy.mean.size(); ++k) CHECK(m.accuracy.mean[k] >= m.accuracy.mean[k - 1]);
  }
  const auto csv = accuracy_csv(a);
  CHECK(csv.rfind("method,k,fold,accuracy\n", 0) == 0);
  // Header plus one row per method, fold and k.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 4 * 5);
  CHECK(gnuplot_table(a).rfind("# k model widest single prior", 0) == 0);
  CHECK_THROWS_AS(builtin_method("dominance", opt), Error);
}

TEST_CASE("folds without test pairs are rejected") {
  const auto data = small_data(20);
  CvOptions opt;
  opt.n_folds = 100;
  CHECK_THROWS_AS(cross_validate(data.dataset, builtin_methods({"prior"}, opt), opt), Error);
}
