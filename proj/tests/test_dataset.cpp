#include <doctest.h>

#include <algorithm>
#include <set>

#include "dataset.hpp"
#include "error.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace prom;

namespace {

// Writes a small well-formed dataset and returns its paths; callers overwrite
// individual files to inject faults.
DatasetPaths write_minimal(const testing::TempDir& dir) {
  dir.write("vocab.json", R"(["size"])");
  dir.write("images.jsonl", "{\"id\":\"a\",\"descriptor\":[0,1,2,3]}\n{\"id\":\"b\",\"descriptor\":[1,1,2,3]}\n");
  dir.write("pairs.csv", "attribute_id,i,j,relation\n0,b,a,gt\n");
  dir.write("votes.jsonl", "");
  return DatasetPaths::in_directory(dir.str());
}

std::string load_error(const DatasetPaths& paths, LoadOptions opts = {}) {
  try {
    load_dataset(paths, opts);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

VoteEntry entry(std::map<AttributeId, int> votes) { return {0, 1, std::move(votes)}; }

}  // namespace

TEST_CASE("minimal dataset loads") {
  testing::TempDir dir("ds");
  const auto ds = load_dataset(write_minimal(dir));
  CHECK(ds.num_attributes() == 1);
  CHECK(ds.images.size() == 2);
  CHECK(ds.dim() == 4);
  REQUIRE(ds.pair_sets.size() == 1);
  REQUIRE(ds.pair_sets[0].ordered.size() == 1);
  CHECK(ds.pair_sets[0].ordered[0] == IndexPair{1, 0});
  CHECK(ds.votes.pairs.empty());
  CHECK(ds.index_of("b") == 1);
  CHECK_FALSE(ds.find("zzz").has_value());
}

TEST_CASE("vote attribute out of range is reported with file and line") {
  testing::TempDir dir("ds");
  auto paths = write_minimal(dir);
  dir.write("vocab.json", R"(["a0","a1","a2","a3","a4","a5","a6","a7","a8","a9"])");
  dir.write("votes.jsonl", "{\"i\":\"a\",\"j\":\"b\",\"votes\":{\"10\":7}}\n");
  const auto msg = load_error(paths);
  CHECK(msg.find("attribute id out of range") != std::string::npos);
  CHECK(msg.find("votes.jsonl:1") != std::string::npos);
}

TEST_CASE("descriptor dimension mismatch names the image") {
  testing::TempDir dir("ds");
  auto paths = write_minimal(dir);
  dir.write("images.jsonl", "{\"id\":\"a\",\"descriptor\":[0,1,2,3]}\n{\"id\":\"b\",\"descriptor\":[1,1,2,3,4]}\n");
  const auto msg = load_error(paths);
  CHECK(msg.find("descriptor dimension mismatch") != std::string::npos);
  CHECK(msg.find("'b'") != std::string::npos);
  CHECK(msg.find("images.jsonl:2") != std::string::npos);
}

TEST_CASE("unknown image id in a pair is reported") {
  testing::TempDir dir("ds");
  auto paths = write_minimal(dir);
  dir.write("pairs.csv", "attribute_id,i,j,relation\n0,a,ghost,gt\n");
  const auto msg = load_error(paths);
  CHECK(msg.find("unknown image id 'ghost'") != std::string::npos);
  CHECK(msg.find("pairs.csv:2") != std::string::npos);
}

TEST_CASE("vote totals must match the annotator count unless disabled") {
  testing::TempDir dir("ds");
  auto paths = write_minimal(dir);
  dir.write("votes.jsonl", "{\"i\":\"a\",\"j\":\"b\",\"votes\":{\"0\":5}}\n");
  CHECK(load_error(paths).find("vote total") != std::string::npos);
  LoadOptions lax;
  lax.annotator_count = 0;
  CHECK(load_error(paths, lax).empty());
}

TEST_CASE("templated vocabulary entries load") {
  testing::TempDir dir("ds");
  auto paths = write_minimal(dir);
  dir.write("vocab.json", R"([{"name":"teeth","template":"has {polarity} visible teeth"}])");
  const auto ds = load_dataset(paths);
  CHECK(ds.vocab.name(0) == "teeth");
  CHECK(ds.vocab.templates.at(0) == "has {polarity} visible teeth");
}

TEST_CASE("save and load round trip") {
  testing::TempDir dir("ds");
  SyntheticSpec spec;
  spec.num_images = 40;
  spec.num_ordered_pairs = 200;
  spec.num_similar_pairs = 20;
  spec.num_labeled_pairs = 60;
  const auto data = generate_synthetic(spec.normalized());
  const auto paths = DatasetPaths::in_directory(dir.str());
  save_dataset(data.dataset, paths);
  const auto back = load_dataset(paths);
  REQUIRE(back.images.size() == data.dataset.images.size());
  for (std::size_t k = 0; k < back.images.size(); ++k) {
    CHECK(back.images[k].id == data.dataset.images[k].id);
    CHECK(back.images[k].descriptor == data.dataset.images[k].descriptor);
  }
  REQUIRE(back.votes.pairs.size() == data.dataset.votes.pairs.size());
  for (std::size_t k = 0; k < back.votes.pairs.size(); ++k)
    CHECK(back.votes.pairs[k].votes == data.dataset.votes.pairs[k].votes);
  for (std::size_t m = 0; m < back.pair_sets.size(); ++m) {
    CHECK(back.pair_sets[m].ordered == data.dataset.pair_sets[m].ordered);
    CHECK(back.pair_sets[m].similar == data.dataset.pair_sets[m].similar);
  }
}

TEST_CASE("ground truth orders by count then attribute id") {
  CHECK(ground_truth(entry({{1, 4}, {3, 2}, {2, 1}})).ranked == std::vector<AttributeId>{1, 3, 2});
  const auto tie = ground_truth(entry({{2, 3}, {5, 3}, {1, 1}}));
  CHECK(tie.ranked == std::vector<AttributeId>{2, 5, 1});
  CHECK(tie.top() == 2);
  CHECK(ground_truth(entry({{4, 7}})).ranked == std::vector<AttributeId>{4});
  CHECK_THROWS_AS(ground_truth(entry({})), Error);
}

TEST_CASE("ground truth ignores vote-map insertion order") {
  // Zero-count entries must not appear; permuted inputs give one answer.
  std::vector<std::pair<AttributeId, int>> items{{0, 1}, {3, 2}, {5, 2}, {7, 2}, {9, 0}};
  const auto reference = ground_truth(entry({items.begin(), items.end()})).ranked;
  CHECK(reference == std::vector<AttributeId>{3, 5, 7, 0});
  std::sort(items.begin(), items.end());
  do {
    CHECK(ground_truth(entry({items.begin(), items.end()})).ranked == reference);
  } while (std::next_permutation(items.begin(), items.end()));
}

TEST_CASE("agreement statistics") {
  VoteTable single;
  single.pairs = {entry({{1, 4}, {3, 2}, {2, 1}})};
  auto s = agreement_stats(single);
  CHECK(s.pct_modal_3plus == 1.0);
  CHECK(s.mean_unique_attrs == 3.0);

  VoteTable spread;
  spread.pairs = {entry({{1, 2}, {2, 2}, {3, 2}, {4, 1}})};
  s = agreement_stats(spread);
  CHECK(s.pct_modal_3plus == 0.0);
  CHECK(s.mean_unique_attrs == 4.0);

  VoteTable both;
  both.pairs = {single.pairs[0], spread.pairs[0]};
  s = agreement_stats(both);
  CHECK(s.pct_modal_3plus == 0.5);
  CHECK(s.mean_unique_attrs == 3.5);

  CHECK_THROWS_AS(agreement_stats(VoteTable{}), Error);
}

TEST_CASE("folds split evenly, deterministically and image-disjointly") {
  const auto f = make_folds(10, 5, 3);
  for (std::size_t k = 0; k < 5; ++k) CHECK(f.fold_size(k) == 2);
  const auto g = make_folds(10, 5, 3);
  for (std::size_t i = 0; i < 10; ++i) CHECK(f.fold_of(i) == g.fold_of(i));

  CHECK_THROWS_AS(make_folds(10, 1, 0), Error);
  CHECK_THROWS_AS(make_folds(10, 11, 0), Error);

  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const auto folds = make_folds(50, 10, seed);
    for (std::size_t fold = 0; fold < 10; ++fold) {
      std::set<std::size_t> train_images, test_images;
      for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = i + 1; j < 50; ++j) {
          if (folds.is_train(fold, i, j)) train_images.insert({i, j});
          if (folds.is_test(fold, i, j)) test_images.insert({i, j});
          // A spanning pair is in neither set.
          if (folds.fold_of(i) == fold && folds.fold_of(j) != fold) {
            CHECK_FALSE(folds.is_test(fold, i, j));
            CHECK_FALSE(folds.is_train(fold, i, j));
          }
        }
      for (auto i : test_images) CHECK(train_images.count(i) == 0);
    }
  }
}
