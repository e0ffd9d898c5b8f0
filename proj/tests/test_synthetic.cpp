#include <doctest.h>

#include <cmath>

#include "synthetic.hpp"
#include "support.hpp"
#include "text_io.hpp"

using namespace prom;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.num_images = 120;
  s.num_ordered_pairs = 600;
  s.num_similar_pairs = 60;
  s.num_labeled_pairs = 800;
  return s;
}

// argmax over m of |du_m| from raw latents, ties to the lower id.
AttributeId widest_latent(const LatentWorld& w, ImageIndex i, ImageIndex j) {
  AttributeId best = 0;
  double best_v = -1.0;
  for (AttributeId m = 0; m < w.latents[i].size(); ++m) {
    const double v = std::abs(w.latents[i][m] - w.latents[j][m]);
    if (v > best_v) best_v = v, best = m;
  }
  return best;
}

}  // namespace

TEST_CASE("generation is bit-reproducible") {
  testing::TempDir a("syn"), b("syn");
  const auto spec = small_spec().normalized();
  save_synthetic(generate_synthetic(spec), a.str());
  save_synthetic(generate_synthetic(spec), b.str());
  for (const char* f : {"vocab.json", "images.jsonl", "pairs.csv", "votes.jsonl", "spec.json", "latents.csv",
                        "oracle.jsonl"})
    CHECK_MESSAGE(read_file(a.file(f)) == read_file(b.file(f)), f);
}

TEST_CASE("spec validation") {
  auto s = small_spec();
  s.dim = 5;
  CHECK_THROWS(s.normalized());
  s = small_spec();
  s.temperature = 0.0;
  CHECK_THROWS(s.normalized());
}

TEST_CASE("one-hot alpha at low temperature labels the attribute-3 difference") {
  auto s = small_spec();
  s.alpha.assign(s.num_attributes, 0.0);
  s.alpha[3] = 1.0;
  s.beta.assign(s.num_attributes, 0.0);
  s.temperature = 1e-4;
  const auto data = generate_synthetic(s.normalized());
  for (std::size_t k = 0; k < data.dataset.votes.pairs.size(); ++k) {
    const auto& e = data.dataset.votes.pairs[k];
    const double d3 = std::abs(data.world.latents[e.i][3] - data.world.latents[e.j][3]);
    if (d3 > 0) CHECK(data.oracle_labels[k] == 3);
    // All annotators agree at near-zero temperature unless the gap itself is tiny.
    if (d3 > 0.01) {
      REQUIRE(e.votes.size() == 1);
      CHECK(e.votes.begin()->first == 3);
      CHECK(e.votes.begin()->second == s.annotator_count);
    }
  }
}

TEST_CASE("beta = 0 with uniform alpha makes the oracle the widest latent difference") {
  auto s = small_spec();
  s.alpha.assign(s.num_attributes, 0.7);
  s.beta.assign(s.num_attributes, 0.0);
  const auto data = generate_synthetic(s.normalized());
  for (std::size_t k = 0; k < data.dataset.votes.pairs.size(); ++k) {
    const auto& e = data.dataset.votes.pairs[k];
    CHECK(data.oracle_labels[k] == widest_latent(data.world, e.i, e.j));
    CHECK(data.world.widest(e.i, e.j) == widest_latent(data.world, e.i, e.j));
  }
}

TEST_CASE("oracle label is the utility argmax") {
  const auto data = generate_synthetic(small_spec().normalized());
  const auto& spec = data.world.spec;
  for (std::size_t k = 0; k < data.dataset.votes.pairs.size(); ++k) {
    const auto& e = data.dataset.votes.pairs[k];
    const auto& ui = data.world.latents[e.i];
    const auto& uj = data.world.latents[e.j];
    AttributeId best = 0;
    double best_s = -INFINITY;
    for (AttributeId m = 0; m < spec.num_attributes; ++m) {
      const double s = spec.alpha[m] * std::abs(ui[m] - uj[m]) + spec.beta[m] * (ui[m] + uj[m]) / 2;
      if (s > best_s) best_s = s, best = m;
    }
    CHECK(data.oracle_labels[k] == best);
  }
}

TEST_CASE("default spec vote agreement lies in the 70-95% band") {
  const auto data = generate_synthetic(SyntheticSpec{}.normalized());
  const auto stats = agreement_stats(data.dataset.votes);
  CHECK(stats.pct_modal_3plus >= 0.70);
  CHECK(stats.pct_modal_3plus <= 0.95);
}

TEST_CASE("ordered and similar pairs respect the latent thresholds") {
  const auto data = generate_synthetic(small_spec().normalized());
  for (const auto& set : data.dataset.pair_sets) {
    for (const auto& p : set.ordered)
      CHECK(data.world.latents[p.i][set.attribute] - data.world.latents[p.j][set.attribute] > 0.3);
    for (const auto& p : set.similar)
      CHECK(std::abs(data.world.latents[p.i][set.attribute] - data.world.latents[p.j][set.attribute]) < 0.1);
  }
}

TEST_CASE("saved latents and oracle labels load back") {
  testing::TempDir dir("syn");
  const auto data = generate_synthetic(small_spec().normalized());
  save_synthetic(data, dir.str());
  const auto ds = load_dataset(DatasetPaths::in_directory(dir.str()));
  const auto world = load_latent_world(dir.str(), ds);
  CHECK(world.latents == data.world.latents);
  CHECK(load_oracle_labels(dir.str(), ds) == data.oracle_labels);
}
