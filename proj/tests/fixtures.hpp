#pragma once

#include "baselines.hpp"
#include "model_io.hpp"
#include "rng.hpp"
#include "synthetic.hpp"

namespace testing {

// A small synthetic world with a fully trained model bundle.
struct Trained {
  prom::SyntheticData data;
  prom::ModelBundle bundle;
  prom::ScoreMatrix scores;
};

inline Trained train_small(std::size_t images = 120, std::uint64_t seed = 7) {
  prom::SyntheticSpec spec;
  spec.num_images = images;
  spec.num_ordered_pairs = 1200;
  spec.num_labeled_pairs = 800;
  spec.seed = seed;
  Trained t{prom::generate_synthetic(spec.normalized()), {}, {}};
  const auto& ds = t.data.dataset;
  prom::RankerHyper rh;
  rh.epochs = 40;
  t.bundle.vocab = ds.vocab;
  t.bundle.ranker = prom::train_ranker(ds, rh);
  t.scores = prom::score_all(*t.bundle.ranker, ds.images);
  const auto pairs = prom::labeled_pairs(prom::ground_truth(ds.votes));
  const std::size_t M = ds.num_attributes();
  t.bundle.prominence = prom::train_prominence(t.scores, pairs, M, {});
  t.bundle.baselines.tfidf_weights = prom::fit_tfidf_weights(t.scores, pairs, M);
  t.bundle.baselines.single_image = prom::train_single_image(t.scores, pairs, M, {});
  t.bundle.baselines.prior = prom::prior_frequency(pairs, M, 3);
  t.bundle.run = {{"seed", seed}};
  return t;
}

}  // namespace testing
