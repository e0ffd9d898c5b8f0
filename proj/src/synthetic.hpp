#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"

namespace prom {

// Parameters of the synthetic benchmark. Every image has latent attribute
// strengths u ~ N(0, I_M) and descriptor x = G u + noise. Pair prominence is
// driven by utility s_m = alpha_m |du_m| + beta_m (u_m^i + u_m^j) / 2.
struct SyntheticSpec {
  std::size_t num_attributes = 10;
  std::size_t dim = 32;
  std::size_t num_images = 400;
  std::uint64_t map_seed = 1;
  int annotator_count = 7;
  std::vector<double> alpha;  // empty = filled with default_alpha
  std::vector<double> beta;   // empty = filled with default_beta
  double temperature = 0.5;
  std::uint64_t seed = 7;
  double noise_sigma = 0.01;
  std::size_t num_ordered_pairs = 4000;  // across all attributes
  std::size_t num_similar_pairs = 500;   // across all attributes
  std::size_t num_labeled_pairs = 4000;
  double ordered_threshold = 0.3;
  double similar_threshold = 0.1;

  static constexpr double default_alpha = 0.8;
  static constexpr double default_beta = 0.8;

  // Fills empty alpha/beta and checks invariants.
  SyntheticSpec normalized() const;
  void validate() const;

  nlohmann::json to_json() const;
  static SyntheticSpec from_json(const nlohmann::json& j);
};

// Latent-space ground truth for a set of images.
struct LatentWorld {
  SyntheticSpec spec;
  std::vector<std::vector<double>> latents;  // per image, length M

  double utility(ImageIndex i, ImageIndex j, AttributeId m) const;
  // argmax_m utility, ties by ascending id.
  AttributeId prominent(ImageIndex i, ImageIndex j) const;
  // argmax_m |du_m|, ties by ascending id.
  AttributeId widest(ImageIndex i, ImageIndex j) const;
};

struct SyntheticData {
  Dataset dataset;
  LatentWorld world;
  // Parallel to dataset.votes.pairs.
  std::vector<AttributeId> oracle_labels;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// A fresh image population that shares the spec's latent-to-descriptor map
// but draws latents and noise from `seed`. Used for unseen search databases.
std::pair<std::vector<ImageRecord>, LatentWorld> generate_population(const SyntheticSpec& spec,
                                                                     std::size_t num_images,
                                                                     std::uint64_t seed,
                                                                     const std::string& id_prefix);

// Default names "attr0".."attrM-1".
AttributeVocabulary synthetic_vocabulary(std::size_t num_attributes);

// Writes dataset files plus spec.json, latents.csv and oracle.jsonl.
void save_synthetic(const SyntheticData& data, const std::string& dir);

// Inverse of save_synthetic for the latent side (spec.json + latents.csv), aligned
// to `dataset` image order.
LatentWorld load_latent_world(const std::string& dir, const Dataset& dataset);
std::vector<AttributeId> load_oracle_labels(const std::string& dir, const Dataset& dataset);

}  // namespace prom
