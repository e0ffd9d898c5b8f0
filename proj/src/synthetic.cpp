#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "error.hpp"
#include "rng.hpp"
#include "text_io.hpp"

namespace prom {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t { kLatents = 1, kNoise = 2, kRelativePairs = 3, kLabeledPairs = 4, kVotes = 5 };

std::vector<std::vector<double>> descriptor_map(const SyntheticSpec& spec) {
  // Gaussian D x M map; full column rank with probability one since D >= M.
  Rng rng(spec.map_seed);
  std::vector<std::vector<double>> g(spec.dim, std::vector<double>(spec.num_attributes));
  for (auto& row : g)
    for (auto& v : row) v = rng.normal();
  return g;
}

std::string image_id(const std::string& prefix, std::size_t k, std::size_t n) {
  const int width = std::max(5, static_cast<int>(std::to_string(n).size()));
  std::string digits = std::to_string(k);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

SyntheticSpec SyntheticSpec::normalized() const {
  SyntheticSpec s = *this;
  if (s.alpha.empty()) s.alpha.assign(s.num_attributes, default_alpha);
  if (s.beta.empty()) s.beta.assign(s.num_attributes, default_beta);
  s.validate();
  return s;
}

void SyntheticSpec::validate() const {
  require(num_attributes >= 2, "synthetic spec: M must be >= 2");
  require(dim >= num_attributes, "synthetic spec: D must be >= M");
  require(num_images >= 2, "synthetic spec: need at least 2 images");
  require(annotator_count >= 1, "synthetic spec: annotator count must be >= 1");
  require(temperature > 0.0 && std::isfinite(temperature), "synthetic spec: temperature must be > 0");
  require(noise_sigma >= 0.0, "synthetic spec: noise sigma must be >= 0");
  require(alpha.size() == num_attributes, "synthetic spec: alpha must have M entries");
  require(beta.size() == num_attributes, "synthetic spec: beta must have M entries");
  require(similar_threshold <= ordered_threshold, "synthetic spec: similar threshold above ordered threshold");
  const std::size_t max_pairs = num_images * (num_images - 1) / 2;
  require(num_labeled_pairs <= max_pairs, "synthetic spec: more labeled pairs than distinct image pairs");
}

json SyntheticSpec::to_json() const {
  return json{{"M", num_attributes},
              {"D", dim},
              {"n_images", num_images},
              {"map_seed", map_seed},
              {"annotator_count", annotator_count},
              {"alpha", alpha},
              {"beta", beta},
              {"temperature", temperature},
              {"seed", seed},
              {"noise_sigma", noise_sigma},
              {"n_ordered_pairs", num_ordered_pairs},
              {"n_similar_pairs", num_similar_pairs},
              {"n_labeled_pairs", num_labeled_pairs},
              {"ordered_threshold", ordered_threshold},
              {"similar_threshold", similar_threshold}};
}

SyntheticSpec SyntheticSpec::from_json(const json& j) {
  SyntheticSpec s;
  try {
    s.num_attributes = j.value("M", s.num_attributes);
    s.dim = j.value("D", s.dim);
    s.num_images = j.value("n_images", s.num_images);
    s.map_seed = j.value("map_seed", s.map_seed);
    s.annotator_count = j.value("annotator_count", s.annotator_count);
    s.alpha = j.value("alpha", s.alpha);
    s.beta = j.value("beta", s.beta);
    s.temperature = j.value("temperature", s.temperature);
    s.seed = j.value("seed", s.seed);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.num_ordered_pairs = j.value("n_ordered_pairs", s.num_ordered_pairs);
    s.num_similar_pairs = j.value("n_similar_pairs", s.num_similar_pairs);
    s.num_labeled_pairs = j.value("n_labeled_pairs", s.num_labeled_pairs);
    s.ordered_threshold = j.value("ordered_threshold", s.ordered_threshold);
    s.similar_threshold = j.value("similar_threshold", s.similar_threshold);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("synthetic spec: ") + e.what());
  }
  return s;
}

double LatentWorld::utility(ImageIndex i, ImageIndex j, AttributeId m) const {
  const double ui = latents[i][m];
  const double uj = latents[j][m];
  return spec.alpha[m] * std::abs(ui - uj) + spec.beta[m] * 0.5 * (ui + uj);
}

AttributeId LatentWorld::prominent(ImageIndex i, ImageIndex j) const {
  AttributeId best = 0;
  double best_s = utility(i, j, 0);
  for (AttributeId m = 1; m < spec.num_attributes; ++m) {
    const double s = utility(i, j, m);
    if (s > best_s) {
      best_s = s;
      best = m;
    }
  }
  return best;
}

AttributeId LatentWorld::widest(ImageIndex i, ImageIndex j) const {
  AttributeId best = 0;
  double best_d = -1.0;
  for (AttributeId m = 0; m < spec.num_attributes; ++m) {
    const double d = std::abs(latents[i][m] - latents[j][m]);
    if (d > best_d) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

AttributeVocabulary synthetic_vocabulary(std::size_t num_attributes) {
  AttributeVocabulary v;
  for (std::size_t m = 0; m < num_attributes; ++m) v.names.push_back("attr" + std::to_string(m));
  return v;
}

std::pair<std::vector<ImageRecord>, LatentWorld> generate_population(const SyntheticSpec& raw_spec,
                                                                     std::size_t num_images,
                                                                     std::uint64_t seed,
                                                                     const std::string& id_prefix) {
  const SyntheticSpec spec = raw_spec.normalized();
  const auto g = descriptor_map(spec);
  Rng latent_rng(derive_seed(seed, kLatents));
  Rng noise_rng(derive_seed(seed, kNoise));

  LatentWorld world{spec, {}};
  std::vector<ImageRecord> images;
  images.reserve(num_images);
  world.latents.reserve(num_images);
  for (std::size_t k = 0; k < num_images; ++k) {
    std::vector<double> u(spec.num_attributes);
    for (auto& v : u) v = latent_rng.normal();
    ImageRecord rec;
    rec.id = image_id(id_prefix, k, num_images);
    rec.descriptor.assign(spec.dim, 0.0);
    for (std::size_t d = 0; d < spec.dim; ++d) {
      double x = 0.0;
      for (std::size_t m = 0; m < spec.num_attributes; ++m) x += g[d][m] * u[m];
      rec.descriptor[d] = x + spec.noise_sigma * noise_rng.normal();
    }
    images.push_back(std::move(rec));
    world.latents.push_back(std::move(u));
  }
  return {std::move(images), std::move(world)};
}

SyntheticData generate_synthetic(const SyntheticSpec& raw_spec) {
  const SyntheticSpec spec = raw_spec.normalized();
  const std::size_t M = spec.num_attributes;
  const std::size_t n = spec.num_images;

  SyntheticData out;
  auto [images, world] = generate_population(spec, n, spec.seed, "img");
  out.world = std::move(world);
  out.dataset.vocab = synthetic_vocabulary(M);
  out.dataset.images = std::move(images);
  out.dataset.reindex();
  out.dataset.votes.annotator_count = spec.annotator_count;
  const auto& u = out.world.latents;

  // Relative pairs: rejection-sample image pairs per attribute until quotas fill.
  Rng pair_rng(derive_seed(spec.seed, kRelativePairs));
  out.dataset.pair_sets.resize(M);
  for (AttributeId m = 0; m < M; ++m) {
    auto& set = out.dataset.pair_sets[m];
    set.attribute = m;
    const std::size_t want_ordered = spec.num_ordered_pairs / M + (m < spec.num_ordered_pairs % M ? 1 : 0);
    const std::size_t want_similar = spec.num_similar_pairs / M + (m < spec.num_similar_pairs % M ? 1 : 0);
    std::set<std::pair<ImageIndex, ImageIndex>> used;
    const std::size_t max_attempts = 1000 * (want_ordered + want_similar) + 10000;
    std::size_t attempts = 0;
    while (set.ordered.size() < want_ordered || set.similar.size() < want_similar) {
      if (++attempts > max_attempts)
        fail(ErrorCode::InvalidArgument,
             "synthetic spec: cannot sample enough relative pairs for attribute " + std::to_string(m));
      ImageIndex a = pair_rng.below(n);
      ImageIndex b = pair_rng.below(n);
      if (a == b) continue;
      const double diff = u[a][m] - u[b][m];
      if (std::abs(diff) > spec.ordered_threshold && set.ordered.size() < want_ordered) {
        if (!used.insert(std::minmax(a, b)).second) continue;
        if (diff > 0)
          set.ordered.push_back({a, b});
        else
          set.ordered.push_back({b, a});
      } else if (std::abs(diff) < spec.similar_threshold && set.similar.size() < want_similar) {
        if (!used.insert(std::minmax(a, b)).second) continue;
        set.similar.push_back({a, b});
      }
    }
  }

  // Labeled pairs and annotator votes.
  Rng label_rng(derive_seed(spec.seed, kLabeledPairs));
  Rng vote_rng(derive_seed(spec.seed, kVotes));
  std::set<std::pair<ImageIndex, ImageIndex>> used;
  std::vector<double> probs(M);
  while (out.dataset.votes.pairs.size() < spec.num_labeled_pairs) {
    ImageIndex a = label_rng.below(n);
    ImageIndex b = label_rng.below(n);
    if (a == b || !used.insert(std::minmax(a, b)).second) continue;
    double smax = -INFINITY;
    for (AttributeId m = 0; m < M; ++m) {
      probs[m] = out.world.utility(a, b, m) / spec.temperature;
      smax = std::max(smax, probs[m]);
    }
    for (auto& p : probs) p = std::exp(p - smax);
    VoteEntry e{a, b, {}};
    for (int k = 0; k < spec.annotator_count; ++k) e.votes[vote_rng.categorical(probs)] += 1;
    out.dataset.votes.pairs.push_back(std::move(e));
    out.oracle_labels.push_back(out.world.prominent(a, b));
  }
  return out;
}

void save_synthetic(const SyntheticData& data, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_dataset(data.dataset, DatasetPaths::in_directory(dir));
  write_file((fs::path(dir) / "spec.json").string(), data.world.spec.to_json().dump(2) + "\n");

  std::string latents = "image_id";
  for (std::size_t m = 0; m < data.world.spec.num_attributes; ++m) latents += ",u_" + std::to_string(m);
  latents += '\n';
  for (std::size_t k = 0; k < data.dataset.images.size(); ++k) {
    latents += data.dataset.images[k].id;
    for (double v : data.world.latents[k]) latents += "," + format_double(v);
    latents += '\n';
  }
  write_file((fs::path(dir) / "latents.csv").string(), latents);

  std::string oracle;
  const auto& pairs = data.dataset.votes.pairs;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    oracle += json{{"i", data.dataset.images[pairs[k].i].id},
                   {"j", data.dataset.images[pairs[k].j].id},
                   {"label", data.oracle_labels[k]}}
                  .dump();
    oracle += '\n';
  }
  write_file((fs::path(dir) / "oracle.jsonl").string(), oracle);
}

LatentWorld load_latent_world(const std::string& dir, const Dataset& dataset) {
  namespace fs = std::filesystem;
  const std::string spec_path = (fs::path(dir) / "spec.json").string();
  json spec_json;
  try {
    spec_json = json::parse(read_file(spec_path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, spec_path + ": " + e.what());
  }
  LatentWorld world{SyntheticSpec::from_json(spec_json).normalized(), {}};
  const std::size_t M = world.spec.num_attributes;
  world.latents.assign(dataset.images.size(), {});

  const std::string path = (fs::path(dir) / "latents.csv").string();
  const auto lines = split_lines(read_file(path));
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto f = split_csv(lines[ln]);
    if (f.size() != M + 1)
      fail(ErrorCode::Parse, path + ":" + std::to_string(ln + 1) + ": column count mismatch");
    auto k = dataset.find(f[0]);
    if (!k) fail(ErrorCode::Parse, path + ":" + std::to_string(ln + 1) + ": unknown image id '" + f[0] + "'");
    std::vector<double> row(M);
    for (std::size_t m = 0; m < M; ++m)
      if (!parse_double(f[m + 1], row[m]))
        fail(ErrorCode::Parse, path + ":" + std::to_string(ln + 1) + ": bad latent value");
    world.latents[*k] = std::move(row);
  }
  for (std::size_t k = 0; k < world.latents.size(); ++k)
    if (world.latents[k].size() != M)
      fail(ErrorCode::Parse, path + ": missing latents for image '" + dataset.images[k].id + "'");
  return world;
}

std::vector<AttributeId> load_oracle_labels(const std::string& dir, const Dataset& dataset) {
  const std::string path = (std::filesystem::path(dir) / "oracle.jsonl").string();
  const auto lines = split_lines(read_file(path));
  std::map<std::pair<ImageIndex, ImageIndex>, AttributeId> by_pair;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    try {
      const json obj = json::parse(lines[ln]);
      const ImageIndex i = dataset.index_of(obj.at("i").get<std::string>());
      const ImageIndex j = dataset.index_of(obj.at("j").get<std::string>());
      by_pair[std::minmax(i, j)] = obj.at("label").get<AttributeId>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, path + ":" + std::to_string(ln + 1) + ": " + e.what());
    }
  }
  std::vector<AttributeId> labels;
  labels.reserve(dataset.votes.pairs.size());
  for (const auto& e : dataset.votes.pairs) {
    auto it = by_pair.find(std::minmax(e.i, e.j));
    if (it == by_pair.end())
      fail(ErrorCode::Parse, path + ": no oracle label for pair (" + dataset.images[e.i].id + ", " +
                                 dataset.images[e.j].id + ")");
    labels.push_back(it->second);
  }
  return labels;
}

}  // namespace prom
