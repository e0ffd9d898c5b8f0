#include "ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "log.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "text_io.hpp"

namespace prom {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

struct RankSample {
  IndexPair pair;
  bool similar;
};

// Pegasos-style projected subgradient descent on
//   lambda/2 |w|^2 + 1/n sum loss_k(w),  lambda = 1 / (C n)
// which has the same minimizer as 1/2 |w|^2 + C sum loss_k(w).
std::vector<double> train_attribute(const Dataset& ds, const RelativePairSet& set, const RankerHyper& hyper,
                                    std::uint64_t seed) {
  const std::size_t D = ds.dim();
  std::vector<RankSample> samples;
  samples.reserve(set.ordered.size() + set.similar.size());
  for (const auto& p : set.ordered) samples.push_back({p, false});
  for (const auto& p : set.similar) samples.push_back({p, true});
  const double n = static_cast<double>(samples.size());
  const double lambda = 1.0 / (hyper.C * n);
  const double radius = 1.0 / std::sqrt(lambda);

  std::vector<double> w(D, 0.0);
  std::vector<double> diff(D);
  Rng rng(seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      ++t;
      const auto& s = samples[idx];
      const auto& xi = ds.images[s.pair.i].descriptor;
      const auto& xj = ds.images[s.pair.j].descriptor;
      for (std::size_t d = 0; d < D; ++d) diff[d] = xi[d] - xj[d];
      const double margin = dot(w, diff);
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double shrink = 1.0 - 1.0 / static_cast<double>(t);
      double step = 0.0;
      if (!s.similar) {
        if (margin < 1.0) step = eta;
      } else if (std::abs(margin) > hyper.similar_margin) {
        step = margin > 0 ? -eta : eta;
      }
      for (std::size_t d = 0; d < D; ++d) w[d] = shrink * w[d] + step * diff[d];
      const double norm = std::sqrt(dot(w, w));
      if (norm > radius) {
        const double f = radius / norm;
        for (auto& v : w) v *= f;
      }
    }
  }
  return w;
}

}  // namespace

Standardization fit_standardization(const std::vector<std::vector<double>>& raw, std::size_t num_attributes,
                                    const AttributeVocabulary* vocab) {
  require(!raw.empty(), "standardization needs at least one image");
  Standardization st;
  st.mean.assign(num_attributes, 0.0);
  st.sigma.assign(num_attributes, 1.0);
  const double n = static_cast<double>(raw.size());
  for (std::size_t m = 0; m < num_attributes; ++m) {
    double sum = 0.0;
    for (const auto& row : raw) sum += row[m];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& row : raw) sq += (row[m] - mean) * (row[m] - mean);
    const double sd = std::sqrt(sq / n);
    if (sd < kSigmaFloor) {
      const std::string name = vocab && m < vocab->size() ? vocab->name(m) : std::to_string(m);
      log::warn("zero variance attribute '" + name + "': standardized scores set to 0");
      st.mean[m] = raw.front()[m];
      st.sigma[m] = kSigmaFloor;
    } else {
      st.mean[m] = mean;
      st.sigma[m] = sd;
    }
  }
  return st;
}

double RankerModel::raw_score(AttributeId m, std::span<const double> x) const { return dot(weights[m], x); }

ScoreMatrix::ScoreMatrix(std::vector<std::string> ids, std::size_t num_attributes, std::vector<double> values)
    : ids_(std::move(ids)), num_attributes_(num_attributes), values_(std::move(values)) {
  require(values_.size() == ids_.size() * num_attributes_, "score matrix shape mismatch");
  for (std::size_t k = 0; k < ids_.size(); ++k) {
    if (!index_.emplace(ids_[k], k).second) fail(ErrorCode::InvalidArgument, "duplicate image id '" + ids_[k] + "'");
  }
  for (double v : values_)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite value in score matrix");
}

std::optional<std::size_t> ScoreMatrix::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ScoreMatrix::index_of(const std::string& id) const {
  auto k = find(id);
  if (!k) fail(ErrorCode::NotFound, "no scores for image '" + id + "'");
  return *k;
}

RankerModel train_ranker(const Dataset& dataset, const RankerHyper& hyper, const std::vector<bool>* train_mask) {
  const std::size_t M = dataset.num_attributes();
  require(hyper.C > 0.0, "ranker C must be positive");
  require(hyper.epochs > 0, "ranker epochs must be positive");
  require(dataset.pair_sets.size() == M, "dataset has no relative pair sets");

  std::vector<RelativePairSet> sets =
      train_mask ? filter_pairs(dataset.pair_sets, *train_mask) : dataset.pair_sets;
  for (AttributeId m = 0; m < M; ++m) {
    if (sets[m].ordered.empty())
      fail(ErrorCode::InvalidArgument, "attribute '" + dataset.vocab.name(m) + "' has no ordered pairs");
  }

  RankerModel model;
  model.hyper = hyper;
  model.weights.resize(M);
  parallel_for(M, [&](std::size_t m) {
    model.weights[m] = train_attribute(dataset, sets[m], hyper, derive_seed(hyper.seed, m));
  });

  std::vector<std::vector<double>> train_raw;
  for (std::size_t k = 0; k < dataset.images.size(); ++k) {
    if (train_mask && !(*train_mask)[k]) continue;
    std::vector<double> row(M);
    for (AttributeId m = 0; m < M; ++m) row[m] = model.raw_score(m, dataset.images[k].descriptor);
    train_raw.push_back(std::move(row));
  }
  model.standardization = fit_standardization(train_raw, M, &dataset.vocab);
  return model;
}

std::vector<std::vector<double>> raw_scores(const RankerModel& model, const std::vector<ImageRecord>& images) {
  const std::size_t M = model.num_attributes();
  std::vector<std::vector<double>> out;
  out.reserve(images.size());
  for (const auto& img : images) {
    if (img.descriptor.size() != model.dim())
      fail(ErrorCode::InvalidArgument, "descriptor dimension mismatch for '" + img.id + "' (" +
                                           std::to_string(img.descriptor.size()) + " vs model " +
                                           std::to_string(model.dim()) + ")");
    std::vector<double> row(M);
    for (AttributeId m = 0; m < M; ++m) row[m] = model.raw_score(m, img.descriptor);
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

ScoreMatrix standardize(std::vector<std::string> ids, const std::vector<std::vector<double>>& raw,
                        const Standardization& st, std::size_t M) {
  std::vector<double> values;
  values.reserve(raw.size() * M);
  for (const auto& row : raw)
    for (AttributeId m = 0; m < M; ++m) values.push_back(st.apply(m, row[m]));
  return ScoreMatrix(std::move(ids), M, std::move(values));
}

}  // namespace

ScoreMatrix score_all(const RankerModel& model, const std::vector<ImageRecord>& images) {
  std::vector<std::string> ids;
  ids.reserve(images.size());
  for (const auto& img : images) ids.push_back(img.id);
  return standardize(std::move(ids), raw_scores(model, images), model.standardization, model.num_attributes());
}

double ordered_satisfaction(const ScoreMatrix& scores, AttributeId m, const std::vector<IndexPair>& pairs) {
  if (pairs.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& p : pairs)
    if (scores.at(p.i, m) > scores.at(p.j, m)) ++ok;
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

ScoreMatrix ingest_scores(const std::string& path, std::size_t num_attributes,
                          const std::vector<std::string>& required_ids) {
  const auto lines = split_lines(read_file(path));
  if (lines.empty()) fail(ErrorCode::Parse, path + ": empty score file");
  const auto header = split_csv(lines[0]);
  if (header.empty() || header[0] != "image_id") fail(ErrorCode::Parse, path + ": header must start with image_id");
  if (header.size() != num_attributes + 1)
    fail(ErrorCode::Parse, path + ": column count mismatch (" + std::to_string(header.size() - 1) +
                               " score columns, expected " + std::to_string(num_attributes) + ")");
  std::vector<std::string> ids;
  std::vector<std::vector<double>> raw;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto f = split_csv(lines[ln]);
    const std::string at = path + ":" + std::to_string(ln + 1);
    if (f.size() != num_attributes + 1) fail(ErrorCode::Parse, at + ": column count mismatch");
    std::vector<double> row(num_attributes);
    for (std::size_t m = 0; m < num_attributes; ++m) {
      if (!parse_double(f[m + 1], row[m]) || !std::isfinite(row[m]))
        fail(ErrorCode::Parse, at + ": non-finite value for image '" + f[0] + "'");
    }
    ids.push_back(f[0]);
    raw.push_back(std::move(row));
  }
  if (raw.empty()) fail(ErrorCode::Parse, path + ": no score rows");
  const Standardization st = fit_standardization(raw, num_attributes);
  ScoreMatrix scores = standardize(std::move(ids), raw, st, num_attributes);
  for (const auto& id : required_ids)
    if (!scores.find(id)) fail(ErrorCode::Parse, path + ": missing image id '" + id + "'");
  return scores;
}

void write_score_csv(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<std::vector<double>>& raw) {
  require(ids.size() == raw.size(), "score rows and ids differ in length");
  std::string out = "image_id";
  const std::size_t M = raw.empty() ? 0 : raw.front().size();
  for (std::size_t m = 0; m < M; ++m) out += ",score_" + std::to_string(m);
  out += '\n';
  for (std::size_t k = 0; k < ids.size(); ++k) {
    out += ids[k];
    for (double v : raw[k]) out += "," + format_double(v);
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace prom
