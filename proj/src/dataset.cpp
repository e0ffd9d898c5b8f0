#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"
#include "text_io.hpp"

namespace prom {

using nlohmann::json;

void AttributeVocabulary::validate(std::size_t min_size) const {
  if (names.size() < min_size)
    fail(ErrorCode::InvalidArgument,
         "vocabulary needs at least " + std::to_string(min_size) + " attributes");
  if (!templates.empty() && templates.size() != names.size())
    fail(ErrorCode::InvalidArgument, "vocabulary template count does not match names");
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) fail(ErrorCode::InvalidArgument, "empty attribute name in vocabulary");
    if (!seen.insert(n).second)
      fail(ErrorCode::InvalidArgument, "duplicate attribute name '" + n + "'");
  }
}

void Dataset::reindex() {
  index_.clear();
  for (ImageIndex k = 0; k < images.size(); ++k) {
    if (!index_.emplace(images[k].id, k).second)
      fail(ErrorCode::InvalidArgument, "duplicate image id '" + images[k].id + "'");
  }
}

std::optional<ImageIndex> Dataset::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ImageIndex Dataset::index_of(const std::string& id) const {
  auto k = find(id);
  if (!k) fail(ErrorCode::NotFound, "unknown image id '" + id + "'");
  return *k;
}

DatasetPaths DatasetPaths::in_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  return {(base / "vocab.json").string(), (base / "images.jsonl").string(),
          (base / "pairs.csv").string(), (base / "votes.jsonl").string()};
}

namespace {

std::string where(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

}  // namespace

AttributeVocabulary vocabulary_from_json(const json& doc, const std::string& context) {
  if (!doc.is_array()) fail(ErrorCode::Parse, context + ": vocabulary must be a JSON array");
  AttributeVocabulary vocab;
  bool any_template = false;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const auto& entry = doc[k];
    if (entry.is_string()) {
      vocab.names.push_back(entry.get<std::string>());
      vocab.templates.emplace_back();
    } else if (entry.is_object() && entry.contains("name") && entry["name"].is_string()) {
      vocab.names.push_back(entry["name"].get<std::string>());
      vocab.templates.push_back(entry.value("template", std::string{}));
      any_template = any_template || !vocab.templates.back().empty();
    } else {
      fail(ErrorCode::Parse, context + ": entry " + std::to_string(k) + " is not an attribute name");
    }
  }
  if (!any_template) vocab.templates.clear();
  try {
    vocab.validate(1);
  } catch (const Error& e) {
    fail(ErrorCode::Parse, context + ": " + e.what());
  }
  return vocab;
}

json vocabulary_to_json(const AttributeVocabulary& vocab) {
  json doc = json::array();
  for (std::size_t m = 0; m < vocab.size(); ++m) {
    if (!vocab.templates.empty() && !vocab.templates[m].empty())
      doc.push_back({{"name", vocab.names[m]}, {"template", vocab.templates[m]}});
    else
      doc.push_back(vocab.names[m]);
  }
  return doc;
}

AttributeVocabulary load_vocabulary(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
  return vocabulary_from_json(doc, path);
}


std::vector<ImageRecord> load_images(const std::string& path) {
  std::vector<ImageRecord> images;
  const auto lines = split_lines(read_file(path));
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    json obj;
    try {
      obj = json::parse(lines[ln]);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::Parse, where(path, ln + 1) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() || !obj.contains("descriptor") ||
        !obj["descriptor"].is_array())
      fail(ErrorCode::Parse, where(path, ln + 1) + ": expected {\"id\", \"descriptor\"}");
    ImageRecord rec;
    rec.id = obj["id"].get<std::string>();
    for (const auto& v : obj["descriptor"]) {
      if (!v.is_number())
        fail(ErrorCode::Parse, where(path, ln + 1) + ": non-numeric descriptor entry for '" + rec.id + "'");
      const double x = v.get<double>();
      if (!std::isfinite(x))
        fail(ErrorCode::Parse, where(path, ln + 1) + ": non-finite descriptor entry for '" + rec.id + "'");
      rec.descriptor.push_back(x);
    }
    if (obj.contains("category") && obj["category"].is_string()) rec.category = obj["category"].get<std::string>();
    if (obj.contains("asset_url") && obj["asset_url"].is_string())
      rec.asset_url = obj["asset_url"].get<std::string>();
    if (!images.empty() && rec.descriptor.size() != images.front().descriptor.size())
      fail(ErrorCode::Parse, where(path, ln + 1) + ": descriptor dimension mismatch for '" + rec.id + "' (" +
                                 std::to_string(rec.descriptor.size()) + " vs " +
                                 std::to_string(images.front().descriptor.size()) + ")");
    images.push_back(std::move(rec));
  }
  return images;
}

Dataset load_dataset(const DatasetPaths& paths, const LoadOptions& options) {
  Dataset ds;
  ds.vocab = load_vocabulary(paths.vocab);
  const std::size_t M = ds.vocab.size();

  ds.images = load_images(paths.images);
  try {
    ds.reindex();
  } catch (const Error& e) {
    fail(ErrorCode::Parse, paths.images + ": " + e.what());
  }

  auto resolve = [&](const std::string& file, std::size_t ln, const std::string& id) {
    auto k = ds.find(id);
    if (!k) fail(ErrorCode::Parse, where(file, ln) + ": unknown image id '" + id + "'");
    return *k;
  };

  // pairs.csv
  ds.pair_sets.resize(M);
  for (AttributeId m = 0; m < M; ++m) ds.pair_sets[m].attribute = m;
  {
    const auto lines = split_lines(read_file(paths.pairs));
    if (lines.empty() || split_csv(lines[0]) != std::vector<std::string>{"attribute_id", "i", "j", "relation"})
      fail(ErrorCode::Parse, paths.pairs + ": expected header attribute_id,i,j,relation");
    std::vector<std::set<std::pair<ImageIndex, ImageIndex>>> ordered_seen(M), similar_seen(M);
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
      if (trim(lines[ln]).empty()) continue;
      const auto f = split_csv(lines[ln]);
      if (f.size() != 4) fail(ErrorCode::Parse, where(paths.pairs, ln + 1) + ": expected 4 fields");
      std::size_t m;
      if (!parse_size(f[0], m))
        fail(ErrorCode::Parse, where(paths.pairs, ln + 1) + ": bad attribute id '" + f[0] + "'");
      if (m >= M)
        fail(ErrorCode::Parse, where(paths.pairs, ln + 1) + ": attribute id out of range (" + f[0] + ")");
      const ImageIndex i = resolve(paths.pairs, ln + 1, f[1]);
      const ImageIndex j = resolve(paths.pairs, ln + 1, f[2]);
      if (i == j) fail(ErrorCode::Parse, where(paths.pairs, ln + 1) + ": pair of identical image '" + f[1] + "'");
      const auto key = std::minmax(i, j);
      if (f[3] == "gt") {
        if (similar_seen[m].count(key))
          fail(ErrorCode::Parse, where(paths.pairs, ln + 1) + ": pair is both ordered and similar");
        ordered_seen[m].insert(key);
        ds.pair_sets[m].ordered.push_back({i, j});
      } else if (f[3] == "sim") {
        if (ordered_seen[m].count(key))
          fail(ErrorCode::Parse, where(paths.pairs, ln + 1) + ": pair is both ordered and similar");
        similar_seen[m].insert(key);
        ds.pair_sets[m].similar.push_back({i, j});
      } else {
        fail(ErrorCode::Parse, where(paths.pairs, ln + 1) + ": relation must be gt or sim, got '" + f[3] + "'");
      }
    }
  }

  // votes.jsonl
  ds.votes.annotator_count = options.annotator_count > 0 ? options.annotator_count : 7;
  {
    const auto lines = split_lines(read_file(paths.votes));
    std::set<std::pair<ImageIndex, ImageIndex>> seen;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
      if (trim(lines[ln]).empty()) continue;
      json obj;
      try {
        obj = json::parse(lines[ln]);
      } catch (const json::parse_error& e) {
        fail(ErrorCode::Parse, where(paths.votes, ln + 1) + ": " + e.what());
      }
      if (!obj.is_object() || !obj.contains("i") || !obj["i"].is_string() || !obj.contains("j") ||
          !obj["j"].is_string() || !obj.contains("votes") || !obj["votes"].is_object())
        fail(ErrorCode::Parse, where(paths.votes, ln + 1) + ": expected {\"i\", \"j\", \"votes\"}");
      VoteEntry e;
      e.i = resolve(paths.votes, ln + 1, obj["i"].get<std::string>());
      e.j = resolve(paths.votes, ln + 1, obj["j"].get<std::string>());
      if (e.i == e.j) fail(ErrorCode::Parse, where(paths.votes, ln + 1) + ": pair of identical images");
      if (!seen.insert(std::minmax(e.i, e.j)).second)
        fail(ErrorCode::Parse, where(paths.votes, ln + 1) + ": duplicate vote entry for pair");
      int total = 0;
      for (const auto& [key, val] : obj["votes"].items()) {
        std::size_t m;
        if (!parse_size(key, m))
          fail(ErrorCode::Parse, where(paths.votes, ln + 1) + ": bad attribute id '" + key + "'");
        if (m >= M)
          fail(ErrorCode::Parse, where(paths.votes, ln + 1) + ": attribute id out of range (" + key + ")");
        if (!val.is_number_integer() || val.get<long long>() <= 0)
          fail(ErrorCode::Parse, where(paths.votes, ln + 1) + ": vote count for attribute " + key +
                                     " must be a positive integer");
        const int count = val.get<int>();
        e.votes[m] += count;
        total += count;
      }
      if (options.annotator_count > 0 && total != options.annotator_count)
        fail(ErrorCode::Parse, where(paths.votes, ln + 1) + ": vote total " + std::to_string(total) +
                                   " != annotator count " + std::to_string(options.annotator_count));
      ds.votes.pairs.push_back(std::move(e));
    }
  }
  return ds;
}

void save_vocabulary(const AttributeVocabulary& vocab, const std::string& path) {
  write_file(path, vocabulary_to_json(vocab).dump() + "\n");
}

void save_images(const std::vector<ImageRecord>& images, const std::string& path) {
  std::string out;
  for (const auto& rec : images) {
    json obj = {{"id", rec.id}, {"descriptor", rec.descriptor}};
    if (rec.category) obj["category"] = *rec.category;
    if (rec.asset_url) obj["asset_url"] = *rec.asset_url;
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

void save_pairs(const Dataset& dataset, const std::string& path) {
  std::string out = "attribute_id,i,j,relation\n";
  for (const auto& set : dataset.pair_sets) {
    const std::string m = std::to_string(set.attribute);
    for (const auto& p : set.ordered)
      out += m + "," + dataset.images[p.i].id + "," + dataset.images[p.j].id + ",gt\n";
    for (const auto& p : set.similar)
      out += m + "," + dataset.images[p.i].id + "," + dataset.images[p.j].id + ",sim\n";
  }
  write_file(path, out);
}

void save_votes(const Dataset& dataset, const std::string& path) {
  std::string out;
  for (const auto& e : dataset.votes.pairs) {
    json votes = json::object();
    for (const auto& [m, c] : e.votes) votes[std::to_string(m)] = c;
    out += json{{"i", dataset.images[e.i].id}, {"j", dataset.images[e.j].id}, {"votes", votes}}.dump();
    out += '\n';
  }
  write_file(path, out);
}

void save_dataset(const Dataset& dataset, const DatasetPaths& paths) {
  save_vocabulary(dataset.vocab, paths.vocab);
  save_images(dataset.images, paths.images);
  save_pairs(dataset, paths.pairs);
  save_votes(dataset, paths.votes);
}

GroundTruthLabel ground_truth(const VoteEntry& entry) {
  std::vector<std::pair<AttributeId, int>> counts;
  for (const auto& [m, c] : entry.votes)
    if (c > 0) counts.emplace_back(m, c);
  if (counts.empty()) fail(ErrorCode::InvalidArgument, "vote entry has no votes");
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  GroundTruthLabel label{entry.i, entry.j, {}};
  for (const auto& [m, c] : counts) label.ranked.push_back(m);
  return label;
}

std::vector<GroundTruthLabel> ground_truth(const VoteTable& votes) {
  std::vector<GroundTruthLabel> out;
  out.reserve(votes.pairs.size());
  for (const auto& e : votes.pairs) out.push_back(ground_truth(e));
  return out;
}

AgreementStats agreement_stats(const VoteTable& votes) {
  if (votes.pairs.empty()) fail(ErrorCode::InvalidArgument, "agreement statistics need a non-empty vote table");
  std::size_t modal_3plus = 0;
  std::size_t unique_total = 0;
  for (const auto& e : votes.pairs) {
    int modal = 0;
    for (const auto& [m, c] : e.votes) {
      modal = std::max(modal, c);
      if (c > 0) ++unique_total;
    }
    if (modal >= 3) ++modal_3plus;
  }
  const double n = static_cast<double>(votes.pairs.size());
  return {static_cast<double>(modal_3plus) / n, static_cast<double>(unique_total) / n};
}

FoldAssignment::FoldAssignment(std::size_t n_folds, std::vector<std::size_t> fold_of)
    : n_folds_(n_folds), fold_of_(std::move(fold_of)) {}

std::size_t FoldAssignment::fold_size(std::size_t fold) const {
  return static_cast<std::size_t>(std::count(fold_of_.begin(), fold_of_.end(), fold));
}

FoldAssignment make_folds(std::size_t n_images, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2 || n_folds > n_images)
    fail(ErrorCode::InvalidArgument, "fold count " + std::to_string(n_folds) + " out of range [2, " +
                                         std::to_string(n_images) + "]");
  std::vector<std::size_t> order(n_images);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold_of(n_images);
  for (std::size_t k = 0; k < n_images; ++k) fold_of[order[k]] = k % n_folds;
  return FoldAssignment(n_folds, std::move(fold_of));
}

std::vector<RelativePairSet> filter_pairs(const std::vector<RelativePairSet>& sets,
                                          const std::vector<bool>& keep) {
  std::vector<RelativePairSet> out;
  out.reserve(sets.size());
  for (const auto& s : sets) {
    RelativePairSet f{s.attribute, {}, {}};
    for (const auto& p : s.ordered)
      if (keep[p.i] && keep[p.j]) f.ordered.push_back(p);
    for (const auto& p : s.similar)
      if (keep[p.i] && keep[p.j]) f.similar.push_back(p);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace prom
