#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace prom {

using AttributeId = std::size_t;
using ImageIndex = std::size_t;

struct AttributeVocabulary {
  std::vector<std::string> names;
  // Optional per-attribute phrase, e.g. "has {polarity} visible teeth". Empty
  // means the default "{polarity} <name>" phrasing.
  std::vector<std::string> templates;

  std::size_t size() const { return names.size(); }
  const std::string& name(AttributeId m) const { return names.at(m); }

  // Throws on empty or duplicate names. `min_size` is 2 for vocabularies built
  // in code; file loading accepts a single attribute.
  void validate(std::size_t min_size = 2) const;
};

struct ImageRecord {
  std::string id;
  std::vector<double> descriptor;
  std::optional<std::string> category;
  std::optional<std::string> asset_url;
};

struct IndexPair {
  ImageIndex i = 0;
  ImageIndex j = 0;
  bool operator==(const IndexPair&) const = default;
};

// Ordered pairs mean image i shows strictly more of the attribute than j.
struct RelativePairSet {
  AttributeId attribute = 0;
  std::vector<IndexPair> ordered;
  std::vector<IndexPair> similar;
};

struct VoteEntry {
  ImageIndex i = 0;
  ImageIndex j = 0;
  std::map<AttributeId, int> votes;
};

struct VoteTable {
  std::vector<VoteEntry> pairs;
  int annotator_count = 7;
};

struct GroundTruthLabel {
  ImageIndex i = 0;
  ImageIndex j = 0;
  // Attributes with at least one vote, by descending count then ascending id.
  std::vector<AttributeId> ranked;
  AttributeId top() const { return ranked.front(); }
};

struct Dataset {
  AttributeVocabulary vocab;
  std::vector<ImageRecord> images;
  std::vector<RelativePairSet> pair_sets;  // one per attribute
  VoteTable votes;

  std::size_t dim() const { return images.empty() ? 0 : images.front().descriptor.size(); }
  std::size_t num_attributes() const { return vocab.size(); }

  // Rebuilds the id -> index lookup; call after mutating `images`.
  void reindex();
  std::optional<ImageIndex> find(const std::string& id) const;
  ImageIndex index_of(const std::string& id) const;

 private:
  std::unordered_map<std::string, ImageIndex> index_;
};

struct DatasetPaths {
  std::string vocab;
  std::string images;
  std::string pairs;
  std::string votes;

  // Conventional file names inside a dataset directory.
  static DatasetPaths in_directory(const std::string& dir);
};

struct LoadOptions {
  // Expected votes per pair; 0 disables the total-count check.
  int annotator_count = 7;
};

// Array of names or {"name", "template"} objects; `context` prefixes errors.
AttributeVocabulary vocabulary_from_json(const nlohmann::json& doc, const std::string& context);
nlohmann::json vocabulary_to_json(const AttributeVocabulary& vocab);
AttributeVocabulary load_vocabulary(const std::string& path);
// images.jsonl alone; errors carry file:line.
std::vector<ImageRecord> load_images(const std::string& path);
Dataset load_dataset(const DatasetPaths& paths, const LoadOptions& options = {});

void save_vocabulary(const AttributeVocabulary& vocab, const std::string& path);
void save_images(const std::vector<ImageRecord>& images, const std::string& path);
void save_pairs(const Dataset& dataset, const std::string& path);
void save_votes(const Dataset& dataset, const std::string& path);
void save_dataset(const Dataset& dataset, const DatasetPaths& paths);

GroundTruthLabel ground_truth(const VoteEntry& entry);
std::vector<GroundTruthLabel> ground_truth(const VoteTable& votes);

struct AgreementStats {
  double pct_modal_3plus = 0.0;
  double mean_unique_attrs = 0.0;
};

AgreementStats agreement_stats(const VoteTable& votes);

class FoldAssignment {
 public:
  FoldAssignment(std::size_t n_folds, std::vector<std::size_t> fold_of);

  std::size_t n_folds() const { return n_folds_; }
  std::size_t fold_of(ImageIndex i) const { return fold_of_.at(i); }
  std::size_t fold_size(std::size_t fold) const;

  // Train pairs have neither image in the fold; test pairs have both.
  bool is_train(std::size_t fold, ImageIndex i, ImageIndex j) const {
    return fold_of_[i] != fold && fold_of_[j] != fold;
  }
  bool is_test(std::size_t fold, ImageIndex i, ImageIndex j) const {
    return fold_of_[i] == fold && fold_of_[j] == fold;
  }
  bool in_fold(std::size_t fold, ImageIndex i) const { return fold_of_[i] == fold; }

 private:
  std::size_t n_folds_;
  std::vector<std::size_t> fold_of_;
};

FoldAssignment make_folds(std::size_t n_images, std::size_t n_folds, std::uint64_t seed);

// Restriction of a dataset's relative pairs to those whose images both satisfy
// `keep`.
std::vector<RelativePairSet> filter_pairs(const std::vector<RelativePairSet>& sets,
                                          const std::vector<bool>& keep);

}  // namespace prom
