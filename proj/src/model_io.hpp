#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "baselines.hpp"
#include "dataset.hpp"
#include "prominence.hpp"
#include "ranker.hpp"

namespace prom {

inline constexpr int kModelFileVersion = 1;

// Everything one model file carries. The ranker is absent when the
// prominence model was trained on external scores.
struct ModelBundle {
  AttributeVocabulary vocab;
  std::optional<RankerModel> ranker;
  std::optional<ProminenceModel> prominence;
  BaselineSet baselines;
  // Seed and config hash of the run that wrote the file.
  nlohmann::json run = nlohmann::json::object();
};

nlohmann::json model_to_json(const ModelBundle& bundle);
// Rejects any version other than kModelFileVersion and shape errors.
ModelBundle model_from_json(const nlohmann::json& doc, const std::string& context = "model");

void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

}  // namespace prom
