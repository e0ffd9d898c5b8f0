#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "prominence.hpp"
#include "rng.hpp"

namespace prom {

struct Statement {
  AttributeId attribute = 0;
  Polarity polarity = Polarity::Equal;
  double confidence = 0.0;
};

struct Description {
  std::vector<Statement> statements;
  std::string text;
};

// One clause per statement: "more sporty", "similarly shiny", or the
// attribute's template with {polarity} substituted.
std::string render_clause(const Statement& s, const AttributeVocabulary& vocab);

// "The left image is more sporty, less stylish, and less shiny than the right
// image." Templated clauses carry their own verb, so when any is present the
// plain clauses are prefixed with "is" instead of the sentence.
std::string render_sentence(const std::vector<Statement>& statements, const AttributeVocabulary& vocab);

// First min(k, M) entries of a ranked prediction, rendered.
Description describe_prediction(const Prediction& prediction, std::size_t k, const AttributeVocabulary& vocab);

Description generate_description(const ProminenceModel& model, std::span<const double> r_i,
                                 std::span<const double> r_j, std::size_t k, const AttributeVocabulary& vocab);

// k attributes drawn without replacement from those with |dr| > threshold,
// padded with the widest remaining differences. Statements carry |dr| as
// confidence and keep draw order.
Description random_true_difference_description(std::span<const double> r_i, std::span<const double> r_j,
                                               std::size_t k, const AttributeVocabulary& vocab, Rng& rng,
                                               double threshold = 0.1);

nlohmann::json to_json(const Description& d, const AttributeVocabulary& vocab);

// Top-k description plus the model's full ranked confidence list. The CLI and
// the service both render explanations through this function.
nlohmann::json explanation_json(const ProminenceModel& model, const AttributeVocabulary& vocab,
                                std::span<const double> r_i, std::span<const double> r_j, std::size_t k,
                                const std::string& id_i, const std::string& id_j);

}  // namespace prom
