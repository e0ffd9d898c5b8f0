#include "describe.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace prom {

namespace {

std::string polarity_word(Polarity p) {
  switch (p) {
    case Polarity::More: return "more";
    case Polarity::Less: return "less";
    case Polarity::Equal: return "similarly";
  }
  return "similarly";
}

bool has_template(const AttributeVocabulary& vocab, AttributeId m) {
  return m < vocab.templates.size() && !vocab.templates[m].empty();
}

std::string join_clauses(const std::vector<std::string>& clauses) {
  std::string out;
  for (std::size_t k = 0; k < clauses.size(); ++k) {
    if (k > 0) {
      if (clauses.size() == 2)
        out += " and ";
      else
        out += k + 1 == clauses.size() ? ", and " : ", ";
    }
    out += clauses[k];
  }
  return out;
}

}  // namespace

std::string render_clause(const Statement& s, const AttributeVocabulary& vocab) {
  const std::string word = polarity_word(s.polarity);
  if (!has_template(vocab, s.attribute)) return word + " " + vocab.name(s.attribute);
  std::string t = vocab.templates[s.attribute];
  const std::string key = "{polarity}";
  if (const auto pos = t.find(key); pos != std::string::npos) t.replace(pos, key.size(), word);
  return t;
}

std::string render_sentence(const std::vector<Statement>& statements, const AttributeVocabulary& vocab) {
  require(!statements.empty(), "description needs at least one statement");
  bool any_template = false;
  for (const auto& s : statements) any_template = any_template || has_template(vocab, s.attribute);
  std::vector<std::string> clauses;
  for (const auto& s : statements) {
    std::string c = render_clause(s, vocab);
    if (any_template && !has_template(vocab, s.attribute)) c = "is " + c;
    clauses.push_back(std::move(c));
  }
  return std::string(any_template ? "The left image " : "The left image is ") + join_clauses(clauses) +
         " than the right image.";
}

Description describe_prediction(const Prediction& prediction, std::size_t k, const AttributeVocabulary& vocab) {
  require(k >= 1, "k must be >= 1");
  Description d;
  const std::size_t n = std::min(k, prediction.ranked.size());
  for (std::size_t p = 0; p < n; ++p) {
    const AttributeId m = prediction.ranked[p];
    d.statements.push_back({m, prediction.polarity[m], prediction.scores[p]});
  }
  d.text = render_sentence(d.statements, vocab);
  return d;
}

Description generate_description(const ProminenceModel& model, std::span<const double> r_i,
                                 std::span<const double> r_j, std::size_t k, const AttributeVocabulary& vocab) {
  return describe_prediction(predict(model, r_i, r_j), k, vocab);
}

Description random_true_difference_description(std::span<const double> r_i, std::span<const double> r_j,
                                               std::size_t k, const AttributeVocabulary& vocab, Rng& rng,
                                               double threshold) {
  require(k >= 1, "k must be >= 1");
  require(r_i.size() == r_j.size(), "score vectors differ in length");
  const std::size_t M = r_i.size();
  std::vector<double> gap(M);
  std::vector<AttributeId> true_diffs;
  for (AttributeId m = 0; m < M; ++m) {
    gap[m] = std::abs(r_i[m] - r_j[m]);
    if (gap[m] > threshold) true_diffs.push_back(m);
  }
  std::vector<AttributeId> chosen;
  for (std::size_t idx : rng.sample_without_replacement(true_diffs.size(), std::min(k, true_diffs.size())))
    chosen.push_back(true_diffs[idx]);
  for (AttributeId m : rank_by_score(gap)) {
    if (chosen.size() >= std::min(k, M)) break;
    if (std::find(chosen.begin(), chosen.end(), m) == chosen.end()) chosen.push_back(m);
  }
  Description d;
  for (AttributeId m : chosen) d.statements.push_back({m, polarity_of(r_i[m], r_j[m]), gap[m]});
  d.text = render_sentence(d.statements, vocab);
  return d;
}

nlohmann::json to_json(const Description& d, const AttributeVocabulary& vocab) {
  nlohmann::json statements = nlohmann::json::array();
  for (const auto& s : d.statements)
    statements.push_back({{"attribute_id", s.attribute},
                          {"attribute", vocab.name(s.attribute)},
                          {"polarity", std::string(to_string(s.polarity))},
                          {"confidence", s.confidence},
                          {"clause", render_clause(s, vocab)}});
  return {{"statements", statements}, {"text", d.text}};
}

nlohmann::json explanation_json(const ProminenceModel& model, const AttributeVocabulary& vocab,
                                std::span<const double> r_i, std::span<const double> r_j, std::size_t k,
                                const std::string& id_i, const std::string& id_j) {
  require(model.num_attributes() == vocab.size(), "model and vocabulary attribute counts differ");
  const Prediction p = predict(model, r_i, r_j);
  nlohmann::json out = to_json(describe_prediction(p, k, vocab), vocab);
  nlohmann::json confidences = nlohmann::json::array();
  for (std::size_t q = 0; q < p.ranked.size(); ++q) {
    const AttributeId m = p.ranked[q];
    confidences.push_back({{"attribute_id", m},
                           {"attribute", vocab.name(m)},
                           {"confidence", p.scores[q]},
                           {"polarity", std::string(to_string(p.polarity[m]))}});
  }
  out["i"] = id_i;
  out["j"] = id_j;
  out["k"] = std::min(k, p.ranked.size());
  out["confidences"] = confidences;
  return out;
}

}  // namespace prom
