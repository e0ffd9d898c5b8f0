#pragma once

#include <string>
#include <vector>

#include "dataset.hpp"
#include "ranker.hpp"
#include "tempdir.hpp"

namespace testing {

inline prom::AttributeVocabulary vocab(std::vector<std::string> names) {
  prom::AttributeVocabulary v;
  v.names = std::move(names);
  return v;
}

// Score matrix whose rows are given explicitly; ids are "s0", "s1", ...
inline prom::ScoreMatrix score_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<std::string> ids;
  std::vector<double> values;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ids.push_back("s" + std::to_string(k));
    values.insert(values.end(), rows[k].begin(), rows[k].end());
  }
  return prom::ScoreMatrix(ids, rows.empty() ? 0 : rows.front().size(), values);
}

}  // namespace testing
