#pragma once

#include <vector>

#include "gini/dataset.hpp"
#include "oracles.hpp"

namespace testing {

inline gini::Matrix to_matrix(const oracle::Rows& rows) {
  const std::size_t d = rows.empty() ? 0 : rows[0].size();
  std::vector<double> v;
  for (const auto& r : rows) v.insert(v.end(), r.begin(), r.end());
  return gini::Matrix(rows.size(), d, std::move(v));
}

inline oracle::Rows to_rows(const gini::Matrix& m) {
  oracle::Rows out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

inline std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace testing
