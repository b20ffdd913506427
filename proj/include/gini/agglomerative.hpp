#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gini/dataset.hpp"
#include "gini/metrics.hpp"

namespace gini {

enum class Linkage { kAverage, kWard };

Linkage parse_linkage(std::string_view text);
std::string_view to_string(Linkage linkage);

/// One merge step. Leaves are clusters 0..n-1; merge t creates cluster n + t.
struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;

  /// Leaf labels after applying the first n_leaves - k merges. Labels are
  /// numbered by the first leaf of each cluster.
  std::vector<int> cut(std::size_t k) const;
};

/// Greedy merging from an n x n dissimilarity matrix. Asymmetric inputs are
/// symmetrized as (d(i,j) + d(j,i)) / 2. Average linkage keeps the mean
/// cross-pair dissimilarity; Ward applies the variance-increase update to
/// squared entries and reports square-rooted heights. Equal heights merge the
/// pair with the lexicographically smallest (a, b) cluster ids.
Dendrogram build_dendrogram(std::span<const double> dissimilarities, std::size_t n, Linkage linkage);

struct AgglomerativeResult {
  Dendrogram dendrogram;
  std::vector<int> labels;
};

/// Clusters every row of `data` into k groups. Gini ranks are taken over the
/// whole matrix. Ward requires the Euclidean spec.
AgglomerativeResult agglomerative_fit(const Matrix& data, std::size_t k, const MetricSpec& spec,
                                      Linkage linkage = Linkage::kAverage);

nlohmann::json to_json(const Dendrogram& dendrogram);

}  // namespace gini
