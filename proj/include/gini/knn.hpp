#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gini/dataset.hpp"
#include "gini/metrics.hpp"
#include "gini/ranks.hpp"

namespace gini {

/// How query points obtain ranks for the Gini prametrics.
enum class QueryRanking {
  /// Training and query rows are ranked together on each predict call.
  kPooled,
  /// Query rows are placed on the training rank scale; training ranks stay fixed.
  kInductive,
};

struct KnnModel {
  DataMatrix train;
  MetricSpec spec;
  /// Training-only ranks; present for Gini specs.
  std::optional<RankContext> ctx;
  std::size_t k = 1;
  QueryRanking ranking = QueryRanking::kPooled;
  ConditionalScaling scaling = ConditionalScaling::kUnscaled;
};

KnnModel knn_fit(const DataMatrix& train, const MetricSpec& spec, std::size_t k,
                 QueryRanking ranking = QueryRanking::kPooled,
                 ConditionalScaling scaling = ConditionalScaling::kUnscaled);

/// For each query row, the indices of its `count` nearest training rows in
/// ascending dissimilarity, ties broken by lower index.
std::vector<std::vector<std::size_t>> nearest_neighbors(const KnnModel& model, const Matrix& queries,
                                                        std::size_t count);

/// Majority vote over the first k neighbors; a tied vote goes to the tied
/// class whose member appears first in the neighbor order.
int vote(std::span<const int> train_labels, std::span<const std::size_t> neighbors, std::size_t k);

std::vector<int> knn_predict(const KnnModel& model, const Matrix& queries);
std::vector<int> knn_predict(const KnnModel& model, const DataMatrix& queries);

enum class Objective { kMacroF1, kPrecision, kRecall };

struct GridCell {
  std::size_t k = 1;
  std::optional<double> nu;
  double score = 0.0;
};

struct GridSearchResult {
  std::size_t best_k = 1;
  std::optional<double> best_nu;
  double best_score = 0.0;
  /// Every evaluated cell, ordered by nu then k.
  std::vector<GridCell> cells;
};

/// Cross-validated search over (k, nu). nu_grid is used only for an untuned
/// generalized Gini spec; other specs evaluate their own nu. Cells whose k
/// exceeds a fold's training size are skipped. The best cell maximizes the
/// fold-averaged objective; ties go to smaller k, then smaller nu.
GridSearchResult knn_grid_search(const DataMatrix& train, const MetricSpec& spec, std::span<const std::size_t> k_range,
                                 std::span<const double> nu_grid, const FoldPlan& folds,
                                 Objective objective = Objective::kMacroF1,
                                 QueryRanking ranking = QueryRanking::kPooled,
                                 ConditionalScaling scaling = ConditionalScaling::kUnscaled);

/// 1..11.
std::vector<std::size_t> default_k_range();

}  // namespace gini
