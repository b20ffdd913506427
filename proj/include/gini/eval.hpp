#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gini/dataset.hpp"
#include "gini/metrics.hpp"

namespace gini {

/// Permutation perm with perm[predicted cluster] = true label, maximizing the
/// number of agreements. Among optimal permutations the lexicographically
/// smallest is returned. Labels must lie in [0, k).
std::vector<int> hungarian_align(std::span<const int> pred, std::span<const int> truth, std::size_t k);

/// Optimal assignment for a square cost matrix (row-major), minimizing the
/// total cost. Returns the column chosen for each row.
std::vector<std::size_t> min_cost_assignment(std::span<const double> cost, std::size_t n);

/// pred relabeled through perm.
std::vector<int> apply_alignment(std::span<const int> pred, std::span<const int> perm);

struct ClassificationReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<int> classes;
  std::vector<double> class_precision;
  std::vector<double> class_recall;
  std::vector<double> class_f1;
};

/// Macro-averaged scores over the union of classes seen in pred and truth,
/// with 0/0 taken as 0. F1 is computed per class, then averaged.
ClassificationReport classification_report(std::span<const int> pred, std::span<const int> truth);

/// Mean silhouette over all points from a precomputed n x n dissimilarity
/// matrix where entry (i, j) = d(x_i, x_j).
double silhouette_from_matrix(std::span<const double> dissimilarities, std::span<const int> labels);

/// Mean silhouette (b - a) / max(a, b) under `spec`. Points alone in their
/// cluster score 0, as does a = b = 0.
double silhouette_score(const Matrix& data, std::span<const int> labels, const MetricSpec& spec);

enum class WilcoxonMode { kAuto, kExact, kNormal };

struct WilcoxonResult {
  /// min(W+, W-) over the non-zero differences.
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_used = 0;
  bool exact = false;
};

/// Two-sided signed-rank test on b - a. Zero differences are dropped; ties
/// get average ranks. Auto mode uses the exact null distribution for
/// n <= 20 and a normal approximation with tie and continuity corrections
/// above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMode mode = WilcoxonMode::kAuto);

/// Per-fold scores of one evaluation cell.
struct FoldScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> iterations;
  /// Hyper-parameters chosen for this fold, when tuned.
  std::optional<int> k;
  std::optional<double> nu;
};

struct EvalReport {
  std::string dataset;
  std::string spec;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<FoldScore> per_fold;
  std::optional<double> iterations;
  /// Most frequent per-fold choice, ties to the smaller value.
  std::optional<int> k;
  std::optional<double> nu;
};

/// Fills the aggregate fields as means of per_fold, and k / nu as the most
/// frequent per-fold choices.
void aggregate_folds(EvalReport& report);

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

enum class ScoreField { kPrecision, kRecall, kF1, kIterations };
double score_of(const EvalReport& report, ScoreField field);
std::string to_string(ScoreField field);

struct RankTable {
  std::vector<std::string> metrics;
  std::vector<std::string> datasets;
  /// ranks[m][d]: competition rank of metric m on dataset d.
  std::vector<std::vector<double>> ranks;
  std::vector<double> mean_rank;
};

/// Competition ranks ("1224"): on each dataset higher scores rank better,
/// tied metrics share the best rank and the next rank skips. With `decimals`
/// set, scores are rounded before comparison. Missing cells are a ConfigError.
/// Set `lower_is_better` for scores such as iteration counts.
RankTable rank_table(const std::map<std::string, std::map<std::string, double>>& scores_by_dataset,
                     std::optional<int> decimals = std::nullopt, bool lower_is_better = false);

/// Builds the score grid from reports and ranks it.
RankTable rank_table(std::span<const EvalReport> reports, ScoreField field, std::optional<int> decimals = std::nullopt);

/// metrics x datasets with a trailing Rank column holding the mean rank.
std::string rank_table_csv(const RankTable& table);
nlohmann::json to_json(const RankTable& table);

}  // namespace gini
