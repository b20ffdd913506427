#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gini/agglomerative.hpp"
#include "gini/dataset.hpp"
#include "gini/eval.hpp"
#include "gini/knn.hpp"
#include "gini/metrics.hpp"

namespace gini {

enum class Task { kKnn, kKMeans, kAgglo };

/// How an untuned generalized Gini spec picks nu in the clustering tasks.
enum class NuSelectionMode {
  /// Mean silhouette on held-out rows of the training part.
  kSilhouette,
  /// The grid value with the best cross-validated precision. Scored on the
  /// test folds, so the result is optimistic.
  kPrecision,
};

struct BenchConfig {
  std::filesystem::path manifest;
  /// Dataset names to run; empty means every manifest entry.
  std::vector<std::string> datasets;
  /// Metric spec strings; empty means all fourteen.
  std::vector<std::string> metrics;
  Task task = Task::kKnn;
  std::size_t folds = 3;
  std::uint64_t seed = 0;
  /// Each repeat r reruns the protocol with seed + r; per-fold scores of all
  /// repeats are pooled into one report.
  std::size_t repeats = 1;
  std::optional<double> noise;
  std::vector<std::size_t> k_range = default_k_range();
  std::vector<double> nu_grid;
  /// Cluster count; defaults to the dataset's class count.
  std::optional<std::size_t> k_clusters;
  Linkage linkage = Linkage::kAverage;
  /// Adds a Euclidean Ward row to agglomerative runs.
  bool ward_baseline = false;
  Objective objective = Objective::kMacroF1;
  NuSelectionMode nu_selection = NuSelectionMode::kSilhouette;
  QueryRanking ranking = QueryRanking::kPooled;
  /// Held-out rank convention for pooled Gini KNN.
  ConditionalScaling rank_scaling = ConditionalScaling::kUnscaled;
  std::size_t max_iter = 300;
  std::filesystem::path out_dir = "out";
};

Task parse_task(std::string_view text);
std::string_view to_string(Task task);
Objective parse_objective(std::string_view text);
std::string_view to_string(Objective objective);
NuSelectionMode parse_nu_selection(std::string_view text);
std::string_view to_string(NuSelectionMode mode);
/// "unscaled" or "scaled".
ConditionalScaling parse_rank_scaling(std::string_view text);
std::string_view to_string(ConditionalScaling scaling);

/// Reads a JSON config. Unknown keys are rejected.
BenchConfig bench_config_from_json(const nlohmann::json& j);
/// Every field except out_dir, so reports do not depend on where they are written.
nlohmann::json to_json(const BenchConfig& config);

/// Checks every knob and parses every metric; throws ConfigError naming the
/// offending value.
void validate_config(const BenchConfig& config);

/// Metric specs of the run, in config order.
std::vector<MetricSpec> config_metrics(const BenchConfig& config);

/// The grid used for untuned generalized Gini specs.
std::vector<double> effective_nu_grid(const BenchConfig& config);

/// Cross-validated KNN: per outer fold, (k, nu) is tuned by an inner grid
/// search on the training part and the tuned model scores the held-out part.
EvalReport evaluate_knn(const DataMatrix& data, const std::string& dataset, const MetricSpec& spec,
                        const BenchConfig& config);

/// Cross-validated k-means from shared Euclidean k-means++ centroids per fold;
/// held-out predictions are aligned to the classes before scoring.
EvalReport evaluate_kmeans(const DataMatrix& data, const std::string& dataset, const MetricSpec& spec,
                           const BenchConfig& config);

/// Agglomerative clustering of each held-out fold, aligned and scored.
EvalReport evaluate_agglo(const DataMatrix& data, const std::string& dataset, const MetricSpec& spec,
                          Linkage linkage, const BenchConfig& config);

struct BenchFailure {
  std::string dataset;
  std::string message;
};

struct BenchResult {
  std::vector<EvalReport> reports;
  std::vector<BenchFailure> failures;
};

/// Runs the configured task on every dataset x metric cell. A failing
/// dataset is dropped and recorded; the remaining datasets still run.
BenchResult run_benchmark(const BenchConfig& config);

nlohmann::json to_json(const BenchResult& result, const BenchConfig& config);

/// reports.json, ranking_precision.csv, ranking_recall.csv and, for k-means,
/// iterations.csv under config.out_dir. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const BenchConfig& config, const BenchResult& result);

/// metrics x datasets table of mean iteration counts with a trailing Mean column.
std::string iterations_csv(const std::vector<EvalReport>& reports);

}  // namespace gini
