#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gini/dataset.hpp"
#include "gini/metrics.hpp"
#include "gini/ranks.hpp"

namespace gini {

struct KMeansModel {
  std::size_t k = 0;
  Matrix centroids;
  MetricSpec spec;
  /// Frozen ranks of the training rows (Gini specs only).
  std::optional<RankContext> ctx;
  /// Training columns that centroids and new points are ranked against.
  ReferenceColumns reference;
  std::size_t iterations = 0;
  /// Sum of squared dissimilarities to the assigned centroid, one entry per
  /// assignment step.
  std::vector<double> objective_trace;
  bool converged = false;
  /// Final assignment of the training rows.
  std::vector<int> labels;
};

/// k-means++ seeding: a uniform first row, then rows drawn with probability
/// proportional to the squared dissimilarity to the nearest chosen row.
Matrix kmeanspp_init(const Matrix& data, std::size_t k, const MetricSpec& spec, std::uint64_t seed);

/// Lloyd iterations from `init`. Gini specs keep the training ranks fixed and
/// place the centroids on the training rank scale after every update.
KMeansModel kmeans_fit(const Matrix& data, std::size_t k, const MetricSpec& spec, const Matrix& init,
                       std::size_t max_iter = 300, double tol = 1e-9);

/// Nearest centroid for each row; ties go to the lowest centroid index.
std::vector<int> kmeans_predict(const KMeansModel& model, const Matrix& points);

/// Total squared dissimilarity of `labels` against `centroids` with the
/// model's frozen ranks.
double kmeans_objective(const KMeansModel& model, const Matrix& data, std::span<const int> labels,
                        const Matrix& centroids);

/// 0.1, 0.2, ..., 6.0 without 1.0.
std::vector<double> default_nu_grid();

struct NuSelection {
  double nu = 2.0;
  /// Mean silhouette per grid value, in grid order.
  std::vector<double> scores;
};

/// Chooses nu for the generalized Gini prametric. For each nu and each fold
/// of `train`, k-means is fit on the in-fold rows, the held-out rows are
/// labeled, and their silhouette under the same nu is recorded; a held-out
/// labeling with one cluster scores -1. Returns the nu with the largest
/// fold-mean silhouette, ties to the smaller nu.
NuSelection select_nu_silhouette(const Matrix& train, std::size_t k, std::span<const double> nu_grid,
                                 std::size_t n_folds, std::uint64_t seed, std::size_t max_iter = 300);

}  // namespace gini
