#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gini/dataset.hpp"
#include "gini/ranks.hpp"

namespace gini {

enum class MetricKind {
  kEuclidean,
  kManhattan,
  kMinkowski,
  kCosine,
  kLorentzian,
  kCanberra,
  kHellinger,
  kPearsonChi2,
  kSquaredChi,
  kJensenShannon,
  kVicisSymmetric,
  kHassanat,
  kGini,
  kGeneralizedGini,
};

/// Selects one dissimilarity. `p` applies to Minkowski only; `nu` to the
/// generalized Gini prametric, where an unset nu means "tune it".
struct MetricSpec {
  MetricKind kind = MetricKind::kEuclidean;
  double p = 3.0;
  std::optional<double> nu;

  static MetricSpec euclidean() { return {MetricKind::kEuclidean, 3.0, std::nullopt}; }
  static MetricSpec gini() { return {MetricKind::kGini, 3.0, std::nullopt}; }
  static MetricSpec generalized_gini(std::optional<double> nu) { return {MetricKind::kGeneralizedGini, 3.0, nu}; }

  bool is_gini() const { return kind == MetricKind::kGini || kind == MetricKind::kGeneralizedGini; }

  /// nu used to build rank contexts: 2 for the plain Gini prametric. Throws
  /// ConfigError for an untuned generalized spec.
  std::optional<double> rank_nu() const;

  /// Copy with nu fixed.
  MetricSpec with_nu(double value) const;

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

/// Parses "euclidean", "minkowski:p=3", "gini", "gini-gen:nu=2.48", ...
MetricSpec parse_metric(std::string_view text);
std::string to_string(const MetricSpec& spec);

/// The fourteen specs of the zoo, with Minkowski p = 3 and the generalized
/// Gini prametric untuned.
std::vector<MetricSpec> all_metric_specs();

/// Table-1 distance for a non-Gini spec. Degenerate terms (0/0 and
/// non-positive logarithm arguments) contribute zero; Hellinger clamps
/// negatives to zero before the square root; Hassanat is summed over features.
double zoo_distance(const MetricSpec& spec, std::span<const double> x, std::span<const double> y);

/// sum_j (x_j - y_j) (R(x_j) - R(y_j)) with ascending ranks from one population.
double gini_prametric(std::span<const double> x, std::span<const double> y, std::span<const double> rx,
                      std::span<const double> ry);

/// sgn(nu - 1) * -sum_j (x_j - y_j) (Rbar(x_j)^(nu-1) - Rbar(y_j)^(nu-1)), taking
/// the powered decumulative ranks as inputs. The sign factor keeps the value
/// non-negative for nu < 1 as well.
double generalized_gini_prametric(std::span<const double> x, std::span<const double> y,
                                  std::span<const double> rpx, std::span<const double> rpy, double nu);

/// Empirical Gini-covariance (2/n^2) sum_i x_i (2 R_y(y_i) - 1).
double gini_mean_difference(std::span<const double> x, std::span<const double> y, std::span<const double> ry);

/// A point together with its rank vectors. Rank spans may be empty for zoo specs.
struct PointRef {
  std::span<const double> values;
  std::span<const double> asc;
  std::span<const double> desc_pow;
};

/// Uniform entry point: dispatches to zoo_distance or the Gini prametrics.
double dissimilarity(const MetricSpec& spec, const PointRef& a, const PointRef& b);

/// PointRef for row i of `data`, with ranks from `ctx` when given.
PointRef point_ref(const Matrix& data, const RankContext* ctx, std::size_t i);

/// Full n x n dissimilarity matrix (row-major), entry (i, j) = d(x_i, x_j). Gini specs rank
/// against the whole matrix. Diagonal entries are zero.
std::vector<double> pairwise_dissimilarities(const Matrix& data, const MetricSpec& spec);

}  // namespace gini
