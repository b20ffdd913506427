#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gini/dataset.hpp"

namespace gini {

/// 1-based ranks in ascending order; tied values share the mean of the
/// positions they occupy.
std::vector<double> ascending_ranks(std::span<const double> column);

/// 1-based ranks in descending order with the same tie rule, so that
/// desc = n + 1 - asc elementwise.
std::vector<double> descending_ranks(std::span<const double> column);

/// Per-feature rank tables for a set of points against a reference
/// population of n_ref points. Tables are row-major (rows x cols) so the rank
/// vector of one point is a contiguous span.
class RankContext {
 public:
  RankContext() = default;
  RankContext(std::size_t n_ref, std::size_t rows, std::size_t cols, std::vector<double> asc,
              std::optional<double> nu);

  std::size_t n_ref() const { return n_ref_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::optional<double> nu() const { return nu_; }
  bool has_powered() const { return nu_.has_value(); }

  std::span<const double> asc(std::size_t i) const { return {asc_.data() + i * cols_, cols_}; }
  std::span<const double> desc(std::size_t i) const { return {desc_.data() + i * cols_, cols_}; }
  /// desc^(nu - 1); empty when nu is unset.
  std::span<const double> desc_pow(std::size_t i) const;

  /// Same ranks with powered decumulative ranks recomputed for another nu.
  RankContext with_nu(std::optional<double> nu) const;

  /// Rows [first, first + count) as their own context against the same n_ref.
  RankContext slice(std::size_t first, std::size_t count) const;

  /// Overrides the powered ranks (used by the scaled conditional convention).
  void set_desc_pow(std::vector<double> values);

 private:
  std::size_t n_ref_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> asc_;
  std::vector<double> desc_;
  std::optional<double> nu_;
  std::vector<double> desc_pow_;
};

/// Throws ConfigError when nu is 1 (the generalized prametric vanishes).
void check_nu(double nu);

/// Ranks of every row of `data` within its own columns.
RankContext build_rank_context(const Matrix& data, std::optional<double> nu = std::nullopt);

/// How held-out points receive powered decumulative ranks.
enum class ConditionalScaling {
  /// desc^(nu - 1), the same convention as the reference rows.
  kUnscaled,
  /// desc^nu * (n_te / n), the literal held-out formula used for comparison runs.
  kScaledPowNu,
};

/// Ranks of the pooled population train ++ test. Rows [0, n_tr) are the
/// training points and rows [n_tr, n) the test points, all against n.
RankContext pooled_rank_context(const Matrix& train, const Matrix& test, std::optional<double> nu = std::nullopt);

/// Ranks the test rows would hold if pooled with the training rows: average
/// tie ranks over the concatenated column, returned for the test rows only.
RankContext conditional_ranks(const Matrix& train, const Matrix& test, std::optional<double> nu = std::nullopt,
                              ConditionalScaling scaling = ConditionalScaling::kUnscaled);

/// Sorted copy of each column of a reference population, used to place new
/// points on the reference rank scale without re-ranking the population.
class ReferenceColumns {
 public:
  ReferenceColumns() = default;
  explicit ReferenceColumns(const Matrix& reference);

  std::size_t n_ref() const { return n_ref_; }
  std::size_t cols() const { return sorted_.size(); }

  /// Ascending rank of `value` on the reference scale: L + (E + 1) / 2 with L
  /// reference values strictly below and E equal. A value tied with reference
  /// points gets exactly their rank; a value between two consecutive
  /// reference values sits half-way between their ranks.
  double ascending_rank(std::size_t feature, double value) const;

  /// Rank vectors (asc, desc and, when nu is set, desc^(nu-1)) for each row of
  /// `points`, frozen against the reference population.
  RankContext place(const Matrix& points, std::optional<double> nu) const;

 private:
  std::size_t n_ref_ = 0;
  std::vector<std::vector<double>> sorted_;
};

}  // namespace gini
