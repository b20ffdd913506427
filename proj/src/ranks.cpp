#include "gini/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gini/error.hpp"

namespace gini {

std::vector<double> ascending_ranks(std::span<const double> column) {
  if (column.empty()) throw DomainError("cannot rank an empty column");
  const std::size_t n = column.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && column[order[j]] == column[order[i]]) ++j;
    // Positions i+1 .. j share their mean.
    const double shared = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = shared;
    i = j;
  }
  return ranks;
}

std::vector<double> descending_ranks(std::span<const double> column) {
  auto ranks = ascending_ranks(column);
  const double top = static_cast<double>(column.size()) + 1.0;
  for (double& r : ranks) r = top - r;
  return ranks;
}

void check_nu(double nu) {
  if (!std::isfinite(nu)) throw ConfigError("nu must be finite");
  if (nu == 1.0) throw ConfigError("nu = 1 makes the generalized Gini prametric identically zero");
}

RankContext::RankContext(std::size_t n_ref, std::size_t rows, std::size_t cols, std::vector<double> asc,
                         std::optional<double> nu)
    : n_ref_(n_ref), rows_(rows), cols_(cols), asc_(std::move(asc)) {
  desc_.resize(asc_.size());
  const double top = static_cast<double>(n_ref_) + 1.0;
  for (std::size_t t = 0; t < asc_.size(); ++t) desc_[t] = top - asc_[t];
  *this = with_nu(nu);
}

std::span<const double> RankContext::desc_pow(std::size_t i) const {
  if (desc_pow_.empty()) return {};
  return {desc_pow_.data() + i * cols_, cols_};
}

RankContext RankContext::with_nu(std::optional<double> nu) const {
  RankContext out;
  out.n_ref_ = n_ref_;
  out.rows_ = rows_;
  out.cols_ = cols_;
  out.asc_ = asc_;
  out.desc_ = desc_;
  out.nu_ = nu;
  if (nu) {
    check_nu(*nu);
    const double exponent = *nu - 1.0;
    out.desc_pow_.resize(desc_.size());
    for (std::size_t t = 0; t < desc_.size(); ++t) out.desc_pow_[t] = std::pow(desc_[t], exponent);
  }
  return out;
}

RankContext RankContext::slice(std::size_t first, std::size_t count) const {
  RankContext out;
  out.n_ref_ = n_ref_;
  out.rows_ = count;
  out.cols_ = cols_;
  out.nu_ = nu_;
  const auto b = static_cast<std::ptrdiff_t>(first * cols_);
  const auto e = static_cast<std::ptrdiff_t>((first + count) * cols_);
  out.asc_.assign(asc_.begin() + b, asc_.begin() + e);
  out.desc_.assign(desc_.begin() + b, desc_.begin() + e);
  if (!desc_pow_.empty()) out.desc_pow_.assign(desc_pow_.begin() + b, desc_pow_.begin() + e);
  return out;
}

void RankContext::set_desc_pow(std::vector<double> values) {
  if (values.size() != rows_ * cols_) throw DomainError("powered rank table has the wrong size");
  desc_pow_ = std::move(values);
}

RankContext build_rank_context(const Matrix& data, std::optional<double> nu) {
  if (nu) check_nu(*nu);
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n == 0 || d == 0) throw DomainError("rank context needs at least one row and one column");
  std::vector<double> asc(n * d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = data.column(j);
    const auto r = ascending_ranks(col);
    for (std::size_t i = 0; i < n; ++i) asc[i * d + j] = r[i];
  }
  return RankContext(n, n, d, std::move(asc), nu);
}

namespace {

Matrix stack(const Matrix& top, const Matrix& bottom) {
  std::vector<double> values;
  values.reserve(top.values().size() + bottom.values().size());
  values.insert(values.end(), top.values().begin(), top.values().end());
  values.insert(values.end(), bottom.values().begin(), bottom.values().end());
  return Matrix(top.rows() + bottom.rows(), top.cols(), std::move(values));
}

}  // namespace

RankContext pooled_rank_context(const Matrix& train, const Matrix& test, std::optional<double> nu) {
  if (train.cols() != test.cols()) throw DomainError("train and test column counts differ");
  return build_rank_context(stack(train, test), nu);
}

RankContext conditional_ranks(const Matrix& train, const Matrix& test, std::optional<double> nu,
                              ConditionalScaling scaling) {
  if (train.cols() != test.cols()) throw DomainError("train and test column counts differ");
  if (nu) check_nu(*nu);
  const std::size_t n = train.rows() + test.rows();
  if (test.rows() == 0) return RankContext(n, 0, train.cols(), {}, nu);
  auto pooled = pooled_rank_context(train, test, nu).slice(train.rows(), test.rows());
  if (nu && scaling == ConditionalScaling::kScaledPowNu) {
    const double scale = static_cast<double>(test.rows()) / static_cast<double>(n);
    std::vector<double> powered(test.rows() * test.cols());
    for (std::size_t i = 0; i < test.rows(); ++i) {
      const auto desc = pooled.desc(i);
      for (std::size_t j = 0; j < test.cols(); ++j) powered[i * test.cols() + j] = std::pow(desc[j], *nu) * scale;
    }
    pooled.set_desc_pow(std::move(powered));
  }
  return pooled;
}

ReferenceColumns::ReferenceColumns(const Matrix& reference) : n_ref_(reference.rows()) {
  sorted_.reserve(reference.cols());
  for (std::size_t j = 0; j < reference.cols(); ++j) {
    auto col = reference.column(j);
    std::sort(col.begin(), col.end());
    sorted_.push_back(std::move(col));
  }
}

double ReferenceColumns::ascending_rank(std::size_t feature, double value) const {
  const auto& col = sorted_[feature];
  const auto lo = std::lower_bound(col.begin(), col.end(), value);
  const auto hi = std::upper_bound(lo, col.end(), value);
  const auto below = static_cast<double>(lo - col.begin());
  const auto equal = static_cast<double>(hi - lo);
  return below + 0.5 * (equal + 1.0);
}

RankContext ReferenceColumns::place(const Matrix& points, std::optional<double> nu) const {
  if (points.cols() != cols()) throw DomainError("point dimension does not match the reference population");
  std::vector<double> asc(points.rows() * points.cols());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < points.cols(); ++j) asc[i * points.cols() + j] = ascending_rank(j, points(i, j));
  }
  return RankContext(n_ref_, points.rows(), points.cols(), std::move(asc), nu);
}

}  // namespace gini
