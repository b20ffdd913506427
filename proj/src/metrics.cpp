#include "gini/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "gini/error.hpp"
#include "gini/parallel.hpp"

namespace gini {

namespace {

struct NamedKind {
  std::string_view name;
  MetricKind kind;
};

constexpr NamedKind kNames[] = {
    {"euclidean", MetricKind::kEuclidean},
    {"manhattan", MetricKind::kManhattan},
    {"minkowski", MetricKind::kMinkowski},
    {"cosine", MetricKind::kCosine},
    {"lorentzian", MetricKind::kLorentzian},
    {"canberra", MetricKind::kCanberra},
    {"hellinger", MetricKind::kHellinger},
    {"pearson-chi2", MetricKind::kPearsonChi2},
    {"squared-chi", MetricKind::kSquaredChi},
    {"jensen-shannon", MetricKind::kJensenShannon},
    {"vicis-symmetric", MetricKind::kVicisSymmetric},
    {"hassanat", MetricKind::kHassanat},
    {"gini", MetricKind::kGini},
    {"gini-gen", MetricKind::kGeneralizedGini},
};

std::string_view kind_name(MetricKind kind) {
  for (const auto& n : kNames) {
    if (n.kind == kind) return n.name;
  }
  return "unknown";
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw DomainError("vector lengths differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace

std::optional<double> MetricSpec::rank_nu() const {
  if (kind == MetricKind::kGini) return 2.0;
  if (kind == MetricKind::kGeneralizedGini) {
    if (!nu) throw ConfigError("generalized Gini spec has no nu; tune it or pass gini-gen:nu=<value>");
    return nu;
  }
  return std::nullopt;
}

MetricSpec MetricSpec::with_nu(double value) const {
  MetricSpec out = *this;
  out.nu = value;
  return out;
}

MetricSpec parse_metric(std::string_view text) {
  const std::string original(text);
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const auto it = std::find_if(std::begin(kNames), std::end(kNames), [&](const auto& n) { return n.name == name; });
  if (it == std::end(kNames)) throw ConfigError("unknown metric '" + original + "'");
  MetricSpec spec{it->kind, 3.0, std::nullopt};
  if (colon == std::string_view::npos) return spec;

  std::string_view params = text.substr(colon + 1);
  while (!params.empty()) {
    const auto comma = params.find(',');
    const std::string_view item = params.substr(0, comma);
    params = comma == std::string_view::npos ? std::string_view{} : params.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("malformed metric parameter in '" + original + "'");
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    double parsed = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(parsed)) {
      throw ConfigError("non-numeric metric parameter in '" + original + "'");
    }
    if (key == "p" && spec.kind == MetricKind::kMinkowski) {
      if (parsed <= 0.0) throw ConfigError("Minkowski p must be positive in '" + original + "'");
      spec.p = parsed;
    } else if (key == "nu" && spec.kind == MetricKind::kGeneralizedGini) {
      if (parsed == 1.0) throw ConfigError("nu = 1 is not allowed in '" + original + "'");
      spec.nu = parsed;
    } else {
      throw ConfigError("parameter '" + std::string(key) + "' does not apply to '" + original + "'");
    }
  }
  return spec;
}

std::string to_string(const MetricSpec& spec) {
  std::string out(kind_name(spec.kind));
  if (spec.kind == MetricKind::kMinkowski) out += ":p=" + format_double(spec.p);
  if (spec.kind == MetricKind::kGeneralizedGini && spec.nu) out += ":nu=" + format_double(*spec.nu);
  return out;
}

std::vector<MetricSpec> all_metric_specs() {
  std::vector<MetricSpec> out;
  for (const auto& n : kNames) out.push_back(MetricSpec{n.kind, 3.0, std::nullopt});
  return out;
}

double zoo_distance(const MetricSpec& spec, std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size());
  if (x.empty()) throw DomainError("distance between empty vectors");
  const std::size_t d = x.size();
  double acc = 0.0;
  switch (spec.kind) {
    case MetricKind::kEuclidean:
      for (std::size_t j = 0; j < d; ++j) acc += (x[j] - y[j]) * (x[j] - y[j]);
      return std::sqrt(acc);
    case MetricKind::kManhattan:
      for (std::size_t j = 0; j < d; ++j) acc += std::abs(x[j] - y[j]);
      return acc;
    case MetricKind::kMinkowski:
      for (std::size_t j = 0; j < d; ++j) acc += std::pow(std::abs(x[j] - y[j]), spec.p);
      return std::pow(acc, 1.0 / spec.p);
    case MetricKind::kCosine: {
      double xx = 0.0;
      double yy = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        acc += x[j] * y[j];
        xx += x[j] * x[j];
        yy += y[j] * y[j];
      }
      if (xx == 0.0 || yy == 0.0) throw DomainError("cosine distance is undefined for a zero vector");
      return std::max(0.0, 1.0 - acc / (std::sqrt(xx) * std::sqrt(yy)));
    }
    case MetricKind::kLorentzian:
      for (std::size_t j = 0; j < d; ++j) acc += std::log1p(std::abs(x[j] - y[j]));
      return acc;
    case MetricKind::kCanberra:
      for (std::size_t j = 0; j < d; ++j) {
        const double denom = std::abs(x[j]) + std::abs(y[j]);
        if (denom != 0.0) acc += std::abs(x[j] - y[j]) / denom;
      }
      return acc;
    case MetricKind::kHellinger:
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = std::sqrt(std::max(x[j], 0.0)) - std::sqrt(std::max(y[j], 0.0));
        acc += diff * diff;
      }
      return std::sqrt(2.0 * acc);
    case MetricKind::kPearsonChi2:
      for (std::size_t j = 0; j < d; ++j) {
        if (y[j] != 0.0) acc += (x[j] - y[j]) * (x[j] - y[j]) / (y[j] * y[j]);
      }
      return acc;
    case MetricKind::kSquaredChi:
      for (std::size_t j = 0; j < d; ++j) {
        const double denom = std::abs(x[j] + y[j]);
        if (denom != 0.0) acc += (x[j] - y[j]) * (x[j] - y[j]) / denom;
      }
      return acc;
    case MetricKind::kJensenShannon:
      for (std::size_t j = 0; j < d; ++j) {
        const double sum = x[j] + y[j];
        if (sum == 0.0) continue;
        const double ax = 2.0 * x[j] / sum;
        const double ay = 2.0 * y[j] / sum;
        if (ax > 0.0) acc += x[j] * std::log(ax);
        if (ay > 0.0) acc += y[j] * std::log(ay);
      }
      return 0.5 * acc;
    case MetricKind::kVicisSymmetric:
      for (std::size_t j = 0; j < d; ++j) {
        const double m = std::min(x[j], y[j]);
        if (m != 0.0) acc += (x[j] - y[j]) * (x[j] - y[j]) / (m * m);
      }
      return acc;
    case MetricKind::kHassanat:
      for (std::size_t j = 0; j < d; ++j) {
        const double lo = std::min(x[j], y[j]);
        const double hi = std::max(x[j], y[j]);
        if (lo >= 0.0) {
          acc += 1.0 - (1.0 + lo) / (1.0 + hi);
        } else {
          acc += 1.0 - (1.0 + lo + std::abs(lo)) / (1.0 + hi + std::abs(lo));
        }
      }
      return acc;
    case MetricKind::kGini:
    case MetricKind::kGeneralizedGini:
      break;
  }
  throw DomainError("zoo_distance does not handle rank-based metric '" + to_string(spec) + "'");
}

double gini_prametric(std::span<const double> x, std::span<const double> y, std::span<const double> rx,
                      std::span<const double> ry) {
  check_lengths(x.size(), y.size());
  check_lengths(x.size(), rx.size());
  check_lengths(x.size(), ry.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += (x[j] - y[j]) * (rx[j] - ry[j]);
  return acc;
}

double generalized_gini_prametric(std::span<const double> x, std::span<const double> y,
                                  std::span<const double> rpx, std::span<const double> rpy, double nu) {
  check_nu(nu);
  check_lengths(x.size(), y.size());
  check_lengths(x.size(), rpx.size());
  check_lengths(x.size(), rpy.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += (x[j] - y[j]) * (rpx[j] - rpy[j]);
  return nu > 1.0 ? -acc : acc;
}

double gini_mean_difference(std::span<const double> x, std::span<const double> y, std::span<const double> ry) {
  check_lengths(x.size(), y.size());
  check_lengths(x.size(), ry.size());
  if (x.empty()) throw DomainError("Gini mean difference of empty vectors");
  const auto n = static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * (2.0 * ry[i] - 1.0);
  return 2.0 / (n * n) * acc;
}

double dissimilarity(const MetricSpec& spec, const PointRef& a, const PointRef& b) {
  switch (spec.kind) {
    case MetricKind::kGini:
      return gini_prametric(a.values, b.values, a.asc, b.asc);
    case MetricKind::kGeneralizedGini:
      return generalized_gini_prametric(a.values, b.values, a.desc_pow, b.desc_pow, *spec.rank_nu());
    default:
      return zoo_distance(spec, a.values, b.values);
  }
}

PointRef point_ref(const Matrix& data, const RankContext* ctx, std::size_t i) {
  PointRef p{data.row(i), {}, {}};
  if (ctx) {
    p.asc = ctx->asc(i);
    p.desc_pow = ctx->desc_pow(i);
  }
  return p;
}

std::vector<double> pairwise_dissimilarities(const Matrix& data, const MetricSpec& spec) {
  const std::size_t n = data.rows();
  std::optional<RankContext> ctx;
  if (spec.is_gini()) ctx = build_rank_context(data, spec.rank_nu());
  const RankContext* ctx_ptr = ctx ? &*ctx : nullptr;
  std::vector<double> out(n * n, 0.0);
  // Every ordered pair is evaluated: Pearson chi-squared is asymmetric.
  parallel_for(n, [&](std::size_t i) {
    const PointRef a = point_ref(data, ctx_ptr, i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) out[i * n + j] = dissimilarity(spec, a, point_ref(data, ctx_ptr, j));
    }
  });
  return out;
}

}  // namespace gini
