#include <doctest.h>

#include <cmath>
#include <random>

#include "gini/error.hpp"
#include "gini/metrics.hpp"
#include "helpers.hpp"

using namespace gini;
using testing::to_matrix;
using V = std::vector<double>;

namespace {

double gini_in(const oracle::Rows& rows, std::size_t a, std::size_t b, const MetricSpec& spec) {
  const auto m = to_matrix(rows);
  const auto ctx = build_rank_context(m, spec.rank_nu());
  return dissimilarity(spec, point_ref(m, &ctx, a), point_ref(m, &ctx, b));
}

}  // namespace

TEST_CASE("two-point example") {
  const oracle::Rows x = {{0, 3}, {4, 2}};
  CHECK(gini_in(x, 0, 1, MetricSpec::gini()) == 5.0);
  CHECK(gini_in({{0, 3}, {4, 2}, {2, 1.5}}, 0, 1, MetricSpec::gini()) == 9.0);
  CHECK(gini_in(x, 0, 1, MetricSpec::generalized_gini(2.0)) == 5.0);
  CHECK(gini_in(x, 0, 1, MetricSpec::generalized_gini(3.0)) == 15.0);
  CHECK(gini_in(x, 0, 0, MetricSpec::gini()) == 0.0);
  CHECK(gini_in(x, 1, 1, MetricSpec::generalized_gini(0.4)) == 0.0);
}

TEST_CASE("zoo examples") {
  const auto e = MetricSpec::euclidean();
  CHECK(zoo_distance(e, V{0, 3}, V{4, 2}) == doctest::Approx(std::sqrt(17.0)).epsilon(1e-15));
  const auto h = parse_metric("hassanat");
  CHECK(zoo_distance(h, V{1}, V{3}) == doctest::Approx(0.5));
  CHECK(zoo_distance(h, V{-1}, V{3}) == doctest::Approx(0.8));
  CHECK(zoo_distance(parse_metric("canberra"), V{0}, V{0}) == 0.0);
  CHECK(zoo_distance(parse_metric("minkowski"), V{0, 0}, V{1, 2}) == doctest::Approx(std::cbrt(9.0)));
}

TEST_CASE("zoo errors") {
  CHECK_THROWS_AS(zoo_distance(MetricSpec::euclidean(), V{1, 2}, V{1}), DomainError);
  CHECK_THROWS_AS(zoo_distance(parse_metric("cosine"), V{0, 0}, V{1, 2}), DomainError);
  CHECK_THROWS_AS(gini_prametric(V{1}, V{1, 2}, V{1}, V{1, 2}), DomainError);
  CHECK_THROWS_AS(generalized_gini_prametric(V{1}, V{2}, V{1}, V{2}, 1.0), ConfigError);
  CHECK_THROWS_AS(gini_mean_difference(V{1}, V{1, 2}, V{1, 2}), DomainError);
}

TEST_CASE("zoo matches the formula oracle") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(-3.0, 6.0);
  for (const auto& spec : all_metric_specs()) {
    if (spec.is_gini()) continue;
    const auto name = to_string(spec).substr(0, to_string(spec).find(':'));
    for (int trial = 0; trial < 200; ++trial) {
      V x(1 + gen() % 6), y(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = trial % 4 == 0 ? std::round(u(gen)) : u(gen);
        y[j] = trial % 4 == 0 ? std::round(u(gen)) : u(gen);
      }
      if (spec.kind == MetricKind::kCosine && (std::all_of(x.begin(), x.end(), [](double v) { return v == 0; }) ||
                                               std::all_of(y.begin(), y.end(), [](double v) { return v == 0; }))) {
        continue;
      }
      CAPTURE(name);
      CHECK(zoo_distance(spec, x, y) == doctest::Approx(oracle::zoo(name, x, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("zoo identity and symmetry") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.5, 9.0);
  bool pearson_asymmetric = false;
  for (const auto& spec : all_metric_specs()) {
    if (spec.is_gini()) continue;
    for (int trial = 0; trial < 100; ++trial) {
      V x(3), y(3);
      for (auto& v : x) v = u(gen);
      for (auto& v : y) v = u(gen);
      CHECK(zoo_distance(spec, x, x) == doctest::Approx(0.0).epsilon(1e-15));
      const double xy = zoo_distance(spec, x, y);
      const double yx = zoo_distance(spec, y, x);
      CHECK(xy >= 0.0);
      if (spec.kind == MetricKind::kPearsonChi2) {
        pearson_asymmetric |= std::abs(xy - yx) > 1e-9;
      } else {
        CHECK(xy == doctest::Approx(yx).epsilon(1e-12));
      }
    }
  }
  CHECK(pearson_asymmetric);
}

TEST_CASE("gini prametric terms are non-negative") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rows = oracle::random_rows(gen, 2 + gen() % 10, 1 + gen() % 4, trial % 2 == 0);
    const auto m = to_matrix(rows);
    const auto ctx = build_rank_context(m);
    for (std::size_t a = 0; a < m.rows(); ++a) {
      for (std::size_t b = 0; b < m.rows(); ++b) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
          CHECK((m(a, j) - m(b, j)) * (ctx.asc(a)[j] - ctx.asc(b)[j]) >= 0.0);
        }
        CHECK(dissimilarity(MetricSpec::gini(), point_ref(m, &ctx, a), point_ref(m, &ctx, b)) ==
              doctest::Approx(oracle::gini(rows, rows[a], rows[b])).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gini mean difference") {
  CHECK(gini_mean_difference(V{1, 2}, V{1, 2}, V{1, 2}) == 3.5);
  // Sum of (2R - 1) over a tie-free ranking is n^2, so a constant x gives 2c.
  const V ry = ascending_ranks(V{0.3, -2, 5, 1.1});
  CHECK(gini_mean_difference(V{1.5, 1.5, 1.5, 1.5}, V{0.3, -2, 5, 1.1}, ry) == doctest::Approx(3.0));
  // Reversing y flips the sign for monotone x.
  const V x{1, 2, 3};
  const V up{10, 20, 30};
  const V down{30, 20, 10};
  const double a = gini_mean_difference(x, up, ascending_ranks(up));
  const double b = gini_mean_difference(x, down, ascending_ranks(down));
  const double center = gini_mean_difference(x, V{5, 5, 5}, ascending_ranks(V{5, 5, 5}));
  CHECK(a - center == doctest::Approx(-(b - center)));
  CHECK(a > b);
}

TEST_CASE("spec grammar") {
  for (const auto& spec : all_metric_specs()) CHECK(parse_metric(to_string(spec)) == spec);
  CHECK(all_metric_specs().size() == 14);
  const auto g = parse_metric("gini-gen:nu=2.48");
  CHECK(g.kind == MetricKind::kGeneralizedGini);
  CHECK(*g.nu == 2.48);
  CHECK(to_string(g) == "gini-gen:nu=2.48");
  CHECK(parse_metric("minkowski:p=3").p == 3.0);
  CHECK(parse_metric("minkowski:p=1.5").p == 1.5);
  CHECK(*parse_metric("gini").rank_nu() == 2.0);
  CHECK_FALSE(parse_metric("euclidean").rank_nu());
  CHECK_THROWS_AS(parse_metric("gini-gen").rank_nu(), ConfigError);
  CHECK_THROWS_AS(parse_metric("bogus"), ConfigError);
  CHECK_THROWS_AS(parse_metric("gini-gen:nu=1"), ConfigError);
  CHECK_THROWS_AS(parse_metric("gini-gen:nu=abc"), ConfigError);
  CHECK_THROWS_AS(parse_metric("euclidean:p=2"), ConfigError);
  CHECK_THROWS_AS(parse_metric("minkowski:p=-1"), ConfigError);
}

TEST_CASE("pairwise matrix") {
  const auto m = to_matrix({{0, 3}, {4, 2}, {2, 1.5}});
  const auto d = pairwise_dissimilarities(m, MetricSpec::gini());
  CHECK(d[0 * 3 + 1] == 9.0);
  CHECK(d[1 * 3 + 0] == 9.0);
  CHECK(d[0] == 0.0);
  const auto p = pairwise_dissimilarities(to_matrix({{1}, {2}}), parse_metric("pearson-chi2"));
  CHECK(p[1] == 0.25);
  CHECK(p[2] == 1.0);
}
