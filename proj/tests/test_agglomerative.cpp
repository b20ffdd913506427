#include <doctest.h>

#include <random>
#include <set>

#include "gini/agglomerative.hpp"
#include "gini/error.hpp"
#include "helpers.hpp"

using namespace gini;
using testing::to_matrix;

namespace {

// Direct mean of cross-pair entries between two leaf sets.
double cross_mean(const std::vector<double>& d, std::size_t n, const std::vector<std::size_t>& a,
                  const std::vector<std::size_t>& b) {
  double s = 0;
  for (const auto i : a) {
    for (const auto j : b) s += d[i * n + j];
  }
  return s / static_cast<double>(a.size() * b.size());
}

}  // namespace

TEST_CASE("three points on a line") {
  const auto r = agglomerative_fit(to_matrix({{0}, {1}, {10}}), 2, MetricSpec::euclidean());
  CHECK(r.labels == std::vector<int>{0, 0, 1});
  REQUIRE(r.dendrogram.merges.size() == 2);
  CHECK(r.dendrogram.merges[0].a == 0);
  CHECK(r.dendrogram.merges[0].b == 1);
  CHECK(r.dendrogram.merges[0].height == 1.0);
  CHECK(r.dendrogram.merges[1].a == 2);
  CHECK(r.dendrogram.merges[1].b == 3);
  CHECK(r.dendrogram.merges[1].height == 9.5);
  CHECK(r.dendrogram.merges[1].size == 3);
}

TEST_CASE("gini merge height of the two-point example") {
  const auto r = agglomerative_fit(to_matrix({{0, 3}, {4, 2}}), 1, MetricSpec::gini());
  REQUIRE(r.dendrogram.merges.size() == 1);
  CHECK(r.dendrogram.merges[0].height == 5.0);
  CHECK(r.labels == std::vector<int>{0, 0});
}

TEST_CASE("k equal to the row count leaves singletons") {
  const auto r = agglomerative_fit(to_matrix({{0}, {4}, {1}, {7}}), 4, MetricSpec::euclidean());
  CHECK(r.labels == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("ties merge the smallest pair of ids") {
  const auto r = agglomerative_fit(to_matrix({{0}, {1}, {2}, {3}}), 1, MetricSpec::euclidean());
  CHECK(r.dendrogram.merges[0].a == 0);
  CHECK(r.dendrogram.merges[0].b == 1);
  CHECK(r.dendrogram.merges[1].a == 2);
  CHECK(r.dendrogram.merges[1].b == 3);
}

TEST_CASE("ward") {
  const auto r = agglomerative_fit(to_matrix({{0}, {1}, {10}}), 2, MetricSpec::euclidean(), Linkage::kWard);
  CHECK(r.labels == std::vector<int>{0, 0, 1});
  CHECK(r.dendrogram.merges[0].height == doctest::Approx(1.0));
  // Ward distance between {0,1} and {10}: sqrt(2 * 2 * 1 / 3) * |0.5 - 10|.
  CHECK(r.dendrogram.merges[1].height == doctest::Approx(std::sqrt(4.0 / 3.0) * 9.5));
  CHECK_THROWS_AS(agglomerative_fit(to_matrix({{0}, {1}}), 1, MetricSpec::gini(), Linkage::kWard), ConfigError);
  CHECK(parse_linkage("ward") == Linkage::kWard);
  CHECK_THROWS_AS(parse_linkage("single"), ConfigError);
}

TEST_CASE("average linkage equals the direct cross-pair mean") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 9;
    const auto rows = oracle::random_rows(gen, n, 2, trial % 2 == 0);
    const auto spec = trial % 3 == 0 ? MetricSpec::euclidean() : MetricSpec::generalized_gini(0.5 + (trial % 4));
    const auto m = to_matrix(rows);
    const auto d = pairwise_dissimilarities(m, spec);
    const auto dendro = build_dendrogram(d, n, Linkage::kAverage);
    REQUIRE(dendro.merges.size() == n - 1);
    std::vector<std::vector<std::size_t>> members(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};
    std::set<std::size_t> consumed;
    for (std::size_t t = 0; t < dendro.merges.size(); ++t) {
      const auto& mg = dendro.merges[t];
      CHECK(mg.a < mg.b);
      CHECK(consumed.insert(mg.a).second);
      CHECK(consumed.insert(mg.b).second);
      CHECK(mg.height == doctest::Approx(cross_mean(d, n, members[mg.a], members[mg.b])).epsilon(1e-9));
      members[n + t] = members[mg.a];
      members[n + t].insert(members[n + t].end(), members[mg.b].begin(), members[mg.b].end());
      CHECK(mg.size == members[n + t].size());
    }
  }
}

TEST_CASE("cuts partition the leaves consistently") {
  std::mt19937_64 gen(41);
  const auto rows = oracle::random_rows(gen, 12, 3, false);
  const auto m = to_matrix(rows);
  const auto dendro = agglomerative_fit(m, 1, MetricSpec::gini()).dendrogram;
  for (std::size_t k = 1; k <= 12; ++k) {
    const auto labels = dendro.cut(k);
    std::set<int> distinct(labels.begin(), labels.end());
    CHECK(distinct.size() == k);
    // Undoing merges: leaves joined by the first 12 - k merges share a label.
    std::vector<std::vector<std::size_t>> members(23);
    for (std::size_t i = 0; i < 12; ++i) members[i] = {i};
    for (std::size_t t = 0; t < 12 - k; ++t) {
      const auto& mg = dendro.merges[t];
      members[12 + t] = members[mg.a];
      members[12 + t].insert(members[12 + t].end(), members[mg.b].begin(), members[mg.b].end());
      for (const auto leaf : members[12 + t]) CHECK(labels[leaf] == labels[members[12 + t][0]]);
    }
    CHECK(agglomerative_fit(m, k, MetricSpec::gini()).labels == labels);
  }
  CHECK_THROWS_AS(dendro.cut(0), ConfigError);
  CHECK_THROWS_AS(dendro.cut(13), ConfigError);
}

TEST_CASE("dendrogram json") {
  const auto r = agglomerative_fit(to_matrix({{0}, {1}, {10}}), 2, MetricSpec::euclidean());
  const auto j = to_json(r.dendrogram);
  CHECK(j["n_leaves"] == 3);
  CHECK(j["merges"].size() == 2);
  CHECK(j["merges"][1]["height"] == 9.5);
}
