#include <doctest.h>

#include <random>

#include "gini/error.hpp"
#include "gini/knn.hpp"
#include "helpers.hpp"

using namespace gini;
using testing::to_matrix;

namespace {

DataMatrix labeled(const oracle::Rows& rows, std::vector<int> labels) {
  return make_labeled(to_matrix(rows), std::move(labels));
}

// Two tight blobs far apart.
DataMatrix blobs(std::uint64_t seed, std::size_t per_blob) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  oracle::Rows rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 2 * per_blob; ++i) {
    const double c = i < per_blob ? 0.0 : 50.0;
    rows.push_back({c + noise(gen), c + 10 + noise(gen)});
    labels.push_back(i < per_blob ? 0 : 1);
  }
  return labeled(rows, labels);
}

}  // namespace

TEST_CASE("fit contract") {
  const auto train = labeled({{0}, {10}}, {0, 1});
  const auto m = knn_fit(train, MetricSpec::euclidean(), 1);
  CHECK(m.k == 1);
  CHECK_FALSE(m.ctx);
  const auto g = knn_fit(train, MetricSpec::gini(), 2);
  REQUIRE(g.ctx);
  CHECK(g.ctx->cols() == 1);
  CHECK_THROWS_AS(knn_fit(train, MetricSpec::euclidean(), 0), ConfigError);
  CHECK_THROWS_AS(knn_fit(train, MetricSpec::euclidean(), 3), ConfigError);
  DataMatrix unlabeled;
  unlabeled.features = to_matrix({{1}});
  CHECK_THROWS_AS(knn_fit(unlabeled, MetricSpec::euclidean(), 1), ConfigError);
  CHECK_THROWS_AS(knn_predict(m, to_matrix({{1, 2}})), DomainError);
}

TEST_CASE("small predictions") {
  const auto e = MetricSpec::euclidean();
  CHECK(knn_predict(knn_fit(labeled({{0}, {10}}, {0, 1}), e, 1), to_matrix({{1}})) == std::vector<int>{0});
  CHECK(knn_predict(knn_fit(labeled({{0}, {2}, {4}}, {0, 1, 1}), e, 3), to_matrix({{1}})) == std::vector<int>{1});
  // k = rows predicts the majority class everywhere.
  const auto all = knn_fit(labeled({{0}, {1}, {2}, {30}}, {1, 1, 1, 0}), e, 4);
  CHECK(knn_predict(all, to_matrix({{29}, {31}})) == std::vector<int>{1, 1});
}

TEST_CASE("tie breaking") {
  const auto e = MetricSpec::euclidean();
  // Equidistant neighbors: the lower training index wins.
  CHECK(knn_predict(knn_fit(labeled({{2}, {0}}, {1, 0}), e, 1), to_matrix({{1}})) == std::vector<int>{1});
  CHECK(knn_predict(knn_fit(labeled({{0}, {2}}, {0, 1}), e, 1), to_matrix({{1}})) == std::vector<int>{0});
  // One vote each: the nearest neighbor's class wins.
  CHECK(knn_predict(knn_fit(labeled({{5}, {1.5}}, {0, 1}), e, 2), to_matrix({{1}})) == std::vector<int>{1});
  CHECK(vote(std::vector<int>{0, 1, 1, 0}, std::vector<std::size_t>{3, 1, 0, 2}, 4) == 0);
}

TEST_CASE("a training point predicts its own label with k = 1") {
  std::mt19937_64 gen(4);
  const auto rows = oracle::random_rows(gen, 12, 3, false);
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) labels.push_back(static_cast<int>(gen() % 3));
  const auto train = labeled(rows, labels);
  for (const auto& spec : {MetricSpec::euclidean(), MetricSpec::gini(), MetricSpec::generalized_gini(3.0)}) {
    CHECK(knn_predict(knn_fit(train, spec, 1), train.features) == labels);
  }
}

TEST_CASE("matches the brute-force classifier for every metric") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.1, 9.0);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 4 + gen() % 9, d = 1 + gen() % 3, q = 1 + gen() % 4;
    oracle::Rows tr(n, std::vector<double>(d)), te(q, std::vector<double>(d));
    for (auto& r : tr) {
      for (auto& v : r) v = u(gen);
    }
    for (auto& r : te) {
      for (auto& v : r) v = u(gen);
    }
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(gen() % 2));
    const std::size_t k = 1 + gen() % n;
    for (auto spec : all_metric_specs()) {
      const double nu = 0.5 + static_cast<double>(gen() % 4);
      if (spec.kind == MetricKind::kGeneralizedGini) spec = spec.with_nu(nu);
      const auto full = to_string(MetricSpec{spec.kind, 3.0, std::nullopt});
      const auto name = full.substr(0, full.find(':'));
      const auto model = knn_fit(labeled(tr, labels), spec, k);
      CAPTURE(name);
      CHECK(knn_predict(model, to_matrix(te)) == oracle::knn(name, nu, tr, labels, te, k));
      ++checked;
    }
  }
  CHECK(checked == 30 * 14);
}

TEST_CASE("decision invariances") {
  std::mt19937_64 gen(15);
  const auto rows = oracle::random_rows(gen, 20, 3, false);
  const auto queries = oracle::random_rows(gen, 8, 3, false);
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) labels.push_back(static_cast<int>(gen() % 3));

  auto scaled = rows, scaled_q = queries, shifted = rows, shifted_q = queries;
  for (auto* m : {&scaled, &scaled_q}) {
    for (auto& r : *m) {
      for (auto& v : r) v *= 4.0;
    }
  }
  for (auto* m : {&shifted, &shifted_q}) {
    for (auto& r : *m) {
      for (auto& v : r) v += 7.5;
    }
  }
  for (const auto* text : {"euclidean", "manhattan", "minkowski"}) {
    const auto spec = parse_metric(text);
    for (std::size_t k : {1, 3, 5}) {
      CHECK(knn_predict(knn_fit(labeled(rows, labels), spec, k), to_matrix(queries)) ==
            knn_predict(knn_fit(labeled(scaled, labels), spec, k), to_matrix(scaled_q)));
    }
  }
  for (const auto& spec : {MetricSpec::gini(), MetricSpec::generalized_gini(2.5)}) {
    for (std::size_t k : {1, 3, 5}) {
      CHECK(knn_predict(knn_fit(labeled(rows, labels), spec, k), to_matrix(queries)) ==
            knn_predict(knn_fit(labeled(shifted, labels), spec, k), to_matrix(shifted_q)));
    }
  }
}

TEST_CASE("inductive ranking keeps queries on the training scale") {
  const auto train = labeled({{0}, {10}, {20}}, {0, 1, 1});
  const auto model = knn_fit(train, MetricSpec::gini(), 1, QueryRanking::kInductive);
  CHECK(knn_predict(model, to_matrix({{1}, {19}})) == std::vector<int>{0, 1});
  // A query predicted alone or within a batch gets the same answer.
  CHECK(knn_predict(model, to_matrix({{19}})) == std::vector<int>{1});
}

TEST_CASE("grid search") {
  const auto data = blobs(1, 15);
  const auto folds = split_folds(data.rows(), 3, 5);
  const std::vector<std::size_t> ks = {1, 2, 3, 4, 5};
  const std::vector<double> nus = {0.5, 2.0, 3.0};
  const auto r = knn_grid_search(data, MetricSpec::generalized_gini(std::nullopt), ks, nus, folds);
  CHECK(r.best_k == 1);
  REQUIRE(r.best_nu);
  CHECK(*r.best_nu == 0.5);
  CHECK(r.best_score == 1.0);
  CHECK(r.cells.size() == ks.size() * nus.size());
  for (const auto& c : r.cells) CHECK(c.score == 1.0);

  const std::vector<std::size_t> one = {1};
  const auto single = knn_grid_search(data, MetricSpec::euclidean(), one, {}, folds);
  CHECK(single.best_k == 1);
  CHECK_FALSE(single.best_nu);
  REQUIRE(single.cells.size() == 1);
  CHECK(single.cells[0].score == single.best_score);

  CHECK_THROWS_AS(knn_grid_search(data, MetricSpec::euclidean(), {}, {}, folds), ConfigError);
  CHECK_THROWS_AS(knn_grid_search(data, MetricSpec::generalized_gini(std::nullopt), ks, {}, folds), ConfigError);
  CHECK(default_k_range() == std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
}

TEST_CASE("grid search is deterministic") {
  std::mt19937_64 gen(9);
  const auto rows = oracle::random_rows(gen, 40, 2, false);
  std::vector<int> labels;
  for (const auto& r : rows) labels.push_back(r[0] + 0.3 * r[1] > 0 ? 1 : 0);
  const auto data = labeled(rows, labels);
  const auto folds = split_folds(data.rows(), 3, 1);
  const auto ks = default_k_range();
  const std::vector<double> nus = {0.3, 1.5, 2.0, 4.0};
  const auto a = knn_grid_search(data, MetricSpec::generalized_gini(std::nullopt), ks, nus, folds);
  const auto b = knn_grid_search(data, MetricSpec::generalized_gini(std::nullopt), ks, nus, folds);
  CHECK(a.best_k == b.best_k);
  CHECK(a.best_nu == b.best_nu);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK(a.cells[i].score == b.cells[i].score);
  for (const auto& c : a.cells) {
    const bool beats = c.score > a.best_score;
    const bool ties_earlier = c.score == a.best_score && (c.k < a.best_k || (c.k == a.best_k && *c.nu < *a.best_nu));
    CHECK_FALSE(beats);
    CHECK_FALSE(ties_earlier);
  }
}
