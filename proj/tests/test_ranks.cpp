#include <doctest.h>

#include <numeric>
#include <random>

#include "gini/error.hpp"
#include "gini/ranks.hpp"
#include "helpers.hpp"

using namespace gini;
using testing::to_matrix;
using testing::vec;

TEST_CASE("ascending and descending ranks") {
  CHECK(ascending_ranks(std::vector<double>{0, 4}) == std::vector<double>{1, 2});
  CHECK(ascending_ranks(std::vector<double>{3, 2}) == std::vector<double>{2, 1});
  CHECK(ascending_ranks(std::vector<double>{1, 1, 2}) == std::vector<double>{1.5, 1.5, 3});
  CHECK(ascending_ranks(std::vector<double>{5}) == std::vector<double>{1});
  CHECK(descending_ranks(std::vector<double>{0, 4}) == std::vector<double>{2, 1});
  CHECK(descending_ranks(std::vector<double>{1, 1, 2}) == std::vector<double>{2.5, 2.5, 1});
  CHECK_THROWS_AS(ascending_ranks(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(descending_ranks(std::vector<double>{}), DomainError);
}

TEST_CASE("rank properties on random columns") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + gen() % 25;
    const auto col = oracle::column(oracle::random_rows(gen, n, 1, trial % 2 == 0), 0);
    const auto asc = ascending_ranks(col);
    const auto desc = descending_ranks(col);
    const double sum = std::accumulate(asc.begin(), asc.end(), 0.0);
    CHECK(sum == doctest::Approx(n * (n + 1) / 2.0));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(asc[i] == oracle::count_rank(col, col[i]));
      CHECK(desc[i] == static_cast<double>(n) + 1 - asc[i]);
      for (std::size_t k = 0; k < n; ++k) {
        if (col[i] < col[k]) CHECK(asc[i] < asc[k]);
      }
    }
    std::vector<double> shifted = col;
    for (auto& v : shifted) v += 3.25;
    CHECK(ascending_ranks(shifted) == asc);
  }
}

TEST_CASE("rank context") {
  const Matrix x = to_matrix({{0, 3}, {4, 2}});
  const auto ctx = build_rank_context(x, 2.0);
  CHECK(ctx.n_ref() == 2);
  CHECK(vec(ctx.asc(0)) == std::vector<double>{1, 2});
  CHECK(vec(ctx.asc(1)) == std::vector<double>{2, 1});
  CHECK(vec(ctx.desc_pow(0)) == vec(ctx.desc(0)));
  CHECK(vec(ctx.desc_pow(1)) == vec(ctx.desc(1)));
  CHECK(build_rank_context(x).desc_pow(0).empty());
  CHECK_THROWS_AS(build_rank_context(x, 1.0), ConfigError);

  const auto c3 = build_rank_context(x, 3.0);
  CHECK(vec(c3.desc_pow(0)) == std::vector<double>{4, 1});

  const Matrix constant = to_matrix({{7, 1}, {7, 2}, {7, 3}});
  const auto cc = build_rank_context(constant);
  for (std::size_t i = 0; i < 3; ++i) CHECK(cc.asc(i)[0] == 2.0);
}

TEST_CASE("conditional ranks") {
  const Matrix train = to_matrix({{1}, {3}, {5}});
  auto ctx = conditional_ranks(train, to_matrix({{2}}));
  CHECK(ctx.n_ref() == 4);
  CHECK(ctx.asc(0)[0] == 2.0);
  CHECK(ctx.desc(0)[0] == 3.0);

  CHECK(conditional_ranks(train, to_matrix({{-10}})).asc(0)[0] == 1.0);
  CHECK(conditional_ranks(to_matrix({{4}}), to_matrix({{4}})).asc(0)[0] == 1.5);
  CHECK(conditional_ranks(train, Matrix(0, 1)).rows() == 0);
  CHECK_THROWS_AS(conditional_ranks(train, to_matrix({{1, 2}})), DomainError);

  const auto pooled = pooled_rank_context(train, to_matrix({{2}}));
  CHECK(vec(pooled.asc(0)) == std::vector<double>{1});
  CHECK(pooled.asc(3)[0] == 2.0);
  CHECK(pooled.asc(1)[0] == 3.0);
}

TEST_CASE("conditional ranks match a pooled counting oracle") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_tr = 1 + gen() % 10, n_te = 1 + gen() % 5, d = 1 + gen() % 3;
    auto tr = oracle::random_rows(gen, n_tr, d, true);
    auto te = oracle::random_rows(gen, n_te, d, true);
    if (trial % 3 == 0) te[0] = tr[0];
    const double nu = 0.5 + static_cast<double>(gen() % 5);
    const auto ctx = conditional_ranks(to_matrix(tr), to_matrix(te), nu == 1.0 ? 2.0 : nu);
    oracle::Rows pool = tr;
    pool.insert(pool.end(), te.begin(), te.end());
    for (std::size_t i = 0; i < n_te; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        CHECK(ctx.asc(i)[j] == oracle::count_rank(oracle::column(pool, j), te[i][j]));
      }
    }
  }
}

TEST_CASE("scaled conditional convention") {
  const auto ctx = conditional_ranks(to_matrix({{1}, {3}, {5}}), to_matrix({{2}}), 2.5,
                                     ConditionalScaling::kScaledPowNu);
  CHECK(ctx.desc_pow(0)[0] == doctest::Approx(std::pow(3.0, 2.5) * 0.25));
}

TEST_CASE("reference placement") {
  const ReferenceColumns ref(to_matrix({{1}, {3}, {3}, {5}}));
  CHECK(ref.ascending_rank(0, 0.0) == 0.5);
  CHECK(ref.ascending_rank(0, 1.0) == 1.0);
  CHECK(ref.ascending_rank(0, 2.0) == 1.5);
  CHECK(ref.ascending_rank(0, 3.0) == 2.5);
  CHECK(ref.ascending_rank(0, 4.0) == 3.5);
  CHECK(ref.ascending_rank(0, 9.0) == 4.5);
  const auto placed = ref.place(to_matrix({{3}}), 2.0);
  CHECK(placed.n_ref() == 4);
  CHECK(placed.desc(0)[0] == 2.5);

  // Reference rows placed against themselves get their own ranks.
  std::mt19937_64 gen(8);
  const auto rows = oracle::random_rows(gen, 15, 3, true);
  const auto m = to_matrix(rows);
  const auto own = build_rank_context(m);
  const auto again = ReferenceColumns(m).place(m, std::nullopt);
  for (std::size_t i = 0; i < 15; ++i) CHECK(vec(own.asc(i)) == vec(again.asc(i)));
}
