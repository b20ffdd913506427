#include "gini/knn.hpp"

#include <algorithm>
#include <numeric>

#include "gini/error.hpp"
#include "gini/eval.hpp"
#include "gini/parallel.hpp"

namespace gini {

KnnModel knn_fit(const DataMatrix& train, const MetricSpec& spec, std::size_t k, QueryRanking ranking,
                 ConditionalScaling scaling) {
  if (!train.has_labels()) throw ConfigError("KNN needs labeled training data");
  if (k < 1 || k > train.rows()) {
    throw ConfigError("k = " + std::to_string(k) + " is outside [1, " + std::to_string(train.rows()) + "]");
  }
  KnnModel model{train, spec, std::nullopt, k, ranking, scaling};
  if (spec.is_gini()) model.ctx = build_rank_context(train.features, spec.rank_nu());
  return model;
}

std::vector<std::vector<std::size_t>> nearest_neighbors(const KnnModel& model, const Matrix& queries,
                                                        std::size_t count) {
  const Matrix& train = model.train.features;
  if (queries.cols() != train.cols()) {
    throw DomainError("query has " + std::to_string(queries.cols()) + " columns, training data has " +
                      std::to_string(train.cols()));
  }
  const std::size_t n_tr = train.rows();
  count = std::min(count, n_tr);

  // Rank tables for the training rows (train_ctx) and the queries (query_ctx).
  std::optional<RankContext> train_ctx;
  std::optional<RankContext> query_ctx;
  if (model.spec.is_gini() && queries.rows() > 0) {
    const auto nu = model.spec.rank_nu();
    if (model.ranking == QueryRanking::kPooled) {
      const auto pooled = pooled_rank_context(train, queries, nu);
      train_ctx = pooled.slice(0, n_tr);
      query_ctx = model.scaling == ConditionalScaling::kUnscaled
                      ? pooled.slice(n_tr, queries.rows())
                      : conditional_ranks(train, queries, nu, model.scaling);
    } else {
      train_ctx = model.ctx;
      query_ctx = ReferenceColumns(train).place(queries, nu);
    }
  }
  const RankContext* tptr = train_ctx ? &*train_ctx : nullptr;
  const RankContext* qptr = query_ctx ? &*query_ctx : nullptr;

  std::vector<std::vector<std::size_t>> out(queries.rows());
  parallel_for(queries.rows(), [&](std::size_t q) {
    const PointRef query = point_ref(queries, qptr, q);
    std::vector<double> dist(n_tr);
    for (std::size_t i = 0; i < n_tr; ++i) dist[i] = dissimilarity(model.spec, query, point_ref(train, tptr, i));
    std::vector<std::size_t> order(n_tr);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(), closer);
    order.resize(count);
    out[q] = std::move(order);
  });
  return out;
}

int vote(std::span<const int> train_labels, std::span<const std::size_t> neighbors, std::size_t k) {
  k = std::min(k, neighbors.size());
  if (k == 0) throw DomainError("vote over zero neighbors");
  std::vector<std::pair<int, std::size_t>> tally;  // (class, count) in order of first appearance
  for (std::size_t t = 0; t < k; ++t) {
    const int label = train_labels[neighbors[t]];
    auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& e) { return e.first == label; });
    if (it == tally.end()) {
      tally.emplace_back(label, 1);
    } else {
      ++it->second;
    }
  }
  auto best = tally.begin();
  for (auto it = tally.begin(); it != tally.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

std::vector<int> knn_predict(const KnnModel& model, const Matrix& queries) {
  const auto neighbors = nearest_neighbors(model, queries, model.k);
  const auto& labels = *model.train.labels;
  std::vector<int> out(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) out[q] = vote(labels, neighbors[q], model.k);
  return out;
}

std::vector<int> knn_predict(const KnnModel& model, const DataMatrix& queries) {
  return knn_predict(model, queries.features);
}

std::vector<std::size_t> default_k_range() {
  std::vector<std::size_t> out(11);
  std::iota(out.begin(), out.end(), std::size_t{1});
  return out;
}

namespace {

double objective_value(const ClassificationReport& report, Objective objective) {
  switch (objective) {
    case Objective::kPrecision:
      return report.precision;
    case Objective::kRecall:
      return report.recall;
    case Objective::kMacroF1:
      break;
  }
  return report.f1;
}

}  // namespace

GridSearchResult knn_grid_search(const DataMatrix& train, const MetricSpec& spec, std::span<const std::size_t> k_range,
                                 std::span<const double> nu_grid, const FoldPlan& folds, Objective objective,
                                 QueryRanking ranking, ConditionalScaling scaling) {
  if (!train.has_labels()) throw ConfigError("grid search needs labeled data");
  if (k_range.empty()) throw ConfigError("empty k range");
  if (folds.assignments.size() != train.rows()) throw ConfigError("fold plan does not match the data");
  for (const auto k : k_range) {
    if (k == 0) throw ConfigError("k must be at least 1");
  }

  std::vector<std::optional<double>> nus;
  if (spec.kind == MetricKind::kGeneralizedGini && !spec.nu) {
    if (nu_grid.empty()) throw ConfigError("empty nu grid for an untuned generalized Gini spec");
    std::vector<double> sorted(nu_grid.begin(), nu_grid.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (const double nu : sorted) {
      check_nu(nu);
      nus.emplace_back(nu);
    }
  } else {
    nus.push_back(spec.nu);
  }
  std::vector<std::size_t> ks(k_range.begin(), k_range.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  // scores[v][t]: fold-summed objective for nus[v], ks[t]; valid[t] false once a fold is too small.
  std::vector<bool> valid(ks.size(), true);
  for (std::size_t f = 0; f < folds.n_folds; ++f) {
    const auto n_train = train.rows() - folds.fold_size(f);
    for (std::size_t t = 0; t < ks.size(); ++t) {
      if (ks[t] > n_train || folds.fold_size(f) == 0) valid[t] = false;
    }
  }
  if (std::none_of(valid.begin(), valid.end(), [](bool v) { return v; })) {
    throw ConfigError("no k in the range fits the fold training sizes");
  }
  const std::size_t k_max = ks.back();

  std::vector<std::vector<double>> scores(nus.size(), std::vector<double>(ks.size(), 0.0));
  parallel_for(nus.size(), [&](std::size_t v) {
    const MetricSpec cell_spec = nus[v] ? spec.with_nu(*nus[v]) : spec;
    for (std::size_t f = 0; f < folds.n_folds; ++f) {
      const auto tr = train.select_rows(folds.train_indices(f));
      const auto te = train.select_rows(folds.test_indices(f));
      if (te.rows() == 0) continue;
      KnnModel model{tr, cell_spec, std::nullopt, 1, ranking, scaling};
      if (cell_spec.is_gini()) model.ctx = build_rank_context(tr.features, cell_spec.rank_nu());
      const auto neighbors = nearest_neighbors(model, te.features, k_max);
      for (std::size_t t = 0; t < ks.size(); ++t) {
        if (!valid[t]) continue;
        std::vector<int> pred(te.rows());
        for (std::size_t q = 0; q < te.rows(); ++q) pred[q] = vote(*tr.labels, neighbors[q], ks[t]);
        scores[v][t] += objective_value(classification_report(pred, *te.labels), objective);
      }
    }
  });

  std::size_t used_folds = 0;
  for (std::size_t f = 0; f < folds.n_folds; ++f) used_folds += folds.fold_size(f) > 0 ? 1 : 0;

  GridSearchResult result;
  bool have_best = false;
  for (std::size_t v = 0; v < nus.size(); ++v) {
    for (std::size_t t = 0; t < ks.size(); ++t) {
      if (!valid[t]) continue;
      const double mean = scores[v][t] / static_cast<double>(used_folds);
      result.cells.push_back({ks[t], nus[v], mean});
      // Cells are visited in increasing nu; strict improvement keeps the smaller nu,
      // and within one score the smaller k is preferred explicitly.
      const bool better = !have_best || mean > result.best_score ||
                          (mean == result.best_score && ks[t] < result.best_k);
      if (better) {
        result.best_k = ks[t];
        result.best_nu = nus[v];
        result.best_score = mean;
        have_best = true;
      }
    }
  }
  return result;
}

}  // namespace gini
