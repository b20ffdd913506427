#include "gini/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gini/error.hpp"
#include "gini/eval.hpp"
#include "gini/parallel.hpp"
#include "gini/random.hpp"

namespace gini {

namespace {

void check_finite(const Matrix& data) {
  for (const double v : data.values()) {
    if (std::isnan(v)) throw DomainError("data contains NaN");
  }
}

std::optional<RankContext> rank_rows(const Matrix& data, const MetricSpec& spec) {
  if (!spec.is_gini()) return std::nullopt;
  return build_rank_context(data, spec.rank_nu());
}

// Distances from every row of `points` to every centroid, row-major.
std::vector<double> centroid_distances(const MetricSpec& spec, const Matrix& points, const RankContext* point_ctx,
                                       const Matrix& centroids, const RankContext* centroid_ctx) {
  const std::size_t k = centroids.rows();
  std::vector<double> out(points.rows() * k);
  parallel_for(points.rows(), [&](std::size_t i) {
    const PointRef p = point_ref(points, point_ctx, i);
    for (std::size_t c = 0; c < k; ++c) out[i * k + c] = dissimilarity(spec, p, point_ref(centroids, centroid_ctx, c));
  });
  return out;
}

std::vector<int> nearest(const std::vector<double>& dist, std::size_t rows, std::size_t k) {
  std::vector<int> labels(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (dist[i * k + c] < dist[i * k + best]) best = c;
    }
    labels[i] = static_cast<int>(best);
  }
  return labels;
}

std::optional<RankContext> place_centroids(const KMeansModel& model, const Matrix& centroids) {
  if (!model.spec.is_gini()) return std::nullopt;
  return model.reference.place(centroids, model.spec.rank_nu());
}

}  // namespace

Matrix kmeanspp_init(const Matrix& data, std::size_t k, const MetricSpec& spec, std::uint64_t seed) {
  const std::size_t n = data.rows();
  if (k < 1 || k > n) throw ConfigError("k = " + std::to_string(k) + " is outside [1, " + std::to_string(n) + "]");
  check_finite(data);
  const auto ctx = rank_rows(data, spec);
  const RankContext* cptr = ctx ? &*ctx : nullptr;

  Rng rng(seed);
  std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.uniform_index(n))};
  std::vector<bool> taken(n, false);
  taken[chosen[0]] = true;
  std::vector<double> nearest_sq(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < k) {
    const PointRef last = point_ref(data, cptr, chosen.back());
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) {
        nearest_sq[i] = 0.0;
        continue;
      }
      const double d = dissimilarity(spec, point_ref(data, cptr, i), last);
      nearest_sq[i] = std::min(nearest_sq[i], d * d);
      mass += nearest_sq[i];
    }
    std::size_t pick = n;
    if (mass > 0.0) {
      const double target = rng.uniform01() * mass;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || nearest_sq[i] <= 0.0) continue;
        acc += nearest_sq[i];
        pick = i;
        if (acc > target) break;
      }
    }
    if (pick == n) {
      // Every remaining row coincides with a chosen one: draw uniformly among them.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) free.push_back(i);
      }
      pick = free[rng.uniform_index(free.size())];
    }
    taken[pick] = true;
    chosen.push_back(pick);
  }
  return data.select_rows(chosen);
}

double kmeans_objective(const KMeansModel& model, const Matrix& data, std::span<const int> labels,
                        const Matrix& centroids) {
  const auto cctx = place_centroids(model, centroids);
  const RankContext* pptr = model.ctx ? &*model.ctx : nullptr;
  const RankContext* cptr = cctx ? &*cctx : nullptr;
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double d = dissimilarity(model.spec, point_ref(data, pptr, i),
                                   point_ref(centroids, cptr, static_cast<std::size_t>(labels[i])));
    total += d * d;
  }
  return total;
}

KMeansModel kmeans_fit(const Matrix& data, std::size_t k, const MetricSpec& spec, const Matrix& init,
                       std::size_t max_iter, double tol) {
  check_finite(data);
  if (k < 1 || k > data.rows()) {
    throw ConfigError("k = " + std::to_string(k) + " is outside [1, " + std::to_string(data.rows()) + "]");
  }
  if (init.rows() != k || init.cols() != data.cols()) throw ConfigError("initial centroids do not match k and d");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");

  KMeansModel model;
  model.k = k;
  model.spec = spec;
  model.centroids = init;
  model.ctx = rank_rows(data, spec);
  if (spec.is_gini()) model.reference = ReferenceColumns(data);
  const RankContext* pptr = model.ctx ? &*model.ctx : nullptr;
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();

  std::vector<int> previous;
  for (std::size_t round = 1; round <= max_iter; ++round) {
    const auto cctx = place_centroids(model, model.centroids);
    const auto dist = centroid_distances(spec, data, pptr, model.centroids, cctx ? &*cctx : nullptr);
    auto labels = nearest(dist, n, k);
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double di = dist[i * k + static_cast<std::size_t>(labels[i])];
      objective += di * di;
    }
    model.objective_trace.push_back(objective);
    model.labels = labels;
    if (labels == previous) {
      model.converged = true;
      break;
    }

    // Refill empty clusters with the row farthest from its centroid, taken
    // from a cluster that keeps at least one member.
    std::vector<std::size_t> sizes(k, 0);
    for (const int l : labels) ++sizes[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      double far_d = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const auto li = static_cast<std::size_t>(labels[i]);
        if (sizes[li] <= 1) continue;
        const double di = dist[i * k + li];
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      --sizes[static_cast<std::size_t>(labels[far])];
      labels[far] = static_cast<int>(c);
      sizes[c] = 1;
    }

    Matrix next(k, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = next.row(static_cast<std::size_t>(labels[i]));
      const auto x = data.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] += x[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (double& v : next.row(c)) v /= static_cast<double>(sizes[c]);
    }
    model.centroids = std::move(next);
    model.iterations = round;
    previous = std::move(labels);

    const auto& trace = model.objective_trace;
    if (trace.size() > 1 && std::abs(trace[trace.size() - 1] - trace[trace.size() - 2]) <= tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

std::vector<int> kmeans_predict(const KMeansModel& model, const Matrix& points) {
  if (points.cols() != model.centroids.cols()) {
    throw DomainError("points have " + std::to_string(points.cols()) + " columns, centroids have " +
                      std::to_string(model.centroids.cols()));
  }
  check_finite(points);
  std::optional<RankContext> pctx;
  if (model.spec.is_gini()) pctx = model.reference.place(points, model.spec.rank_nu());
  const auto cctx = place_centroids(model, model.centroids);
  const auto dist = centroid_distances(model.spec, points, pctx ? &*pctx : nullptr, model.centroids,
                                       cctx ? &*cctx : nullptr);
  return nearest(dist, points.rows(), model.k);
}

std::vector<double> default_nu_grid() {
  std::vector<double> out;
  for (int i = 1; i <= 60; ++i) {
    if (i != 10) out.push_back(i / 10.0);
  }
  return out;
}

NuSelection select_nu_silhouette(const Matrix& train, std::size_t k, std::span<const double> nu_grid,
                                 std::size_t n_folds, std::uint64_t seed, std::size_t max_iter) {
  if (nu_grid.empty()) throw ConfigError("empty nu grid");
  for (const double nu : nu_grid) check_nu(nu);
  const auto plan = split_folds(train.rows(), n_folds, seed);

  struct FoldData {
    Matrix fit;
    Matrix held;
    Matrix init;
  };
  std::vector<FoldData> folds;
  for (std::size_t f = 0; f < n_folds; ++f) {
    FoldData fd{train.select_rows(plan.train_indices(f)), train.select_rows(plan.test_indices(f)), {}};
    if (fd.held.rows() < 2 || fd.fit.rows() < k) continue;
    fd.init = kmeanspp_init(fd.fit, k, MetricSpec::euclidean(), derive_seed(seed, f));
    folds.push_back(std::move(fd));
  }
  if (folds.empty()) throw ConfigError("no fold is large enough for nu selection");

  NuSelection out;
  out.scores.assign(nu_grid.size(), 0.0);
  parallel_for(nu_grid.size(), [&](std::size_t v) {
    const auto spec = MetricSpec::generalized_gini(nu_grid[v]);
    double total = 0.0;
    for (const auto& fd : folds) {
      const auto model = kmeans_fit(fd.fit, k, spec, fd.init, max_iter);
      const auto labels = kmeans_predict(model, fd.held);
      const bool single = std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels[0]; });
      total += single ? -1.0 : silhouette_score(fd.held, labels, spec);
    }
    out.scores[v] = total / static_cast<double>(folds.size());
  });
  std::size_t best = 0;
  for (std::size_t v = 1; v < nu_grid.size(); ++v) {
    if (out.scores[v] > out.scores[best] || (out.scores[v] == out.scores[best] && nu_grid[v] < nu_grid[best])) {
      best = v;
    }
  }
  out.nu = nu_grid[best];
  return out;
}

}  // namespace gini
