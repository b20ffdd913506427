#include "gini/agglomerative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gini/error.hpp"

namespace gini {

Linkage parse_linkage(std::string_view text) {
  if (text == "average") return Linkage::kAverage;
  if (text == "ward") return Linkage::kWard;
  throw ConfigError("unknown linkage '" + std::string(text) + "'");
}

std::string_view to_string(Linkage linkage) { return linkage == Linkage::kWard ? "ward" : "average"; }

std::vector<int> Dendrogram::cut(std::size_t k) const {
  if (k < 1 || k > n_leaves) {
    throw ConfigError("cannot cut " + std::to_string(n_leaves) + " leaves into " + std::to_string(k) + " clusters");
  }
  // Union-find over cluster ids; merged ids point at their new cluster.
  std::vector<std::size_t> parent(n_leaves + merges.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const std::size_t used = n_leaves - k;
  for (std::size_t t = 0; t < used; ++t) {
    parent[merges[t].a] = n_leaves + t;
    parent[merges[t].b] = n_leaves + t;
  }
  std::vector<int> labels(n_leaves);
  std::vector<std::pair<std::size_t, int>> seen;
  for (std::size_t i = 0; i < n_leaves; ++i) {
    const std::size_t root = find(i);
    auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& e) { return e.first == root; });
    if (it == seen.end()) {
      seen.emplace_back(root, static_cast<int>(seen.size()));
      labels[i] = seen.back().second;
    } else {
      labels[i] = it->second;
    }
  }
  return labels;
}

Dendrogram build_dendrogram(std::span<const double> dissimilarities, std::size_t n, Linkage linkage) {
  if (dissimilarities.size() != n * n) throw DomainError("dissimilarity matrix must be n x n");
  if (n == 0) throw DomainError("cannot cluster zero points");
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = i == j ? 0.0 : 0.5 * (dissimilarities[i * n + j] + dissimilarities[j * n + i]);
      dist[i * n + j] = linkage == Linkage::kWard ? v * v : v;
    }
  }
  // Slot s holds cluster id ids[s] with sizes[s] leaves while active[s].
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::vector<std::size_t> sizes(n, 1);
  std::vector<bool> active(n, true);

  Dendrogram out;
  out.n_leaves = n;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    std::size_t best_s = n, best_r = n;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_ids{n * 2, n * 2};
    for (std::size_t s = 0; s < n; ++s) {
      if (!active[s]) continue;
      for (std::size_t r = s + 1; r < n; ++r) {
        if (!active[r]) continue;
        const double v = dist[s * n + r];
        const std::pair<std::size_t, std::size_t> pair_ids{std::min(ids[s], ids[r]), std::max(ids[s], ids[r])};
        if (best_s == n || v < best || (v == best && pair_ids < best_ids)) {
          best = v;
          best_s = s;
          best_r = r;
          best_ids = pair_ids;
        }
      }
    }
    const double ns = static_cast<double>(sizes[best_s]);
    const double nr = static_cast<double>(sizes[best_r]);
    for (std::size_t q = 0; q < n; ++q) {
      if (!active[q] || q == best_s || q == best_r) continue;
      double updated;
      if (linkage == Linkage::kWard) {
        const double nq = static_cast<double>(sizes[q]);
        updated = ((ns + nq) * dist[best_s * n + q] + (nr + nq) * dist[best_r * n + q] - nq * best) / (ns + nr + nq);
      } else {
        updated = (ns * dist[best_s * n + q] + nr * dist[best_r * n + q]) / (ns + nr);
      }
      dist[best_s * n + q] = dist[q * n + best_s] = updated;
    }
    const double height = linkage == Linkage::kWard ? std::sqrt(std::max(best, 0.0)) : best;
    out.merges.push_back({best_ids.first, best_ids.second, height, sizes[best_s] + sizes[best_r]});
    ids[best_s] = n + t;
    sizes[best_s] += sizes[best_r];
    active[best_r] = false;
  }
  return out;
}

AgglomerativeResult agglomerative_fit(const Matrix& data, std::size_t k, const MetricSpec& spec, Linkage linkage) {
  if (linkage == Linkage::kWard && spec.kind != MetricKind::kEuclidean) {
    throw ConfigError("Ward linkage requires the euclidean metric, got '" + to_string(spec) + "'");
  }
  if (k < 1 || k > data.rows()) {
    throw ConfigError("k = " + std::to_string(k) + " is outside [1, " + std::to_string(data.rows()) + "]");
  }
  AgglomerativeResult result;
  result.dendrogram = build_dendrogram(pairwise_dissimilarities(data, spec), data.rows(), linkage);
  result.labels = result.dendrogram.cut(k);
  return result;
}

nlohmann::json to_json(const Dendrogram& dendrogram) {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : dendrogram.merges) {
    merges.push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}, {"size", m.size}});
  }
  return {{"n_leaves", dendrogram.n_leaves}, {"merges", merges}};
}

}  // namespace gini
