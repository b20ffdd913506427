#include "gini/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "gini/error.hpp"
#include "gini/ranks.hpp"

namespace gini {

std::vector<std::size_t> min_cost_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw DomainError("assignment cost matrix must be square");
  if (n == 0) return {};
  // Kuhn-Munkres with row/column potentials, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = cost[(r - 1) * n + (c - 1)] - u[r] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t c = 1; c <= n; ++c) assignment[match[c] - 1] = c - 1;
  return assignment;
}

namespace {

// Best total agreement when rows in `rows` are matched to columns in `cols`.
double best_agreement(const std::vector<double>& counts, std::size_t k, const std::vector<std::size_t>& rows,
                      const std::vector<std::size_t>& cols) {
  const std::size_t m = rows.size();
  if (m == 0) return 0.0;
  std::vector<double> cost(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) cost[a * m + b] = -counts[rows[a] * k + cols[b]];
  }
  const auto assignment = min_cost_assignment(cost, m);
  double total = 0.0;
  for (std::size_t a = 0; a < m; ++a) total += counts[rows[a] * k + cols[assignment[a]]];
  return total;
}

}  // namespace

std::vector<int> hungarian_align(std::span<const int> pred, std::span<const int> truth, std::size_t k) {
  if (pred.size() != truth.size()) throw DomainError("prediction and truth lengths differ");
  std::vector<double> counts(k * k, 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || truth[i] < 0 || static_cast<std::size_t>(pred[i]) >= k ||
        static_cast<std::size_t>(truth[i]) >= k) {
      throw DomainError("label out of range [0, " + std::to_string(k) + ")");
    }
    counts[static_cast<std::size_t>(pred[i]) * k + static_cast<std::size_t>(truth[i])] += 1.0;
  }
  std::vector<std::size_t> all(k);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double optimum = best_agreement(counts, k, all, all);

  // Fix rows one at a time to the smallest column that keeps the optimum reachable.
  std::vector<int> perm(k, -1);
  std::vector<bool> taken(k, false);
  double fixed = 0.0;
  for (std::size_t row = 0; row < k; ++row) {
    std::vector<std::size_t> rest_rows;
    for (std::size_t r = row + 1; r < k; ++r) rest_rows.push_back(r);
    for (std::size_t col = 0; col < k; ++col) {
      if (taken[col]) continue;
      std::vector<std::size_t> rest_cols;
      for (std::size_t c = 0; c < k; ++c) {
        if (!taken[c] && c != col) rest_cols.push_back(c);
      }
      const double here = counts[row * k + col];
      if (fixed + here + best_agreement(counts, k, rest_rows, rest_cols) == optimum) {
        perm[row] = static_cast<int>(col);
        taken[col] = true;
        fixed += here;
        break;
      }
    }
  }
  return perm;
}

std::vector<int> apply_alignment(std::span<const int> pred, std::span<const int> perm) {
  std::vector<int> out(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) out[i] = perm[static_cast<std::size_t>(pred[i])];
  return out;
}

ClassificationReport classification_report(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw DomainError("prediction and truth lengths differ");
  if (pred.empty()) throw DomainError("classification report of empty label vectors");
  std::set<int> classes(truth.begin(), truth.end());
  classes.insert(pred.begin(), pred.end());

  ClassificationReport report;
  report.classes.assign(classes.begin(), classes.end());
  for (const int c : report.classes) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] == c;
      const bool t = truth[i] == c;
      tp += (p && t) ? 1 : 0;
      fp += (p && !t) ? 1 : 0;
      fn += (!p && t) ? 1 : 0;
    }
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    report.class_precision.push_back(precision);
    report.class_recall.push_back(recall);
    report.class_f1.push_back(f1);
  }
  const auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  report.precision = mean(report.class_precision);
  report.recall = mean(report.class_recall);
  report.f1 = mean(report.class_f1);
  return report;
}

double silhouette_from_matrix(std::span<const double> dissimilarities, std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (dissimilarities.size() != n * n) throw DomainError("dissimilarity matrix does not match label count");
  std::vector<int> ids(labels.begin(), labels.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw DomainError("silhouette needs at least two clusters");

  std::vector<std::size_t> cluster(n);
  std::vector<double> sizes(ids.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cluster[i] = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), labels[i]) - ids.begin());
    sizes[cluster[i]] += 1.0;
  }
  double total = 0.0;
  std::vector<double> sums(ids.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[cluster[i]] <= 1.0) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[cluster[j]] += dissimilarities[i * n + j];
    }
    const double a = sums[cluster[i]] / (sizes[cluster[i]] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < ids.size(); ++c) {
      if (c != cluster[i]) b = std::min(b, sums[c] / sizes[c]);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double silhouette_score(const Matrix& data, std::span<const int> labels, const MetricSpec& spec) {
  if (labels.size() != data.rows()) throw DomainError("label count does not match row count");
  return silhouette_from_matrix(pairwise_dissimilarities(data, spec), labels);
}

namespace {

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, WilcoxonMode mode) {
  if (a.size() != b.size()) throw DomainError("Wilcoxon samples must have equal lengths");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) throw DomainError("all paired differences are zero");
  const std::size_t n = diffs.size();
  if (n < 5) throw DomainError("Wilcoxon test needs at least 5 non-zero differences");

  std::vector<double> magnitudes(n);
  for (std::size_t i = 0; i < n; ++i) magnitudes[i] = std::abs(diffs[i]);
  const auto ranks = ascending_ranks(magnitudes);

  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i] > 0) w_plus += ranks[i];
  }
  const double total = static_cast<double>(n * (n + 1)) / 2.0;
  const double w_minus = total - w_plus;

  WilcoxonResult result;
  result.statistic = std::min(w_plus, w_minus);
  result.n_used = n;
  result.exact = mode == WilcoxonMode::kExact || (mode == WilcoxonMode::kAuto && n <= 20);

  if (result.exact) {
    // Average ranks are multiples of 1/2, so doubled ranks are integers.
    std::vector<std::size_t> doubled(n);
    std::size_t max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
      max_sum += doubled[i];
    }
    std::vector<double> counts(max_sum + 1, 0.0);
    counts[0] = 1.0;
    std::size_t reach = 0;
    for (const std::size_t r : doubled) {
      for (std::size_t s = reach + 1; s-- > 0;) {
        if (counts[s] != 0.0) counts[s + r] += counts[s];
      }
      reach += r;
    }
    const auto threshold = static_cast<std::size_t>(std::lround(2.0 * result.statistic));
    double tail = 0.0;
    for (std::size_t s = 0; s <= threshold; ++s) tail += counts[s];
    result.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
  } else {
    std::vector<double> sorted = magnitudes;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && sorted[j] == sorted[i]) ++j;
      const auto t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const auto nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    const double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(w_plus - mean) - 0.5) / std::sqrt(variance);
    result.p_value = std::min(1.0, 2.0 * normal_upper_tail(z));
  }
  return result;
}

void aggregate_folds(EvalReport& report) {
  if (report.per_fold.empty()) return;
  const auto folds = static_cast<double>(report.per_fold.size());
  double p = 0, r = 0, f = 0, it = 0;
  bool has_iterations = true;
  for (const auto& fold : report.per_fold) {
    p += fold.precision;
    r += fold.recall;
    f += fold.f1;
    if (fold.iterations) {
      it += *fold.iterations;
    } else {
      has_iterations = false;
    }
  }
  report.precision = p / folds;
  report.recall = r / folds;
  report.f1 = f / folds;
  if (has_iterations) report.iterations = it / folds;

  std::map<int, int> k_votes;
  std::map<double, int> nu_votes;
  for (const auto& fold : report.per_fold) {
    if (fold.k) ++k_votes[*fold.k];
    if (fold.nu) ++nu_votes[*fold.nu];
  }
  const auto mode = [](const auto& votes) {
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    return best->first;
  };
  if (!k_votes.empty()) report.k = mode(k_votes);
  if (!nu_votes.empty()) report.nu = mode(nu_votes);
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : report.per_fold) {
    nlohmann::json jf = {{"precision", f.precision}, {"recall", f.recall}, {"f1", f.f1}};
    if (f.iterations) jf["iterations"] = *f.iterations;
    if (f.k) jf["k"] = *f.k;
    if (f.nu) jf["nu"] = *f.nu;
    folds.push_back(std::move(jf));
  }
  nlohmann::json params = nlohmann::json::object();
  params["k"] = report.k ? nlohmann::json(*report.k) : nlohmann::json(nullptr);
  params["nu"] = report.nu ? nlohmann::json(*report.nu) : nlohmann::json(nullptr);
  return {
      {"dataset", report.dataset},
      {"spec", report.spec},
      {"precision", report.precision},
      {"recall", report.recall},
      {"f1", report.f1},
      {"iterations", report.iterations ? nlohmann::json(*report.iterations) : nlohmann::json(nullptr)},
      {"params", params},
      {"per_fold", folds},
  };
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.spec = j.at("spec").get<std::string>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  if (j.contains("iterations") && !j.at("iterations").is_null()) r.iterations = j.at("iterations").get<double>();
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (p.contains("k") && !p.at("k").is_null()) r.k = p.at("k").get<int>();
    if (p.contains("nu") && !p.at("nu").is_null()) r.nu = p.at("nu").get<double>();
  }
  if (j.contains("per_fold")) {
    for (const auto& jf : j.at("per_fold")) {
      FoldScore f;
      f.precision = jf.at("precision").get<double>();
      f.recall = jf.at("recall").get<double>();
      f.f1 = jf.at("f1").get<double>();
      if (jf.contains("iterations")) f.iterations = jf.at("iterations").get<double>();
      if (jf.contains("k")) f.k = jf.at("k").get<int>();
      if (jf.contains("nu")) f.nu = jf.at("nu").get<double>();
      r.per_fold.push_back(f);
    }
  }
  return r;
}

double score_of(const EvalReport& report, ScoreField field) {
  switch (field) {
    case ScoreField::kPrecision:
      return report.precision;
    case ScoreField::kRecall:
      return report.recall;
    case ScoreField::kF1:
      return report.f1;
    case ScoreField::kIterations:
      if (!report.iterations) throw ConfigError("report for " + report.spec + " on " + report.dataset + " has no iteration count");
      return *report.iterations;
  }
  return 0.0;
}

std::string to_string(ScoreField field) {
  switch (field) {
    case ScoreField::kPrecision:
      return "precision";
    case ScoreField::kRecall:
      return "recall";
    case ScoreField::kF1:
      return "f1";
    case ScoreField::kIterations:
      return "iterations";
  }
  return "unknown";
}

namespace {

RankTable rank_grid(std::vector<std::string> metrics, std::vector<std::string> datasets,
                    const std::vector<std::vector<std::optional<double>>>& scores, std::optional<int> decimals,
                    bool lower_is_better) {
  RankTable table;
  table.metrics = std::move(metrics);
  table.datasets = std::move(datasets);
  const std::size_t m = table.metrics.size();
  const std::size_t d = table.datasets.size();
  table.ranks.assign(m, std::vector<double>(d, 0.0));
  table.mean_rank.assign(m, 0.0);
  const double scale = decimals ? std::pow(10.0, *decimals) : 1.0;
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> col(m);
    for (std::size_t r = 0; r < m; ++r) {
      if (!scores[r][c]) {
        throw ConfigError("no score for metric '" + table.metrics[r] + "' on dataset '" + table.datasets[c] + "'");
      }
      const double s = *scores[r][c];
      col[r] = decimals ? std::round(s * scale) / scale : s;
      if (lower_is_better) col[r] = -col[r];
    }
    for (std::size_t r = 0; r < m; ++r) {
      const auto better = std::count_if(col.begin(), col.end(), [&](double s) { return s > col[r]; });
      table.ranks[r][c] = 1.0 + static_cast<double>(better);
    }
  }
  for (std::size_t r = 0; r < m && d > 0; ++r) {
    table.mean_rank[r] = std::accumulate(table.ranks[r].begin(), table.ranks[r].end(), 0.0) / static_cast<double>(d);
  }
  return table;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

RankTable rank_table(const std::map<std::string, std::map<std::string, double>>& scores_by_dataset,
                     std::optional<int> decimals, bool lower_is_better) {
  std::set<std::string> metric_set;
  std::vector<std::string> datasets;
  for (const auto& [dataset, scores] : scores_by_dataset) {
    datasets.push_back(dataset);
    for (const auto& [metric, s] : scores) metric_set.insert(metric);
  }
  std::vector<std::string> metrics(metric_set.begin(), metric_set.end());
  std::vector<std::vector<std::optional<double>>> grid(metrics.size(), std::vector<std::optional<double>>(datasets.size()));
  for (std::size_t r = 0; r < metrics.size(); ++r) {
    for (std::size_t c = 0; c < datasets.size(); ++c) {
      const auto& scores = scores_by_dataset.at(datasets[c]);
      if (const auto it = scores.find(metrics[r]); it != scores.end()) grid[r][c] = it->second;
    }
  }
  return rank_grid(std::move(metrics), std::move(datasets), grid, decimals, lower_is_better);
}

RankTable rank_table(std::span<const EvalReport> reports, ScoreField field, std::optional<int> decimals) {
  std::vector<std::string> metrics;
  std::vector<std::string> datasets;
  for (const auto& r : reports) {
    if (std::find(metrics.begin(), metrics.end(), r.spec) == metrics.end()) metrics.push_back(r.spec);
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
  }
  std::vector<std::vector<std::optional<double>>> grid(metrics.size(), std::vector<std::optional<double>>(datasets.size()));
  for (const auto& r : reports) {
    const auto mi = static_cast<std::size_t>(std::find(metrics.begin(), metrics.end(), r.spec) - metrics.begin());
    const auto di = static_cast<std::size_t>(std::find(datasets.begin(), datasets.end(), r.dataset) - datasets.begin());
    grid[mi][di] = score_of(r, field);
  }
  return rank_grid(std::move(metrics), std::move(datasets), grid, decimals, field == ScoreField::kIterations);
}

std::string rank_table_csv(const RankTable& table) {
  std::string out = "metric";
  for (const auto& d : table.datasets) out += "," + d;
  out += ",Rank\n";
  for (std::size_t r = 0; r < table.metrics.size(); ++r) {
    out += table.metrics[r];
    for (const double rank : table.ranks[r]) out += "," + format_number(rank);
    out += "," + format_number(table.mean_rank[r]) + "\n";
  }
  return out;
}

nlohmann::json to_json(const RankTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < table.metrics.size(); ++r) {
    rows.push_back({{"metric", table.metrics[r]}, {"ranks", table.ranks[r]}, {"mean_rank", table.mean_rank[r]}});
  }
  return {{"datasets", table.datasets}, {"rows", rows}};
}

}  // namespace gini
