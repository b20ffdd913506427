#include "gini/bench.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "gini/error.hpp"
#include "gini/kmeans.hpp"
#include "gini/parallel.hpp"
#include "gini/random.hpp"

namespace gini {

namespace fs = std::filesystem;

Task parse_task(std::string_view text) {
  if (text == "knn") return Task::kKnn;
  if (text == "kmeans") return Task::kKMeans;
  if (text == "agglo") return Task::kAgglo;
  throw ConfigError("unknown task '" + std::string(text) + "'");
}

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kKnn:
      return "knn";
    case Task::kKMeans:
      return "kmeans";
    case Task::kAgglo:
      return "agglo";
  }
  return "knn";
}

Objective parse_objective(std::string_view text) {
  if (text == "f1" || text == "macro-f1") return Objective::kMacroF1;
  if (text == "precision") return Objective::kPrecision;
  if (text == "recall") return Objective::kRecall;
  throw ConfigError("unknown objective '" + std::string(text) + "'");
}

std::string_view to_string(Objective objective) {
  switch (objective) {
    case Objective::kPrecision:
      return "precision";
    case Objective::kRecall:
      return "recall";
    case Objective::kMacroF1:
      break;
  }
  return "f1";
}

NuSelectionMode parse_nu_selection(std::string_view text) {
  if (text == "silhouette") return NuSelectionMode::kSilhouette;
  if (text == "precision") return NuSelectionMode::kPrecision;
  throw ConfigError("unknown nu selection '" + std::string(text) + "'");
}

std::string_view to_string(NuSelectionMode mode) {
  return mode == NuSelectionMode::kPrecision ? "precision" : "silhouette";
}

ConditionalScaling parse_rank_scaling(std::string_view text) {
  if (text == "unscaled") return ConditionalScaling::kUnscaled;
  if (text == "scaled") return ConditionalScaling::kScaledPowNu;
  throw ConfigError("unknown rank scaling '" + std::string(text) + "'");
}

std::string_view to_string(ConditionalScaling scaling) {
  return scaling == ConditionalScaling::kScaledPowNu ? "scaled" : "unscaled";
}

namespace {

QueryRanking parse_ranking(std::string_view text) {
  if (text == "pooled") return QueryRanking::kPooled;
  if (text == "inductive") return QueryRanking::kInductive;
  throw ConfigError("unknown ranking mode '" + std::string(text) + "'");
}

std::string_view to_string(QueryRanking ranking) {
  return ranking == QueryRanking::kInductive ? "inductive" : "pooled";
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::uint64_t repeat_seed(const BenchConfig& config, std::size_t r) { return config.seed + r; }

std::uint64_t stream(std::uint64_t seed, const std::string& tag) { return derive_seed(seed, tag); }

DataMatrix with_noise(const DataMatrix& data, const std::string& dataset, const BenchConfig& config,
                      std::uint64_t seed) {
  if (!config.noise) return data;
  return inject_noise(data, *config.noise, stream(seed, "noise/" + dataset));
}

FoldScore score_fold(std::span<const int> pred, std::span<const int> truth) {
  const auto report = classification_report(pred, truth);
  return {report.precision, report.recall, report.f1, std::nullopt, std::nullopt, std::nullopt};
}

std::vector<int> aligned(std::span<const int> pred, std::span<const int> truth, std::size_t k) {
  const auto perm = hungarian_align(pred, truth, k);
  return apply_alignment(pred, perm);
}

EvalReport empty_report(const std::string& dataset, const MetricSpec& spec) {
  EvalReport report;
  report.dataset = dataset;
  report.spec = to_string(spec);
  return report;
}

bool untuned(const MetricSpec& spec) { return spec.kind == MetricKind::kGeneralizedGini && !spec.nu; }

std::size_t cluster_count(const DataMatrix& data, const BenchConfig& config) {
  return config.k_clusters.value_or(data.n_classes);
}

}  // namespace

BenchConfig bench_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  BenchConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "manifest") {
      c.manifest = get_as<std::string>(value, key);
    } else if (key == "datasets") {
      c.datasets = get_as<std::vector<std::string>>(value, key);
    } else if (key == "metrics") {
      c.metrics = get_as<std::vector<std::string>>(value, key);
    } else if (key == "task") {
      c.task = parse_task(get_as<std::string>(value, key));
    } else if (key == "folds") {
      c.folds = get_as<std::size_t>(value, key);
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(value, key);
    } else if (key == "repeats") {
      c.repeats = get_as<std::size_t>(value, key);
    } else if (key == "noise") {
      if (!value.is_null()) c.noise = get_as<double>(value, key);
    } else if (key == "k_range") {
      c.k_range = get_as<std::vector<std::size_t>>(value, key);
    } else if (key == "nu_grid") {
      c.nu_grid = get_as<std::vector<double>>(value, key);
    } else if (key == "k_clusters") {
      if (!value.is_null()) c.k_clusters = get_as<std::size_t>(value, key);
    } else if (key == "linkage") {
      c.linkage = parse_linkage(get_as<std::string>(value, key));
    } else if (key == "ward_baseline") {
      c.ward_baseline = get_as<bool>(value, key);
    } else if (key == "objective") {
      c.objective = parse_objective(get_as<std::string>(value, key));
    } else if (key == "nu_selection") {
      c.nu_selection = parse_nu_selection(get_as<std::string>(value, key));
    } else if (key == "ranking") {
      c.ranking = parse_ranking(get_as<std::string>(value, key));
    } else if (key == "rank_scaling") {
      c.rank_scaling = parse_rank_scaling(get_as<std::string>(value, key));
    } else if (key == "max_iter") {
      c.max_iter = get_as<std::size_t>(value, key);
    } else if (key == "out_dir") {
      c.out_dir = get_as<std::string>(value, key);
    } else {
      throw ConfigError("unknown config field '" + key + "'");
    }
  }
  return c;
}

nlohmann::json to_json(const BenchConfig& c) {
  return {
      {"manifest", c.manifest.generic_string()},
      {"datasets", c.datasets},
      {"metrics", c.metrics},
      {"task", to_string(c.task)},
      {"folds", c.folds},
      {"seed", c.seed},
      {"repeats", c.repeats},
      {"noise", c.noise ? nlohmann::json(*c.noise) : nlohmann::json(nullptr)},
      {"k_range", c.k_range},
      {"nu_grid", effective_nu_grid(c)},
      {"k_clusters", c.k_clusters ? nlohmann::json(*c.k_clusters) : nlohmann::json(nullptr)},
      {"linkage", to_string(c.linkage)},
      {"ward_baseline", c.ward_baseline},
      {"objective", to_string(c.objective)},
      {"nu_selection", to_string(c.nu_selection)},
      {"ranking", to_string(c.ranking)},
      {"rank_scaling", to_string(c.rank_scaling)},
      {"max_iter", c.max_iter},
  };
}

std::vector<MetricSpec> config_metrics(const BenchConfig& config) {
  if (config.metrics.empty()) return all_metric_specs();
  std::vector<MetricSpec> out;
  for (const auto& text : config.metrics) out.push_back(parse_metric(text));
  return out;
}

std::vector<double> effective_nu_grid(const BenchConfig& config) {
  return config.nu_grid.empty() ? default_nu_grid() : config.nu_grid;
}

void validate_config(const BenchConfig& config) {
  if (config.manifest.empty()) throw ConfigError("no manifest given");
  if (config.folds < 2) throw ConfigError("folds must be at least 2, got " + std::to_string(config.folds));
  if (config.repeats < 1) throw ConfigError("repeats must be at least 1");
  if (config.noise && !(*config.noise > 0.0 && *config.noise < 1.0)) {
    throw ConfigError("noise must lie in (0, 1), got " + format_number(*config.noise));
  }
  if (config.k_range.empty()) throw ConfigError("empty k range");
  for (const auto k : config.k_range) {
    if (k == 0) throw ConfigError("k range contains 0");
  }
  for (const double nu : config.nu_grid) {
    if (nu == 1.0 || !(nu > 0.0)) throw ConfigError("invalid nu grid value " + format_number(nu));
  }
  if (config.k_clusters && *config.k_clusters == 0) throw ConfigError("k_clusters must be at least 1");
  if (config.max_iter == 0) throw ConfigError("max_iter must be at least 1");
  if (config.rank_scaling != ConditionalScaling::kUnscaled && config.ranking != QueryRanking::kPooled) {
    throw ConfigError("rank_scaling 'scaled' applies to pooled ranking only");
  }
  std::set<std::string> seen;
  for (const auto& spec : config_metrics(config)) {
    const auto name = to_string(spec);
    if (!seen.insert(name).second) throw ConfigError("metric '" + name + "' listed twice");
    if (config.task == Task::kAgglo && config.linkage == Linkage::kWard && spec.kind != MetricKind::kEuclidean) {
      throw ConfigError("Ward linkage requires the euclidean metric, got '" + name + "'");
    }
  }
}

EvalReport evaluate_knn(const DataMatrix& data, const std::string& dataset, const MetricSpec& spec,
                        const BenchConfig& config) {
  if (!data.has_labels()) throw ConfigError("dataset '" + dataset + "' has no labels");
  const auto nu_grid = effective_nu_grid(config);
  EvalReport report = empty_report(dataset, spec);
  for (std::size_t r = 0; r < config.repeats; ++r) {
    const auto seed = repeat_seed(config, r);
    const auto noisy = with_noise(data, dataset, config, seed);
    const auto plan = split_folds(noisy.rows(), config.folds, stream(seed, "folds/" + dataset));
    for (std::size_t f = 0; f < config.folds; ++f) {
      const auto train = noisy.select_rows(plan.train_indices(f));
      const auto test = noisy.select_rows(plan.test_indices(f));
      const auto inner = split_folds(train.rows(), config.folds,
                                     stream(seed, "grid/" + dataset + "/" + std::to_string(f)));
      const auto grid = knn_grid_search(train, spec, config.k_range, nu_grid, inner, config.objective, config.ranking,
                                        config.rank_scaling);
      const MetricSpec tuned = grid.best_nu ? spec.with_nu(*grid.best_nu) : spec;
      const auto model = knn_fit(train, tuned, grid.best_k, config.ranking, config.rank_scaling);
      auto score = score_fold(knn_predict(model, test), *test.labels);
      score.k = static_cast<int>(grid.best_k);
      if (tuned.kind == MetricKind::kGeneralizedGini) score.nu = tuned.nu;
      report.per_fold.push_back(score);
    }
  }
  aggregate_folds(report);
  return report;
}

namespace {

struct ClusterFold {
  DataMatrix train;
  DataMatrix test;
  Matrix init;
  std::uint64_t nu_seed = 0;
};

std::vector<ClusterFold> kmeans_folds(const DataMatrix& data, const std::string& dataset, const BenchConfig& config,
                                      std::size_t k) {
  std::vector<ClusterFold> out;
  for (std::size_t r = 0; r < config.repeats; ++r) {
    const auto seed = repeat_seed(config, r);
    const auto noisy = with_noise(data, dataset, config, seed);
    const auto plan = split_folds(noisy.rows(), config.folds, stream(seed, "folds/" + dataset));
    for (std::size_t f = 0; f < config.folds; ++f) {
      ClusterFold fold;
      fold.train = noisy.select_rows(plan.train_indices(f));
      fold.test = noisy.select_rows(plan.test_indices(f));
      const auto tag = dataset + "/" + std::to_string(f);
      fold.init = kmeanspp_init(fold.train.features, k, MetricSpec::euclidean(), stream(seed, "init/" + tag));
      fold.nu_seed = stream(seed, "nu/" + tag);
      out.push_back(std::move(fold));
    }
  }
  return out;
}

FoldScore kmeans_fold_score(const ClusterFold& fold, const MetricSpec& spec, std::size_t k, std::size_t n_classes,
                            std::size_t max_iter) {
  const auto model = kmeans_fit(fold.train.features, k, spec, fold.init, max_iter);
  const auto pred = kmeans_predict(model, fold.test.features);
  auto score = score_fold(aligned(pred, *fold.test.labels, std::max(k, n_classes)), *fold.test.labels);
  score.iterations = static_cast<double>(model.iterations);
  if (spec.kind == MetricKind::kGeneralizedGini) score.nu = spec.nu;
  return score;
}

// Picks the grid nu whose report scores the best mean precision, ties to the smaller nu.
template <typename Evaluate>
EvalReport best_precision_over_grid(std::span<const double> grid, Evaluate evaluate) {
  std::vector<EvalReport> candidates(grid.size());
  parallel_for(grid.size(), [&](std::size_t v) { candidates[v] = evaluate(grid[v]); });
  std::size_t best = 0;
  for (std::size_t v = 1; v < grid.size(); ++v) {
    const bool better = candidates[v].precision > candidates[best].precision ||
                        (candidates[v].precision == candidates[best].precision && grid[v] < grid[best]);
    if (better) best = v;
  }
  return candidates[best];
}

}  // namespace

EvalReport evaluate_kmeans(const DataMatrix& data, const std::string& dataset, const MetricSpec& spec,
                           const BenchConfig& config) {
  if (!data.has_labels()) throw ConfigError("dataset '" + dataset + "' has no labels");
  const std::size_t k = cluster_count(data, config);
  const auto folds = kmeans_folds(data, dataset, config, k);
  const auto grid = effective_nu_grid(config);

  const auto run = [&](const std::function<MetricSpec(const ClusterFold&)>& spec_for) {
    EvalReport report = empty_report(dataset, spec);
    for (const auto& fold : folds) {
      report.per_fold.push_back(kmeans_fold_score(fold, spec_for(fold), k, data.n_classes, config.max_iter));
    }
    aggregate_folds(report);
    return report;
  };

  if (!untuned(spec)) return run([&](const ClusterFold&) { return spec; });
  if (config.nu_selection == NuSelectionMode::kPrecision) {
    return best_precision_over_grid(grid, [&](double nu) {
      return run([&](const ClusterFold&) { return spec.with_nu(nu); });
    });
  }
  return run([&](const ClusterFold& fold) {
    const auto choice = select_nu_silhouette(fold.train.features, k, grid, config.folds, fold.nu_seed, config.max_iter);
    return spec.with_nu(choice.nu);
  });
}

namespace {

std::vector<DataMatrix> held_out_folds(const DataMatrix& data, const std::string& dataset, const BenchConfig& config) {
  std::vector<DataMatrix> out;
  for (std::size_t r = 0; r < config.repeats; ++r) {
    const auto seed = repeat_seed(config, r);
    const auto noisy = with_noise(data, dataset, config, seed);
    const auto plan = split_folds(noisy.rows(), config.folds, stream(seed, "folds/" + dataset));
    for (std::size_t f = 0; f < config.folds; ++f) out.push_back(noisy.select_rows(plan.test_indices(f)));
  }
  return out;
}

FoldScore agglo_fold_score(const DataMatrix& fold, const MetricSpec& spec, Linkage linkage, std::size_t k,
                           std::size_t n_classes) {
  const auto result = agglomerative_fit(fold.features, std::min(k, fold.rows()), spec, linkage);
  auto score = score_fold(aligned(result.labels, *fold.labels, std::max(k, n_classes)), *fold.labels);
  if (spec.kind == MetricKind::kGeneralizedGini) score.nu = spec.nu;
  return score;
}

// nu whose clustering of `fold` has the largest silhouette, ties to the smaller nu.
double agglo_silhouette_nu(const DataMatrix& fold, const MetricSpec& spec, Linkage linkage, std::size_t k,
                           std::span<const double> grid) {
  std::vector<double> scores(grid.size(), -1.0);
  parallel_for(grid.size(), [&](std::size_t v) {
    const auto tuned = spec.with_nu(grid[v]);
    const auto diss = pairwise_dissimilarities(fold.features, tuned);
    const auto labels = build_dendrogram(diss, fold.rows(), linkage).cut(std::min(k, fold.rows()));
    const bool single = std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels[0]; });
    if (!single) scores[v] = silhouette_from_matrix(diss, labels);
  });
  std::size_t best = 0;
  for (std::size_t v = 1; v < grid.size(); ++v) {
    if (scores[v] > scores[best] || (scores[v] == scores[best] && grid[v] < grid[best])) best = v;
  }
  return grid[best];
}

}  // namespace

EvalReport evaluate_agglo(const DataMatrix& data, const std::string& dataset, const MetricSpec& spec, Linkage linkage,
                          const BenchConfig& config) {
  if (!data.has_labels()) throw ConfigError("dataset '" + dataset + "' has no labels");
  const std::size_t k = cluster_count(data, config);
  const auto folds = held_out_folds(data, dataset, config);
  const auto grid = effective_nu_grid(config);

  const auto run = [&](const std::function<MetricSpec(const DataMatrix&)>& spec_for) {
    EvalReport report = empty_report(dataset, spec);
    for (const auto& fold : folds) report.per_fold.push_back(agglo_fold_score(fold, spec_for(fold), linkage, k, data.n_classes));
    aggregate_folds(report);
    return report;
  };

  if (!untuned(spec)) return run([&](const DataMatrix&) { return spec; });
  if (config.nu_selection == NuSelectionMode::kPrecision) {
    return best_precision_over_grid(grid, [&](double nu) {
      return run([&](const DataMatrix&) { return spec.with_nu(nu); });
    });
  }
  return run([&](const DataMatrix& fold) { return spec.with_nu(agglo_silhouette_nu(fold, spec, linkage, k, grid)); });
}

BenchResult run_benchmark(const BenchConfig& config) {
  validate_config(config);
  auto entries = load_manifest(config.manifest);
  if (!config.datasets.empty()) {
    std::vector<DatasetEntry> chosen;
    for (const auto& name : config.datasets) {
      const auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.name == name; });
      if (it == entries.end()) throw ConfigError("dataset '" + name + "' is not in the manifest");
      chosen.push_back(*it);
    }
    std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    entries = std::move(chosen);
  }
  const auto specs = config_metrics(config);

  struct Cell {
    std::size_t dataset;
    MetricSpec spec;
    Linkage linkage;
    std::string label;
  };
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < entries.size(); ++d) {
    for (const auto& spec : specs) cells.push_back({d, spec, config.linkage, to_string(spec)});
    if (config.task == Task::kAgglo && config.ward_baseline) {
      cells.push_back({d, MetricSpec::euclidean(), Linkage::kWard, "euclidean-ward"});
    }
  }

  // Datasets load up front; a load error fails that dataset only.
  std::vector<std::optional<DataMatrix>> data(entries.size());
  std::vector<std::string> errors(entries.size());
  for (std::size_t d = 0; d < entries.size(); ++d) {
    try {
      data[d] = load_dataset(entries[d]);
    } catch (const std::exception& e) {
      errors[d] = e.what();
    }
  }

  std::vector<std::optional<EvalReport>> slots(cells.size());
  std::vector<std::string> cell_errors(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto& cell = cells[c];
    if (!data[cell.dataset]) return;
    const auto& name = entries[cell.dataset].name;
    try {
      switch (config.task) {
        case Task::kKnn:
          slots[c] = evaluate_knn(*data[cell.dataset], name, cell.spec, config);
          break;
        case Task::kKMeans:
          slots[c] = evaluate_kmeans(*data[cell.dataset], name, cell.spec, config);
          break;
        case Task::kAgglo:
          slots[c] = evaluate_agglo(*data[cell.dataset], name, cell.spec, cell.linkage, config);
          break;
      }
      slots[c]->spec = cell.label;
    } catch (const std::exception& e) {
      cell_errors[c] = cell.label + ": " + e.what();
    }
  });
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& err = errors[cells[c].dataset];
    if (!cell_errors[c].empty() && err.empty()) err = cell_errors[c];
  }

  BenchResult result;
  for (std::size_t d = 0; d < entries.size(); ++d) {
    if (!errors[d].empty()) result.failures.push_back({entries[d].name, errors[d]});
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (errors[cells[c].dataset].empty()) result.reports.push_back(*slots[c]);
  }
  return result;
}

nlohmann::json to_json(const BenchResult& result, const BenchConfig& config) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : result.reports) reports.push_back(to_json(r));
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : result.failures) failures.push_back({{"dataset", f.dataset}, {"error", f.message}});
  return {{"config", to_json(config)}, {"reports", reports}, {"failures", failures}};
}

std::string iterations_csv(const std::vector<EvalReport>& reports) {
  std::vector<std::string> metrics;
  std::vector<std::string> datasets;
  std::map<std::pair<std::string, std::string>, double> cell;
  for (const auto& r : reports) {
    if (std::find(metrics.begin(), metrics.end(), r.spec) == metrics.end()) metrics.push_back(r.spec);
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    cell[{r.spec, r.dataset}] = score_of(r, ScoreField::kIterations);
  }
  std::string out = "metric";
  for (const auto& d : datasets) out += "," + d;
  out += ",Mean\n";
  for (const auto& m : metrics) {
    out += m;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& d : datasets) {
      const auto it = cell.find({m, d});
      if (it == cell.end()) {
        out += ",";
        continue;
      }
      out += "," + format_number(it->second);
      total += it->second;
      ++count;
    }
    out += "," + (count ? format_number(total / static_cast<double>(count)) : std::string()) + "\n";
  }
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace

std::vector<fs::path> write_outputs(const BenchConfig& config, const BenchResult& result) {
  fs::create_directories(config.out_dir);
  std::vector<fs::path> written;
  const auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = config.out_dir / name;
    write_text(path, text);
    written.push_back(path);
  };
  emit("reports.json", to_json(result, config).dump(2) + "\n");
  if (!result.reports.empty()) {
    emit("ranking_precision.csv", rank_table_csv(rank_table(result.reports, ScoreField::kPrecision)));
    emit("ranking_recall.csv", rank_table_csv(rank_table(result.reports, ScoreField::kRecall)));
    if (config.task == Task::kKMeans) emit("iterations.csv", iterations_csv(result.reports));
  }
  return written;
}

}  // namespace gini
