#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gini/agglomerative.hpp"
#include "gini/bench.hpp"
#include "gini/error.hpp"
#include "gini/eval.hpp"
#include "gini/kmeans.hpp"
#include "gini/knn.hpp"
#include "gini/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitDatasetFailure = 1;
constexpr int kExitConfig = 2;

gini::LabelColumn label_column(const std::string& text) {
  if (text.empty() || text == "none") return std::monostate{};
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
  if (ec == std::errc{} && ptr == text.data() + text.size()) return index;
  return text;
}

struct CsvFlags {
  std::string label_col = "class";
  bool no_header = false;

  gini::CsvOptions options() const { return {label_column(label_col), !no_header}; }
};

void add_csv_flags(CLI::App* app, CsvFlags& flags) {
  app->add_option("--label-col", flags.label_col, "Label column name or zero-based index; 'none' for unlabeled data")
      ->capture_default_str();
  app->add_flag("--no-header", flags.no_header, "The CSV has no header row");
}

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw gini::ConfigError("cannot write " + out);
  file << text;
}

json scores_json(std::span<const int> pred, std::span<const int> truth) {
  const auto r = gini::classification_report(pred, truth);
  return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
}

json matrix_json(const gini::Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

// Aligned scores for a clustering of labeled data.
json cluster_scores(const gini::DataMatrix& data, const std::vector<int>& labels, std::size_t k) {
  const auto& truth = *data.labels;
  const std::size_t width = std::max(k, data.n_classes);
  const auto perm = gini::hungarian_align(labels, truth, width);
  return scores_json(gini::apply_alignment(labels, perm), truth);
}

std::vector<std::size_t> parse_k_range(const std::string& text) {
  std::vector<std::size_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto lo = std::stoul(text.substr(0, dots));
    const auto hi = std::stoul(text.substr(dots + 2));
    if (lo == 0 || hi < lo) throw gini::ConfigError("invalid k range '" + text + "'");
    for (auto k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-based dissimilarities for KNN, k-means and agglomerative clustering"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "Cross-validated benchmark over a dataset manifest");
  std::string config_path;
  std::string manifest, task, noise, k_range, linkage, objective, nu_selection, ranking, rank_scaling, out_dir;
  std::vector<std::string> metrics, datasets;
  std::vector<double> nu_grid;
  std::size_t folds = 0, repeats = 0, k_clusters = 0, max_iter = 0;
  std::uint64_t seed = 0;
  bool ward_baseline = false;
  bench->add_option("--config", config_path, "JSON config; flags given on the command line override it");
  bench->add_option("--manifest", manifest, "Dataset manifest (JSON)");
  bench->add_option("--task", task, "knn, kmeans or agglo");
  bench->add_option("--metrics", metrics, "Metric specs, e.g. euclidean,gini,gini-gen:nu=2.5")->delimiter(',');
  bench->add_option("--datasets", datasets, "Subset of manifest datasets")->delimiter(',');
  bench->add_option("--folds", folds, "Cross-validation folds");
  bench->add_option("--seed", seed, "Base seed");
  bench->add_option("--repeats", repeats, "Protocol repeats with seeds seed, seed+1, ...");
  bench->add_option("--noise", noise, "Fraction of rows receiving N(0,1) noise");
  bench->add_option("--k-range", k_range, "KNN neighbor counts, '1..11' or '1,3,5'");
  bench->add_option("--nu-grid", nu_grid, "nu values for the generalized Gini prametric")->delimiter(',');
  bench->add_option("--k-clusters", k_clusters, "Cluster count (default: class count)");
  bench->add_option("--linkage", linkage, "average or ward");
  bench->add_flag("--ward-baseline", ward_baseline, "Add a Euclidean Ward row to agglo runs");
  bench->add_option("--objective", objective, "KNN grid objective: f1, precision or recall");
  bench->add_option("--nu-selection", nu_selection, "Clustering nu selection: silhouette, or precision (scored on the test folds, optimistic)");
  bench->add_option("--ranking", ranking, "Query ranking for Gini KNN: pooled or inductive");
  bench->add_option("--rank-scaling", rank_scaling, "Pooled query ranks: unscaled or scaled");
  bench->add_option("--max-iter", max_iter, "k-means iteration cap");
  bench->add_option("--out-dir", out_dir, "Output directory (default: $GINI_OUT_DIR or ./out)");

  // knn
  auto* knn = app.add_subcommand("knn", "Fit KNN on a training CSV and label a test CSV");
  std::string knn_train, knn_test, knn_metric = "euclidean", knn_ranking = "pooled", knn_scaling = "unscaled", knn_out;
  std::size_t knn_k = 5;
  CsvFlags knn_csv;
  knn->add_option("--train", knn_train, "Training CSV")->required();
  knn->add_option("--test", knn_test, "Query CSV (labels optional)")->required();
  knn->add_option("--metric", knn_metric, "Metric spec")->capture_default_str();
  knn->add_option("-k", knn_k, "Neighbor count")->capture_default_str();
  knn->add_option("--ranking", knn_ranking, "pooled or inductive")->capture_default_str();
  knn->add_option("--rank-scaling", knn_scaling, "Pooled query ranks: unscaled or scaled")->capture_default_str();
  knn->add_option("--out", knn_out, "Output JSON file (default: stdout)");
  add_csv_flags(knn, knn_csv);

  // kmeans
  auto* km = app.add_subcommand("kmeans", "Cluster a CSV with k-means");
  std::string km_data, km_metric = "euclidean", km_out;
  std::size_t km_k = 3, km_max_iter = 300;
  std::uint64_t km_seed = 0;
  CsvFlags km_csv;
  km->add_option("--data", km_data, "Input CSV")->required();
  km->add_option("--metric", km_metric, "Metric spec; an untuned gini-gen picks nu by silhouette")
      ->capture_default_str();
  km->add_option("-k", km_k, "Cluster count")->capture_default_str();
  km->add_option("--seed", km_seed, "Seed for k-means++")->capture_default_str();
  km->add_option("--max-iter", km_max_iter, "Iteration cap")->capture_default_str();
  km->add_option("--out", km_out, "Output JSON file (default: stdout)");
  add_csv_flags(km, km_csv);

  // agglo
  auto* ag = app.add_subcommand("agglo", "Agglomerative clustering of a CSV");
  std::string ag_data, ag_metric = "euclidean", ag_linkage = "average", ag_out;
  std::size_t ag_k = 3;
  CsvFlags ag_csv;
  ag->add_option("--data", ag_data, "Input CSV")->required();
  ag->add_option("--metric", ag_metric, "Metric spec (needs nu for gini-gen)")->capture_default_str();
  ag->add_option("-k", ag_k, "Cluster count")->capture_default_str();
  ag->add_option("--linkage", ag_linkage, "average or ward")->capture_default_str();
  ag->add_option("--out", ag_out, "Output JSON file (default: stdout)");
  add_csv_flags(ag, ag_csv);

  // rank-table
  auto* rt = app.add_subcommand("rank-table", "Rank metrics from saved reports.json files");
  std::vector<std::string> rt_inputs;
  std::string rt_field = "precision", rt_out;
  int rt_decimals = -1;
  rt->add_option("reports", rt_inputs, "reports.json files")->required();
  rt->add_option("--field", rt_field, "precision, recall, f1 or iterations")->capture_default_str();
  rt->add_option("--decimals", rt_decimals, "Round scores to this many decimals before ranking");
  rt->add_option("--out", rt_out, "Output CSV file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) {
      gini::BenchConfig config;
      bool config_sets_out_dir = false;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw gini::ConfigError("cannot read config " + config_path);
        json j;
        try {
          j = json::parse(in);
        } catch (const json::parse_error& e) {
          throw gini::ConfigError("config " + config_path + " is not valid JSON: " + e.what());
        }
        config = gini::bench_config_from_json(j);
        config_sets_out_dir = j.contains("out_dir");
        if (!config.manifest.empty() && config.manifest.is_relative()) {
          config.manifest = fs::path(config_path).parent_path() / config.manifest;
        }
      }
      if (bench->count("--manifest")) config.manifest = manifest;
      if (bench->count("--task")) config.task = gini::parse_task(task);
      if (bench->count("--metrics")) config.metrics = metrics;
      if (bench->count("--datasets")) config.datasets = datasets;
      if (bench->count("--folds")) config.folds = folds;
      if (bench->count("--seed")) config.seed = seed;
      if (bench->count("--repeats")) config.repeats = repeats;
      if (bench->count("--noise")) config.noise = std::stod(noise);
      if (bench->count("--k-range")) config.k_range = parse_k_range(k_range);
      if (bench->count("--nu-grid")) config.nu_grid = nu_grid;
      if (bench->count("--k-clusters")) config.k_clusters = k_clusters;
      if (bench->count("--linkage")) config.linkage = gini::parse_linkage(linkage);
      if (ward_baseline) config.ward_baseline = true;
      if (bench->count("--objective")) config.objective = gini::parse_objective(objective);
      if (bench->count("--nu-selection")) config.nu_selection = gini::parse_nu_selection(nu_selection);
      if (bench->count("--ranking")) {
        config.ranking = ranking == "inductive" ? gini::QueryRanking::kInductive : gini::QueryRanking::kPooled;
        if (ranking != "inductive" && ranking != "pooled") throw gini::ConfigError("unknown ranking '" + ranking + "'");
      }
      if (bench->count("--rank-scaling")) config.rank_scaling = gini::parse_rank_scaling(rank_scaling);
      if (bench->count("--max-iter")) config.max_iter = max_iter;
      if (bench->count("--out-dir")) {
        config.out_dir = out_dir;
      } else if (const char* env = std::getenv("GINI_OUT_DIR"); env && *env && !config_sets_out_dir) {
        config.out_dir = env;
      }

      const auto result = gini::run_benchmark(config);
      const auto written = gini::write_outputs(config, result);
      for (const auto& path : written) std::cerr << "wrote " << path.string() << "\n";
      for (const auto& f : result.failures) std::cerr << "dataset " << f.dataset << " failed: " << f.message << "\n";
      return result.failures.empty() ? 0 : kExitDatasetFailure;
    }

    if (knn->parsed()) {
      const auto train = gini::load_csv(knn_train, knn_csv.options());
      const auto test = gini::load_csv(knn_test, knn_csv.options());
      const auto spec = gini::parse_metric(knn_metric);
      if (knn_ranking != "inductive" && knn_ranking != "pooled") {
        throw gini::ConfigError("unknown ranking '" + knn_ranking + "'");
      }
      const auto mode = knn_ranking == "inductive" ? gini::QueryRanking::kInductive : gini::QueryRanking::kPooled;
      const auto scaling = gini::parse_rank_scaling(knn_scaling);
      if (scaling != gini::ConditionalScaling::kUnscaled && mode != gini::QueryRanking::kPooled) {
        throw gini::ConfigError("--rank-scaling scaled applies to pooled ranking only");
      }
      const auto model = gini::knn_fit(train, spec, knn_k, mode, scaling);
      const auto pred = gini::knn_predict(model, test);
      json out = {{"metric", gini::to_string(spec)}, {"k", knn_k}, {"predictions", pred}};
      if (test.has_labels()) out["scores"] = scores_json(pred, *test.labels);
      emit(out, knn_out);
      return 0;
    }

    if (km->parsed()) {
      const auto data = gini::load_csv(km_data, km_csv.options());
      auto spec = gini::parse_metric(km_metric);
      const auto init_seed = gini::derive_seed(km_seed, "init");
      json out;
      if (spec.kind == gini::MetricKind::kGeneralizedGini && !spec.nu) {
        const auto grid = gini::default_nu_grid();
        const auto choice = gini::select_nu_silhouette(data.features, km_k, grid, 3, gini::derive_seed(km_seed, "nu"),
                                                       km_max_iter);
        spec = spec.with_nu(choice.nu);
        out["nu_scores"] = choice.scores;
      }
      const auto init = gini::kmeanspp_init(data.features, km_k, gini::MetricSpec::euclidean(), init_seed);
      const auto model = gini::kmeans_fit(data.features, km_k, spec, init, km_max_iter);
      out["metric"] = gini::to_string(spec);
      out["k"] = km_k;
      out["labels"] = model.labels;
      out["centroids"] = matrix_json(model.centroids);
      out["iterations"] = model.iterations;
      out["converged"] = model.converged;
      out["objective_trace"] = model.objective_trace;
      if (data.has_labels()) out["scores"] = cluster_scores(data, model.labels, km_k);
      emit(out, km_out);
      return 0;
    }

    if (ag->parsed()) {
      const auto data = gini::load_csv(ag_data, ag_csv.options());
      const auto spec = gini::parse_metric(ag_metric);
      const auto result = gini::agglomerative_fit(data.features, ag_k, spec, gini::parse_linkage(ag_linkage));
      json out = {{"metric", gini::to_string(spec)},
                  {"linkage", ag_linkage},
                  {"k", ag_k},
                  {"labels", result.labels},
                  {"dendrogram", gini::to_json(result.dendrogram)}};
      if (data.has_labels()) out["scores"] = cluster_scores(data, result.labels, ag_k);
      emit(out, ag_out);
      return 0;
    }

    if (rt->parsed()) {
      std::vector<gini::EvalReport> reports;
      for (const auto& path : rt_inputs) {
        std::ifstream in(path);
        if (!in) throw gini::ConfigError("cannot read " + path);
        const auto j = json::parse(in);
        for (const auto& r : j.at("reports")) reports.push_back(gini::eval_report_from_json(r));
      }
      gini::ScoreField field;
      if (rt_field == "precision") {
        field = gini::ScoreField::kPrecision;
      } else if (rt_field == "recall") {
        field = gini::ScoreField::kRecall;
      } else if (rt_field == "f1") {
        field = gini::ScoreField::kF1;
      } else if (rt_field == "iterations") {
        field = gini::ScoreField::kIterations;
      } else {
        throw gini::ConfigError("unknown field '" + rt_field + "'");
      }
      const auto decimals = rt_decimals >= 0 ? std::optional<int>(rt_decimals) : std::nullopt;
      const auto csv = gini::rank_table_csv(gini::rank_table(reports, field, decimals));
      if (rt_out.empty() || rt_out == "-") {
        std::cout << csv;
      } else {
        std::ofstream file(rt_out, std::ios::binary);
        file << csv;
      }
      return 0;
    }
  } catch (const gini::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gini::IngestError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
