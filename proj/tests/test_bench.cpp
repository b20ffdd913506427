#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gini/bench.hpp"
#include "gini/error.hpp"
#include "gini/kmeans.hpp"

using namespace gini;
using nlohmann::json;

namespace {

const std::filesystem::path kData = GINI_DATA_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gini_bench_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = bench_config_from_json(json::parse(R"({
    "manifest": "m.json", "datasets": ["iris"], "metrics": ["gini", "euclidean"],
    "task": "kmeans", "folds": 5, "seed": 7, "repeats": 2, "noise": 0.1,
    "k_range": [1, 3], "nu_grid": [0.5, 2], "k_clusters": 4, "linkage": "ward",
    "ward_baseline": true, "objective": "precision", "nu_selection": "precision",
    "ranking": "inductive", "rank_scaling": "unscaled", "max_iter": 50, "out_dir": "x"
  })"));
  CHECK(c.manifest == "m.json");
  CHECK(c.task == Task::kKMeans);
  CHECK(c.folds == 5);
  CHECK(c.seed == 7);
  CHECK(c.repeats == 2);
  CHECK(*c.noise == 0.1);
  CHECK(c.k_range == std::vector<std::size_t>{1, 3});
  CHECK(c.nu_grid == std::vector<double>{0.5, 2.0});
  CHECK(*c.k_clusters == 4);
  CHECK(c.linkage == Linkage::kWard);
  CHECK(c.ward_baseline);
  CHECK(c.objective == Objective::kPrecision);
  CHECK(c.nu_selection == NuSelectionMode::kPrecision);
  CHECK(c.ranking == QueryRanking::kInductive);
  CHECK(c.max_iter == 50);
  CHECK(c.out_dir == "x");
  CHECK_FALSE(to_json(c).contains("out_dir"));
  CHECK(bench_config_from_json(to_json(c)).seed == 7);

  CHECK_THROWS_AS(bench_config_from_json(json::parse(R"({"fold": 3})")), ConfigError);
  CHECK_THROWS_AS(bench_config_from_json(json::parse(R"({"task": "svm"})")), ConfigError);
  CHECK_THROWS_AS(bench_config_from_json(json::parse(R"({"folds": "three"})")), ConfigError);
}

TEST_CASE("config validation") {
  BenchConfig c;
  c.manifest = kData / "manifest.json";
  CHECK_NOTHROW(validate_config(c));
  CHECK(config_metrics(c).size() == 14);
  CHECK(effective_nu_grid(c) == default_nu_grid());

  auto bad = c;
  bad.folds = 1;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = c;
  bad.noise = 1.0;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad.noise = 0.0;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = c;
  bad.k_range = {0, 1};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = c;
  bad.nu_grid = {1.0};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = c;
  bad.metrics = {"gini", "gini"};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = c;
  bad.metrics = {"bogus"};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = c;
  bad.ranking = QueryRanking::kInductive;
  bad.rank_scaling = ConditionalScaling::kScaledPowNu;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  CHECK(parse_rank_scaling("scaled") == ConditionalScaling::kScaledPowNu);
  CHECK_THROWS_AS(parse_rank_scaling("half"), ConfigError);
  bad = c;
  bad.task = Task::kAgglo;
  bad.linkage = Linkage::kWard;
  bad.metrics = {"gini"};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
}

TEST_CASE("small k-means benchmark on iris") {
  BenchConfig c;
  c.manifest = kData / "manifest.json";
  c.datasets = {"iris"};
  c.metrics = {"euclidean", "gini-gen"};
  c.task = Task::kKMeans;
  c.nu_grid = {0.5, 2.0, 4.0};
  const auto result = run_benchmark(c);
  CHECK(result.failures.empty());
  REQUIRE(result.reports.size() == 2);
  for (const auto& r : result.reports) {
    CHECK(r.dataset == "iris");
    CHECK(r.per_fold.size() == 3);
    CHECK(r.iterations);
    CHECK(r.precision > 0.5);
  }
  REQUIRE(result.reports[1].nu);
  CHECK(std::find(c.nu_grid.begin(), c.nu_grid.end(), *result.reports[1].nu) != c.nu_grid.end());

  const auto t = rank_table(result.reports, ScoreField::kPrecision);
  CHECK(t.metrics.size() == 2);
  CHECK(t.datasets == std::vector<std::string>{"iris"});

  const auto out1 = scratch("a");
  const auto out2 = scratch("b");
  c.out_dir = out1;
  const auto files = write_outputs(c, result);
  CHECK(files.size() == 4);
  c.out_dir = out2;
  write_outputs(c, run_benchmark(c));
  for (const auto* name : {"reports.json", "ranking_precision.csv", "ranking_recall.csv", "iterations.csv"}) {
    CAPTURE(name);
    CHECK(slurp(out1 / name) == slurp(out2 / name));
    CHECK_FALSE(slurp(out1 / name).empty());
  }
  const auto csv = slurp(out1 / "ranking_precision.csv");
  CHECK(csv.rfind("metric,iris,Rank\n", 0) == 0);
}

TEST_CASE("a broken dataset is recorded and skipped") {
  const auto dir = scratch("broken");
  std::filesystem::copy_file(kData / "iris.csv", dir / "iris.csv");
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "a,b,class\n1,2,0\n3,oops,1\n";
    std::ofstream m(dir / "manifest.json");
    m << R"({"iris": {"path": "iris.csv", "label_col": "class", "n_classes": 3, "has_header": true},
             "bad": {"path": "bad.csv", "label_col": "class", "n_classes": 2, "has_header": true}})";
  }
  BenchConfig c;
  c.manifest = dir / "manifest.json";
  c.metrics = {"euclidean"};
  c.k_range = {1, 3};
  const auto result = run_benchmark(c);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].dataset == "bad");
  REQUIRE(result.reports.size() == 1);
  CHECK(result.reports[0].dataset == "iris");
  CHECK(result.reports[0].k);
  const auto j = to_json(result, c);
  CHECK(j["failures"][0]["dataset"] == "bad");
}

TEST_CASE("agglomerative benchmark with the ward row") {
  BenchConfig c;
  c.manifest = kData / "manifest.json";
  c.datasets = {"iris"};
  c.metrics = {"euclidean", "gini"};
  c.task = Task::kAgglo;
  c.ward_baseline = true;
  const auto result = run_benchmark(c);
  CHECK(result.failures.empty());
  REQUIRE(result.reports.size() == 3);
  CHECK(result.reports[2].spec == "euclidean-ward");
  for (const auto& r : result.reports) CHECK(r.precision > 0.4);
}
