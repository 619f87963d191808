#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "photon_discrim/sweep.hpp"

using namespace photon_discrim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

SweepConfig tiny_config(const fs::path& out_dir) {
  SweepConfig config;
  config.nbar_list = {0.77};
  config.m_list = {10, 20};
  config.classifiers = {"nb", "adaline"};
  config.n_subsets_per_class = 60;
  config.repetitions = 2;
  config.master_seed = 5;
  config.out_dir = out_dir.string();
  config.workers = 1;
  return config;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("sweep config validation catches malformed settings") {
  CHECK_THROWS_AS(load_sweep_config("/nonexistent/sweep.json"), ConfigError);
  try {
    load_sweep_config("/nonexistent/sweep.json");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/sweep.json") != std::string::npos);
  }

  const auto dir = fresh_dir("pd_sweep_cfg");
  auto write_cfg = [&](const nlohmann::json& j) {
    const auto path = dir / "cfg.json";
    std::ofstream(path) << j.dump();
    return path.string();
  };
  CHECK_THROWS_AS(load_sweep_config(write_cfg({{"schema", 2}})), ConfigError);
  CHECK_THROWS_AS(load_sweep_config(write_cfg({{"classifiers", {"svm"}}})), ConfigError);
  CHECK_THROWS_AS(load_sweep_config(write_cfg({{"repetitions", 1}})), ConfigError);
  CHECK_THROWS_AS(load_sweep_config(write_cfg({{"m_list", nlohmann::json::array()}})),
                  ConfigError);
  CHECK_THROWS_AS(load_sweep_config(write_cfg({{"nbar_list", {-0.4}}})), std::domain_error);

  const auto good = write_cfg({{"schema", 1},
                               {"nbar_list", {0.4}},
                               {"m_list", {10}},
                               {"classifiers", {"nb"}},
                               {"n_subsets_per_class", 50},
                               {"repetitions", 3},
                               {"master_seed", 9},
                               {"adaline", {{"eta", 0.05}, {"epochs", 20}}}});
  const auto config = load_sweep_config(good);
  CHECK(config.nbar_list == std::vector<double>{0.4});
  CHECK(config.repetitions == 3);
  CHECK(config.master_seed == 9);
  CHECK(config.adaline_eta == 0.05);
  CHECK(config.adaline_epochs == 20);
  fs::remove_all(dir);
}

TEST_CASE("run_sweep writes canonical rows and is worker-count independent") {
  const auto dir1 = fresh_dir("pd_sweep_a");
  auto config = tiny_config(dir1);
  const auto report = run_sweep(config);

  REQUIRE(report.rows.size() == 4);
  // Canonical order: classifier, then nbar, then m.
  CHECK(report.rows[0].classifier == "adaline");
  CHECK(report.rows[0].m == 10);
  CHECK(report.rows[1].classifier == "adaline");
  CHECK(report.rows[1].m == 20);
  CHECK(report.rows[2].classifier == "nb");
  CHECK(report.rows[3].classifier == "nb");
  for (const auto& row : report.rows) {
    CHECK(!row.failed);
    CHECK(row.mean_accuracy >= 0.0);
    CHECK(row.mean_accuracy <= 1.0);
    CHECK(row.std_accuracy >= 0.0);
    CHECK(row.repetitions == 2);
  }

  const std::string bytes1 = slurp(dir1 / "report.csv");
  CHECK(bytes1.rfind("classifier,nbar,m,mean_accuracy,std_accuracy,repetitions,seed\n", 0) == 0);

  // Same seed, more workers: byte-identical output.
  const auto dir2 = fresh_dir("pd_sweep_b");
  auto config2 = tiny_config(dir2);
  config2.workers = 3;
  run_sweep(config2);
  CHECK(slurp(dir2 / "report.csv") == bytes1);

  // Different master seed changes the bytes.
  const auto dir3 = fresh_dir("pd_sweep_c");
  auto config3 = tiny_config(dir3);
  config3.master_seed = 6;
  run_sweep(config3);
  CHECK(slurp(dir3 / "report.csv") != bytes1);

  fs::remove_all(dir1);
  fs::remove_all(dir2);
  fs::remove_all(dir3);
}

TEST_CASE("reports round trip through CSV exactly") {
  const auto dir = fresh_dir("pd_sweep_rt");
  auto config = tiny_config(dir);
  const auto report = run_sweep(config);
  const auto parsed = parse_report_csv((dir / "report.csv").string());
  REQUIRE(parsed.rows.size() == report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(parsed.rows[i].classifier == report.rows[i].classifier);
    CHECK(parsed.rows[i].nbar == report.rows[i].nbar);
    CHECK(parsed.rows[i].m == report.rows[i].m);
    CHECK(parsed.rows[i].mean_accuracy == report.rows[i].mean_accuracy);
    CHECK(parsed.rows[i].std_accuracy == report.rows[i].std_accuracy);
    CHECK(parsed.rows[i].repetitions == report.rows[i].repetitions);
    CHECK(parsed.rows[i].seed == report.rows[i].seed);
  }
  fs::remove_all(dir);
}

TEST_CASE("per-cell failures become explicit rows without aborting the sweep") {
  const auto dir = fresh_dir("pd_sweep_fail");
  auto config = tiny_config(dir);
  config.n_subsets_per_class = 10;  // test pool of 6 per cell
  config.repetitions = 7;           // more groups than test subsets -> nb cells fail
  const auto report = run_sweep(config);
  REQUIRE(report.rows.size() == 4);
  int failed = 0;
  for (const auto& row : report.rows) {
    if (row.failed) {
      ++failed;
      CHECK(row.classifier == "nb");
      CHECK(std::isnan(row.mean_accuracy));
      CHECK(!row.error.empty());
    }
  }
  CHECK(failed == 2);

  // Failure rows survive the CSV round trip as NaNs.
  const auto parsed = parse_report_csv((dir / "report.csv").string());
  int parsed_failed = 0;
  for (const auto& row : parsed.rows) parsed_failed += row.failed ? 1 : 0;
  CHECK(parsed_failed == 2);
  fs::remove_all(dir);
}

TEST_CASE("error-bar conventions are selectable and alter only the spread") {
  const auto dir = fresh_dir("pd_sweep_conv");
  auto config = tiny_config(dir);
  config.m_list = {20};
  config.classifiers = {"adaline", "nb"};
  config.repetitions = 3;

  config.error_bars = ErrorBarConvention::PartitionTestPool;
  const auto partitioned = run_sweep(config);
  config.error_bars = ErrorBarConvention::Retrain;
  const auto retrained = run_sweep(config);
  REQUIRE(partitioned.rows.size() == 2);
  REQUIRE(retrained.rows.size() == 2);
  for (const auto& rows : {partitioned.rows, retrained.rows}) {
    for (const auto& row : rows) {
      CHECK(!row.failed);
      CHECK(row.std_accuracy >= 0.0);
    }
  }
  // The two conventions evaluate different draws, so the adaline cells must
  // actually differ somewhere.
  CHECK((partitioned.rows[0].mean_accuracy != retrained.rows[0].mean_accuracy ||
         partitioned.rows[0].std_accuracy != retrained.rows[0].std_accuracy));

  // JSON spellings of both knobs parse.
  const auto cfg_path = dir / "conv.json";
  std::ofstream(cfg_path) << R"({"schema":1,"error_bars":"retrain","sampling_mode":"pool"})";
  const auto parsed = load_sweep_config(cfg_path.string());
  CHECK(parsed.error_bars == ErrorBarConvention::Retrain);
  CHECK(parsed.sampling_mode == SamplingMode::PartitionPool);
  std::ofstream(cfg_path) << R"({"schema":1,"error_bars":"bogus"})";
  CHECK_THROWS_AS(load_sweep_config(cfg_path.string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("find and accuracy_slope read the report") {
  AccuracyReport report;
  for (int i = 0; i < 4; ++i) {
    AccuracyRow row;
    row.classifier = "nb";
    row.nbar = 0.4;
    row.m = 10 * (i + 1);
    row.mean_accuracy = 0.6 + 0.05 * i;  // exact slope 0.005 per unit m
    report.rows.push_back(row);
  }
  CHECK(report.find("nb", 0.4, 20) != nullptr);
  CHECK(report.find("nb", 0.4, 50) == nullptr);
  CHECK(report.find("adaline", 0.4, 10) == nullptr);
  CHECK(accuracy_slope(report, "nb", 0.4) == doctest::Approx(0.005).epsilon(1e-12));
  CHECK_THROWS_AS(accuracy_slope(report, "adaline", 0.4), std::domain_error);
}

TEST_CASE("histogram CSV carries 13 rows and seed-independent analytic columns") {
  const auto dir = fresh_dir("pd_hist");
  const auto path_a = (dir / "h7.csv").string();
  const auto path_b = (dir / "h8.csv").string();
  emit_histograms(MeanPhotonNumber(0.77), 2000, 7, path_a);
  emit_histograms(MeanPhotonNumber(0.77), 2000, 8, path_b);

  std::ifstream a(path_a), b(path_b);
  std::string line_a, line_b;
  std::getline(a, line_a);
  CHECK(line_a == "n,empirical_coherent,analytic_coherent,empirical_thermal,analytic_thermal");
  std::getline(b, line_b);
  int rows = 0;
  bool empirical_differs = false;
  while (std::getline(a, line_a) && std::getline(b, line_b)) {
    ++rows;
    auto split = [](const std::string& s) {
      std::vector<std::string> out;
      std::string field;
      for (char ch : s + ",") {
        if (ch == ',') {
          out.push_back(field);
          field.clear();
        } else {
          field += ch;
        }
      }
      return out;
    };
    const auto fa = split(line_a), fb = split(line_b);
    REQUIRE(fa.size() == 5);
    CHECK(fa[2] == fb[2]);  // analytic columns are pure functions of nbar
    CHECK(fa[4] == fb[4]);
    empirical_differs = empirical_differs || fa[1] != fb[1] || fa[3] != fb[3];
  }
  CHECK(rows == 13);
  CHECK(empirical_differs);
  fs::remove_all(dir);
}

TEST_CASE("tiny-sample histograms are multiples of the counting resolution") {
  const auto emp = empirical_pmf(SourceKind::Thermal, MeanPhotonNumber(0.77), 10, 3, 12);
  for (double p : emp) {
    CHECK(std::abs(p * 10.0 - std::round(p * 10.0)) < 1e-12);
  }
}

TEST_CASE("projection exports rows whose truncated features stay sub-normalized") {
  const auto dir = fresh_dir("pd_proj");
  const auto path = (dir / "proj.csv").string();
  export_projection(MeanPhotonNumber(0.77), 60, 50, 4, path);
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line == "class,p0,p1,p2");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const auto c3 = line.find(',', c2 + 1);
    const double p0 = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const double p1 = std::stod(line.substr(c2 + 1, c3 - c2 - 1));
    const double p2 = std::stod(line.substr(c3 + 1));
    CHECK(p0 + p1 + p2 <= 1.0 + 1e-12);
    CHECK(p0 >= 0.0);
  }
  CHECK(rows == 100);
  fs::remove_all(dir);
}

TEST_CASE("class separation grows with nbar and with subset size") {
  // Fig. 6 direction: larger nbar separates the clusters at fixed M.
  const auto low = projection_stats(MeanPhotonNumber(0.40), 60, 400, 11);
  const auto high = projection_stats(MeanPhotonNumber(0.77), 60, 400, 11);
  CHECK(high.centroid_distance > low.centroid_distance);
  CHECK(high.normalized_separation > low.normalized_separation);

  // Fig. 7 direction: larger M tightens the clusters at fixed nbar.
  const auto small_m = projection_stats(MeanPhotonNumber(0.77), 10, 400, 12);
  const auto large_m = projection_stats(MeanPhotonNumber(0.77), 600, 400, 12);
  CHECK(large_m.normalized_separation > small_m.normalized_separation);
}

TEST_CASE("gnuplot companions are written next to their CSVs") {
  const auto dir = fresh_dir("pd_gp");
  const auto csv = (dir / "h.csv").string();
  emit_histograms(MeanPhotonNumber(0.53), 100, 2, csv);
  write_histogram_gnuplot(csv, csv + ".gp");
  write_sweep_gnuplot(csv, csv + ".sweep.gp");
  CHECK(fs::exists(csv + ".gp"));
  CHECK(fs::exists(csv + ".sweep.gp"));
  CHECK(slurp(csv + ".gp").find(csv) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("format_double emits shortest round-trip forms") {
  CHECK(format_double(0.4) == "0.4");
  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(0.8858333333333335)) == 0.8858333333333335);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}
