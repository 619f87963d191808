#include "photon_discrim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "photon_discrim/classifiers.hpp"
#include "photon_discrim/dataset.hpp"
#include "photon_discrim/neural_nets.hpp"
#include "photon_discrim/photon_stats.hpp"
#include "photon_discrim/rng.hpp"

namespace photon_discrim {

namespace {

constexpr std::uint64_t kCellStream = 0xCE11u;
constexpr std::uint64_t kRepStream = 0x4E45u;
constexpr std::uint64_t kHistStream = 0x4849u;
constexpr std::uint64_t kProjStream = 0x505au;

std::uint64_t classifier_tag(const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_and_sample_std(const std::vector<double>& values) {
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

CollectionOptions collection_options(const SweepConfig& config) {
  CollectionOptions opts;
  opts.n_subsets_per_class = config.n_subsets_per_class;
  opts.split_fraction = config.split_fraction;
  opts.mode = config.sampling_mode;
  return opts;
}

// Per-subset correctness of one classifier over the test split; trains on
// the train split when the classifier needs it.
std::vector<bool> classify_cell(const SweepConfig& config, const std::string& classifier,
                                double nbar, int m, std::uint64_t seed) {
  auto [train, test] = build_collection(MeanPhotonNumber(nbar), m,
                                        collection_options(config), seed);
  std::vector<bool> correct;
  correct.reserve(test.subsets.size());
  auto record = [&](auto&& predict) {
    for (const Subset& s : test.subsets) correct.push_back(predict(s) == *s.features.label);
  };
  if (classifier == "nb") {
    const NaiveBayesModel model = nb_model(MeanPhotonNumber(nbar));
    record([&](const Subset& s) { return nb_classify(s.counts, model).label; });
  } else if (classifier == "adaline") {
    AdalineOptions o;
    o.learning_rate = config.adaline_eta;
    o.max_epochs = config.adaline_epochs;
    const AdalineModel model = adaline_train(train, o, seed);
    record([&](const Subset& s) { return adaline_predict(model, s.features); });
  } else if (classifier == "mnn") {
    MnnOptions o;
    o.hidden_width = config.mnn_hidden_width;
    o.max_epochs = config.mnn_epochs;
    o.learning_rate = config.mnn_learning_rate;
    o.momentum = config.net_momentum;
    const MnnModel model = mnn_train(train, o, seed);
    record([&](const Subset& s) { return mnn_predict(model, s.features).label; });
  } else if (classifier == "cnn") {
    CnnOptions o;
    o.max_epochs = config.cnn_epochs;
    o.learning_rate = config.cnn_learning_rate;
    o.momentum = config.net_momentum;
    const CnnModel model = cnn_train(train, o, seed);
    record([&](const Subset& s) { return cnn_predict(model, s.features).label; });
  } else {
    throw ConfigError("unknown classifier: " + classifier);
  }
  return correct;
}

// Error bars by splitting one test pool into `groups` equal parts.
MeanStd partition_groups(const std::vector<bool>& correct, int groups) {
  if (static_cast<int>(correct.size()) < groups) {
    throw ConfigError("test pool smaller than the number of error-bar groups");
  }
  std::vector<double> accs(groups, 0.0);
  std::vector<int> sizes(groups, 0);
  for (std::size_t i = 0; i < correct.size(); ++i) {
    const int g = static_cast<int>(i * groups / correct.size());
    accs[g] += correct[i] ? 1.0 : 0.0;
    ++sizes[g];
  }
  for (int g = 0; g < groups; ++g) accs[g] /= sizes[g];
  return mean_and_sample_std(accs);
}

// Error bars from independently repeated generate/train/test stages.
MeanStd repeated_stages(const SweepConfig& config, const std::string& classifier,
                        double nbar, int m, std::uint64_t cell_seed) {
  std::vector<double> accs(config.repetitions);
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const auto correct = classify_cell(config, classifier, nbar, m,
                                       derive_seed(cell_seed, kRepStream, rep));
    double acc = 0.0;
    for (bool c : correct) acc += c ? 1.0 : 0.0;
    accs[rep] = acc / static_cast<double>(correct.size());
  }
  return mean_and_sample_std(accs);
}

MeanStd evaluate_cell(const SweepConfig& config, const std::string& classifier,
                      double nbar, int m, std::uint64_t cell_seed) {
  bool partition;
  switch (config.error_bars) {
    case ErrorBarConvention::PartitionTestPool:
      partition = true;
      break;
    case ErrorBarConvention::Retrain:
      partition = false;
      break;
    case ErrorBarConvention::Figure:
    default:
      partition = classifier == "nb";  // Fig. 4 vs Fig. 5 conventions
      break;
  }
  if (partition) {
    return partition_groups(classify_cell(config, classifier, nbar, m,
                                          derive_seed(cell_seed, kRepStream, 0)),
                            config.repetitions);
  }
  return repeated_stages(config, classifier, nbar, m, cell_seed);
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open sweep config: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed sweep config " + path + ": " + e.what());
  }
  if (j.value("schema", 1) != 1) {
    throw ConfigError("unsupported sweep config schema in " + path);
  }
  SweepConfig config;
  if (j.contains("nbar_list")) j.at("nbar_list").get_to(config.nbar_list);
  if (j.contains("m_list")) j.at("m_list").get_to(config.m_list);
  if (j.contains("classifiers")) j.at("classifiers").get_to(config.classifiers);
  config.n_subsets_per_class = j.value("n_subsets_per_class", config.n_subsets_per_class);
  config.split_fraction = j.value("split_fraction", config.split_fraction);
  config.repetitions = j.value("repetitions", config.repetitions);
  config.master_seed = j.value("master_seed", config.master_seed);
  config.out_dir = j.value("out_dir", config.out_dir);
  config.workers = j.value("workers", config.workers);
  if (j.contains("adaline")) {
    config.adaline_eta = j["adaline"].value("eta", config.adaline_eta);
    config.adaline_epochs = j["adaline"].value("epochs", config.adaline_epochs);
  }
  if (j.contains("mnn")) {
    config.mnn_hidden_width = j["mnn"].value("hidden_width", config.mnn_hidden_width);
    config.mnn_epochs = j["mnn"].value("epochs", config.mnn_epochs);
    config.mnn_learning_rate = j["mnn"].value("learning_rate", config.mnn_learning_rate);
  }
  if (j.contains("cnn")) {
    config.cnn_epochs = j["cnn"].value("epochs", config.cnn_epochs);
    config.cnn_learning_rate = j["cnn"].value("learning_rate", config.cnn_learning_rate);
  }
  if (j.contains("error_bars")) {
    const std::string name = j["error_bars"].get<std::string>();
    if (name == "figure") {
      config.error_bars = ErrorBarConvention::Figure;
    } else if (name == "partition") {
      config.error_bars = ErrorBarConvention::PartitionTestPool;
    } else if (name == "retrain") {
      config.error_bars = ErrorBarConvention::Retrain;
    } else {
      throw ConfigError("unknown error_bars convention: " + name);
    }
  }
  if (j.contains("sampling_mode")) {
    const std::string name = j["sampling_mode"].get<std::string>();
    if (name == "fresh") {
      config.sampling_mode = SamplingMode::FreshSubsets;
    } else if (name == "pool") {
      config.sampling_mode = SamplingMode::PartitionPool;
    } else {
      throw ConfigError("unknown sampling_mode: " + name);
    }
  }
  validate(config);
  return config;
}

void validate(const SweepConfig& config) {
  if (config.nbar_list.empty() || config.m_list.empty() || config.classifiers.empty()) {
    throw ConfigError("sweep config lists must be non-empty");
  }
  if (config.repetitions < 2) {
    throw ConfigError("repetitions must be >= 2 (error bars need spread)");
  }
  for (double nbar : config.nbar_list) {
    MeanPhotonNumber check(nbar);
    (void)check;
  }
  for (int m : config.m_list) {
    if (m < 1) throw ConfigError("subset sizes must be >= 1");
  }
  static const std::vector<std::string> known{"adaline", "nb", "mnn", "cnn"};
  for (const std::string& c : config.classifiers) {
    if (std::find(known.begin(), known.end(), c) == known.end()) {
      throw ConfigError("unknown classifier in config: " + c);
    }
  }
}

const AccuracyRow* AccuracyReport::find(const std::string& classifier, double nbar,
                                        int m) const {
  for (const AccuracyRow& row : rows) {
    if (row.classifier == classifier && row.m == m && std::abs(row.nbar - nbar) < 1e-12) {
      return &row;
    }
  }
  return nullptr;
}

AccuracyReport run_sweep(const SweepConfig& config) {
  validate(config);

  struct Cell {
    std::string classifier;
    double nbar;
    int m;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  std::vector<std::string> names = config.classifiers;
  std::sort(names.begin(), names.end());
  std::vector<double> nbars = config.nbar_list;
  std::sort(nbars.begin(), nbars.end());
  std::vector<int> ms = config.m_list;
  std::sort(ms.begin(), ms.end());
  for (const std::string& c : names) {
    for (double nbar : nbars) {
      for (int m : ms) {
        cells.push_back({c, nbar, m,
                         derive_seed(config.master_seed, kCellStream ^ classifier_tag(c),
                                     std::bit_cast<std::uint64_t>(nbar),
                                     static_cast<std::uint64_t>(m))});
      }
    }
  }

  AccuracyReport report;
  report.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      AccuracyRow row;
      row.classifier = cell.classifier;
      row.nbar = cell.nbar;
      row.m = cell.m;
      row.repetitions = config.repetitions;
      row.seed = cell.seed;
      try {
        const MeanStd result =
            evaluate_cell(config, cell.classifier, cell.nbar, cell.m, cell.seed);
        row.mean_accuracy = result.mean;
        row.std_accuracy = result.std;
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
        row.mean_accuracy = std::numeric_limits<double>::quiet_NaN();
        row.std_accuracy = std::numeric_limits<double>::quiet_NaN();
      }
      report.rows[i] = std::move(row);
    }
  };

  int n_workers = config.workers > 0 ? config.workers
                                     : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(cells.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  write_report_csv(report, config.out_dir + "/report.csv");
  return report;
}

void write_report_csv(const AccuracyReport& report, const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!os) throw IoError("cannot open report for writing: " + path);
  os << "classifier,nbar,m,mean_accuracy,std_accuracy,repetitions,seed\n";
  for (const AccuracyRow& row : report.rows) {
    os << row.classifier << ',' << format_double(row.nbar) << ',' << row.m << ','
       << format_double(row.mean_accuracy) << ',' << format_double(row.std_accuracy) << ','
       << row.repetitions << ',' << row.seed << '\n';
  }
  if (!os) throw IoError("failed writing report: " + path);
}

AccuracyReport parse_report_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open report: " + path);
  std::string line;
  if (!std::getline(is, line) ||
      line != "classifier,nbar,m,mean_accuracy,std_accuracy,repetitions,seed") {
    throw IoError("unexpected report header in " + path);
  }
  AccuracyReport report;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    AccuracyRow row;
    auto next_field = [&]() {
      if (!std::getline(ss, field, ',')) throw IoError("malformed report row in " + path);
      return field;
    };
    row.classifier = next_field();
    row.nbar = std::stod(next_field());
    row.m = std::stoi(next_field());
    row.mean_accuracy = std::stod(next_field());
    row.std_accuracy = std::stod(next_field());
    row.repetitions = std::stoi(next_field());
    row.seed = std::stoull(next_field());
    row.failed = std::isnan(row.mean_accuracy);
    report.rows.push_back(std::move(row));
  }
  return report;
}

double accuracy_slope(const AccuracyReport& report, const std::string& classifier,
                      double nbar) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const AccuracyRow& row : report.rows) {
    if (row.classifier != classifier || std::abs(row.nbar - nbar) > 1e-12 || row.failed) continue;
    sx += row.m;
    sy += row.mean_accuracy;
    sxx += static_cast<double>(row.m) * row.m;
    sxy += row.m * row.mean_accuracy;
    ++n;
  }
  if (n < 2) throw std::domain_error("accuracy_slope needs at least two points");
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

std::vector<double> empirical_pmf(SourceKind source, MeanPhotonNumber nbar,
                                  long long n_measurements, std::uint64_t seed,
                                  int max_n) {
  if (n_measurements < 1) throw std::domain_error("n_measurements must be >= 1");
  Rng rng(seed);
  std::vector<double> freq(static_cast<std::size_t>(max_n) + 1, 0.0);
  const double p_success = 1.0 / (nbar.value() + 1.0);
  for (long long i = 0; i < n_measurements; ++i) {
    const int n = source == SourceKind::Coherent ? rng.poisson(nbar.value())
                                                 : rng.geometric(p_success);
    if (n <= max_n) freq[n] += 1.0;
  }
  for (double& f : freq) f /= static_cast<double>(n_measurements);
  return freq;
}

double tv_distance_from_analytic(const std::vector<double>& empirical,
                                 SourceKind source, MeanPhotonNumber nbar) {
  double tv = 0.0;
  double emp_head = 0.0;
  double ana_head = 0.0;
  for (std::size_t n = 0; n < empirical.size(); ++n) {
    const double ana = pmf(source, static_cast<int>(n), nbar);
    tv += std::abs(empirical[n] - ana);
    emp_head += empirical[n];
    ana_head += ana;
  }
  tv += std::abs((1.0 - emp_head) - (1.0 - ana_head));  // lumped tail
  return 0.5 * tv;
}

void emit_histograms(MeanPhotonNumber nbar, long long n_measurements,
                     std::uint64_t seed, const std::string& csv_path) {
  constexpr int kMaxN = 12;
  const auto emp_coh = empirical_pmf(SourceKind::Coherent, nbar, n_measurements,
                                     derive_seed(seed, kHistStream, 0), kMaxN);
  const auto emp_th = empirical_pmf(SourceKind::Thermal, nbar, n_measurements,
                                    derive_seed(seed, kHistStream, 1), kMaxN);
  std::ofstream os(csv_path, std::ios::binary);
  if (!os) throw IoError("cannot open histogram CSV for writing: " + csv_path);
  os << "n,empirical_coherent,analytic_coherent,empirical_thermal,analytic_thermal\n";
  for (int n = 0; n <= kMaxN; ++n) {
    os << n << ',' << format_double(emp_coh[n]) << ','
       << format_double(coherent_pmf(n, nbar)) << ',' << format_double(emp_th[n]) << ','
       << format_double(thermal_pmf(n, nbar)) << '\n';
  }
  if (!os) throw IoError("failed writing histogram CSV: " + csv_path);
}

namespace {

std::vector<std::array<double, 3>> projection_points(SourceKind source,
                                                     MeanPhotonNumber nbar, int m,
                                                     int n_subsets, std::uint64_t seed) {
  std::vector<std::array<double, 3>> points(n_subsets);
  const std::uint64_t tag = source == SourceKind::Coherent ? 0 : 1;
  for (int i = 0; i < n_subsets; ++i) {
    const auto counts = sample_counts(
        source, nbar, static_cast<std::size_t>(m),
        derive_seed(seed, kProjStream, tag, static_cast<std::uint64_t>(i)));
    const FeatureVector fv = featurize(counts);
    points[i] = {fv.probs[0], fv.probs[1], fv.probs[2]};
  }
  return points;
}

}  // namespace

void export_projection(MeanPhotonNumber nbar, int m, int n_subsets_per_class,
                       std::uint64_t seed, const std::string& csv_path) {
  if (n_subsets_per_class < 1) throw ConfigError("n_subsets_per_class must be >= 1");
  std::ofstream os(csv_path, std::ios::binary);
  if (!os) throw IoError("cannot open projection CSV for writing: " + csv_path);
  os << "class,p0,p1,p2\n";
  for (SourceKind source : {SourceKind::Coherent, SourceKind::Thermal}) {
    for (const auto& p : projection_points(source, nbar, m, n_subsets_per_class, seed)) {
      os << to_string(source) << ',' << format_double(p[0]) << ',' << format_double(p[1])
         << ',' << format_double(p[2]) << '\n';
    }
  }
  if (!os) throw IoError("failed writing projection CSV: " + csv_path);
}

ProjectionStats projection_stats(MeanPhotonNumber nbar, int m, int n_subsets_per_class,
                                 std::uint64_t seed) {
  if (n_subsets_per_class < 2) throw ConfigError("n_subsets_per_class must be >= 2");
  ProjectionStats stats;
  double spread_sq = 0.0;
  std::array<double, 3>* centroids[2] = {&stats.coherent_centroid, &stats.thermal_centroid};
  int idx = 0;
  for (SourceKind source : {SourceKind::Coherent, SourceKind::Thermal}) {
    const auto points = projection_points(source, nbar, m, n_subsets_per_class, seed);
    std::array<double, 3>& centroid = *centroids[idx++];
    for (const auto& p : points) {
      for (int k = 0; k < 3; ++k) centroid[k] += p[k];
    }
    for (int k = 0; k < 3; ++k) centroid[k] /= points.size();
    double trace = 0.0;
    for (const auto& p : points) {
      for (int k = 0; k < 3; ++k) trace += (p[k] - centroid[k]) * (p[k] - centroid[k]);
    }
    spread_sq += trace / points.size();
  }
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double diff = stats.coherent_centroid[k] - stats.thermal_centroid[k];
    d2 += diff * diff;
  }
  stats.centroid_distance = std::sqrt(d2);
  stats.normalized_separation = stats.centroid_distance / std::sqrt(0.5 * spread_sq);
  return stats;
}

void write_histogram_gnuplot(const std::string& csv_path, const std::string& gp_path) {
  std::ofstream os(gp_path);
  if (!os) throw IoError("cannot open gnuplot script for writing: " + gp_path);
  os << "set datafile separator ','\n"
        "set style data histograms\n"
        "set style fill solid 0.6\n"
        "set xlabel 'photon number n'\n"
        "set ylabel 'P(n)'\n"
        "plot '" << csv_path << "' using 2:xtic(1) title 'coherent (sim)', \\\n"
        "     '' using 3 with linespoints title 'coherent (theory)', \\\n"
        "     '' using 4 title 'thermal (sim)', \\\n"
        "     '' using 5 with linespoints title 'thermal (theory)'\n";
  if (!os) throw IoError("failed writing gnuplot script: " + gp_path);
}

void write_sweep_gnuplot(const std::string& csv_path, const std::string& gp_path) {
  std::ofstream os(gp_path);
  if (!os) throw IoError("cannot open gnuplot script for writing: " + gp_path);
  os << "set datafile separator ','\n"
        "set xlabel 'data points per subset (m)'\n"
        "set ylabel 'accuracy'\n"
        "set key bottom right\n"
        "# one curve per (classifier, nbar); filter rows with awk, e.g.:\n"
        "#   plot \"< awk -F, '$1==\\\"nb\\\" && $2==0.4' " << csv_path
     << "\" using 3:4:5 with yerrorlines title 'nb, nbar=0.4'\n"
        "plot '" << csv_path << "' using 3:4 with points title 'all cells'\n";
  if (!os) throw IoError("failed writing gnuplot script: " + gp_path);
}

}  // namespace photon_discrim
