#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "photon_discrim/dataset.hpp"
#include "photon_discrim/types.hpp"

namespace photon_discrim {

/// How per-cell error bars are produced. `Figure` follows the published
/// plots: the test pool is partitioned into groups for naive Bayes and
/// trained classifiers are retrained per repetition. The other two values
/// force one convention for every classifier.
enum class ErrorBarConvention { Figure, PartitionTestPool, Retrain };

/// Grid definition for accuracy sweeps. Loaded from JSON (schema 1) or built
/// in code; defaults mirror the standard reproduction grid.
struct SweepConfig {
  std::vector<double> nbar_list{0.40, 0.53, 0.67, 0.77};
  std::vector<int> m_list{10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150, 160};
  std::vector<std::string> classifiers{"adaline", "nb"};
  int n_subsets_per_class = 1000;
  double split_fraction = 0.7;
  int repetitions = 10;
  std::uint64_t master_seed = 1;
  std::string out_dir = ".";
  int workers = 0;  // 0 = hardware concurrency
  ErrorBarConvention error_bars = ErrorBarConvention::Figure;
  SamplingMode sampling_mode = SamplingMode::FreshSubsets;

  // Per-classifier training settings.
  double adaline_eta = 0.01;
  int adaline_epochs = 50;
  int mnn_hidden_width = 10;
  int mnn_epochs = 200;
  double mnn_learning_rate = 0.05;
  int cnn_epochs = 100;
  double cnn_learning_rate = 0.05;
  double net_momentum = 0.9;
};

SweepConfig load_sweep_config(const std::string& path);
void validate(const SweepConfig& config);

struct AccuracyRow {
  std::string classifier;
  double nbar = 0.0;
  int m = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  int repetitions = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

struct AccuracyReport {
  std::vector<AccuracyRow> rows;

  const AccuracyRow* find(const std::string& classifier, double nbar, int m) const;
};

/// Runs every (classifier, nbar, m) cell of the grid, `repetitions` times
/// each, and writes `<out_dir>/report.csv`. Naive Bayes error bars come from
/// partitioning the test pool into `repetitions` groups; trained classifiers
/// are retrained per repetition with derived seeds. Cells run concurrently
/// across `workers` threads; per-cell failures become explicit failure rows
/// and do not abort the sweep.
AccuracyReport run_sweep(const SweepConfig& config);

/// Report CSV with the exact header
/// `classifier,nbar,m,mean_accuracy,std_accuracy,repetitions,seed`.
void write_report_csv(const AccuracyReport& report, const std::string& path);
AccuracyReport parse_report_csv(const std::string& path);

/// Least-squares slope of mean accuracy vs m for one classifier/nbar curve.
double accuracy_slope(const AccuracyReport& report, const std::string& classifier,
                      double nbar);

/// Empirical P(n) for n = 0..max_n from n_measurements samples.
std::vector<double> empirical_pmf(SourceKind source, MeanPhotonNumber nbar,
                                  long long n_measurements, std::uint64_t seed,
                                  int max_n);

/// Total-variation distance between an empirical histogram (exact-n bins
/// plus lumped tail) and the analytic distribution.
double tv_distance_from_analytic(const std::vector<double>& empirical,
                                 SourceKind source, MeanPhotonNumber nbar);

/// Histogram CSV for n = 0..12: empirical and analytic P(n) per source.
void emit_histograms(MeanPhotonNumber nbar, long long n_measurements,
                     std::uint64_t seed, const std::string& csv_path);

/// Feature-space projection CSV (`class,p0,p1,p2`, one row per subset).
void export_projection(MeanPhotonNumber nbar, int m, int n_subsets_per_class,
                       std::uint64_t seed, const std::string& csv_path);

/// Class-separation statistics of the same subsets export_projection writes.
struct ProjectionStats {
  std::array<double, 3> coherent_centroid{};
  std::array<double, 3> thermal_centroid{};
  double centroid_distance = 0.0;
  /// Centroid distance divided by the RMS within-class spread; the scale-free
  /// measure of how visibly the two clusters separate.
  double normalized_separation = 0.0;
};

ProjectionStats projection_stats(MeanPhotonNumber nbar, int m, int n_subsets_per_class,
                                 std::uint64_t seed);

/// Companion gnuplot scripts for the CSV artifacts.
void write_histogram_gnuplot(const std::string& csv_path, const std::string& gp_path);
void write_sweep_gnuplot(const std::string& csv_path, const std::string& gp_path);

/// Shortest round-trip decimal form (std::to_chars); used for all report
/// numbers so equal values always produce identical bytes.
std::string format_double(double value);

}  // namespace photon_discrim
