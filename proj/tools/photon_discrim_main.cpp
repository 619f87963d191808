// Command-line front end: simulation, trace round-trips, accuracy sweeps,
// feature-space projections and single-model train/classify workflows.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "photon_discrim/classifiers.hpp"
#include "photon_discrim/dataset.hpp"
#include "photon_discrim/neural_nets.hpp"
#include "photon_discrim/photon_stats.hpp"
#include "photon_discrim/rng.hpp"
#include "photon_discrim/sweep.hpp"
#include "photon_discrim/trace_sim.hpp"

namespace pd = photon_discrim;

namespace {

constexpr const char* kSeedEnv = "PHOTON_DISCRIM_SEED";

struct SimulateArgs {
  double nbar = 0.0;
  long long n = 1000000;
  std::uint64_t seed = 1;
  std::string out;
  bool gnuplot = false;
};

struct TraceArgs {
  std::string source = "thermal";
  double nbar = 0.77;
  int bins = 1000;
  std::uint64_t seed = 1;
  std::string out;
  double noise_sigma = 0.02;
  double threshold = pd::kDefaultThreshold;
};

struct SweepArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir;
  std::string classifiers;
  int subsets = 0;
  int reps = 0;
  int workers = -1;
  bool gnuplot = false;
};

struct ProjectArgs {
  double nbar = 0.0;
  int m = 60;
  int subsets = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

struct TrainArgs {
  std::string classifier;
  double nbar = 0.0;
  int m = 0;
  int subsets = 1000;
  double split = 0.7;
  std::string sampling = "fresh";
  std::uint64_t seed = 1;
  std::string out;
  double eta = 0.01;
  int epochs = -1;
  int hidden = 10;
};

struct ClassifyArgs {
  std::string model_path;
  std::string data_path;
  std::string labels_path;
  std::string out;
};

int run_simulate(const SimulateArgs& args) {
  pd::emit_histograms(pd::MeanPhotonNumber(args.nbar), args.n, args.seed, args.out);
  if (args.gnuplot) pd::write_histogram_gnuplot(args.out, args.out + ".gp");
  std::cout << "wrote " << args.out << " (" << args.n << " measurements per source, nbar="
            << pd::format_double(args.nbar) << ")\n";
  return 0;
}

int run_trace(const TraceArgs& args) {
  const pd::SourceKind source = pd::source_kind_from_string(args.source);
  const pd::MeanPhotonNumber nbar(args.nbar);
  const auto counts = pd::sample_counts(source, nbar, static_cast<std::size_t>(args.bins),
                                        pd::derive_seed(args.seed, 0x7261u));
  pd::PulseShape pulse;
  pulse.noise_sigma = args.noise_sigma;
  const auto trace = pd::synthesize_trace(counts, pulse, pd::kDefaultSamplePeriod,
                                          pd::derive_seed(args.seed, 0x7452u));
  const auto recovered = pd::count_photons(trace, args.threshold);

  std::size_t mismatches = 0;
  int total_photons = 0;
  for (std::size_t i = 0; i < counts.counts.size(); ++i) {
    if (counts.counts[i] != recovered.counts[i]) ++mismatches;
    total_photons += counts.counts[i];
  }
  if (!args.out.empty()) {
    if (args.out.size() >= 4 && args.out.substr(args.out.size() - 4) == ".csv") {
      pd::write_trace_csv(trace, args.out);
    } else {
      pd::write_trace(trace, args.out);
    }
    std::cout << "wrote " << args.out << "\n";
  }
  std::cout << "synthesized " << args.bins << " bins (" << total_photons << " photons, "
            << pd::to_string(source) << ", nbar=" << pd::format_double(args.nbar)
            << "), threshold " << pd::format_double(args.threshold) << " V\n"
            << "round trip: " << (counts.counts.size() - mismatches) << "/" << args.bins
            << " bins recovered exactly\n";
  return mismatches == 0 ? 0 : 1;
}

int run_sweep_cmd(const SweepArgs& args) {
  pd::SweepConfig config;
  if (!args.config_path.empty()) config = pd::load_sweep_config(args.config_path);
  if (args.seed_given) config.master_seed = args.seed;
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (!args.classifiers.empty()) {
    config.classifiers.clear();
    std::string item;
    for (char c : args.classifiers + ",") {
      if (c == ',') {
        if (!item.empty()) config.classifiers.push_back(item);
        item.clear();
      } else {
        item += c;
      }
    }
  }
  if (args.subsets > 0) config.n_subsets_per_class = args.subsets;
  if (args.reps > 0) config.repetitions = args.reps;
  if (args.workers >= 0) config.workers = args.workers;

  const pd::AccuracyReport report = pd::run_sweep(config);
  const std::string csv = config.out_dir + "/report.csv";
  if (args.gnuplot) pd::write_sweep_gnuplot(csv, csv + ".gp");
  std::size_t failed = 0;
  for (const auto& row : report.rows) failed += row.failed ? 1 : 0;
  std::cout << "wrote " << csv << " (" << report.rows.size() << " cells";
  if (failed > 0) std::cout << ", " << failed << " failed";
  std::cout << ")\n";
  return 0;
}

int run_project(const ProjectArgs& args) {
  pd::export_projection(pd::MeanPhotonNumber(args.nbar), args.m, args.subsets, args.seed,
                        args.out);
  const auto stats =
      pd::projection_stats(pd::MeanPhotonNumber(args.nbar), args.m, args.subsets, args.seed);
  std::cout << "wrote " << args.out << "\ncentroid distance "
            << pd::format_double(stats.centroid_distance) << ", normalized separation "
            << pd::format_double(stats.normalized_separation) << "\n";
  return 0;
}

int run_train(const TrainArgs& args) {
  pd::CollectionOptions opts;
  opts.n_subsets_per_class = args.subsets;
  opts.split_fraction = args.split;
  if (args.sampling == "pool") {
    opts.mode = pd::SamplingMode::PartitionPool;
  } else if (args.sampling != "fresh") {
    throw pd::ConfigError("unknown sampling mode: " + args.sampling);
  }
  auto [train, test] =
      pd::build_collection(pd::MeanPhotonNumber(args.nbar), args.m, opts, args.seed);

  double train_acc = 0.0;
  double test_acc = 0.0;
  if (args.classifier == "adaline") {
    pd::AdalineOptions a;
    a.learning_rate = args.eta;
    a.max_epochs = args.epochs > 0 ? args.epochs : 50;
    const auto model = pd::adaline_train(train, a, args.seed);
    pd::save_adaline(model, args.out);
    train_acc = pd::evaluate_adaline(model, train);
    test_acc = pd::evaluate_adaline(model, test);
  } else if (args.classifier == "nb") {
    const auto model = pd::nb_model(pd::MeanPhotonNumber(args.nbar));
    pd::save_nb(model, args.out);
    train_acc = pd::evaluate_nb(model, train);
    test_acc = pd::evaluate_nb(model, test);
  } else if (args.classifier == "mnn") {
    pd::MnnOptions o;
    o.hidden_width = args.hidden;
    o.max_epochs = args.epochs > 0 ? args.epochs : 200;
    const auto model = pd::mnn_train(train, o, args.seed);
    pd::save_mnn(model, args.out);
    auto acc = [&](const pd::SubsetCollection& col) {
      std::vector<pd::SourceKind> pred, truth;
      for (const auto& s : col.subsets) {
        pred.push_back(pd::mnn_predict(model, s.features).label);
        truth.push_back(*s.features.label);
      }
      return pd::evaluate(pred, truth);
    };
    train_acc = acc(train);
    test_acc = acc(test);
  } else if (args.classifier == "cnn") {
    pd::CnnOptions o;
    o.max_epochs = args.epochs > 0 ? args.epochs : 100;
    const auto model = pd::cnn_train(train, o, args.seed);
    pd::save_cnn(model, args.out);
    auto acc = [&](const pd::SubsetCollection& col) {
      std::vector<pd::SourceKind> pred, truth;
      for (const auto& s : col.subsets) {
        pred.push_back(pd::cnn_predict(model, s.features).label);
        truth.push_back(*s.features.label);
      }
      return pd::evaluate(pred, truth);
    };
    train_acc = acc(train);
    test_acc = acc(test);
  } else {
    throw pd::ConfigError("unknown classifier: " + args.classifier);
  }
  std::cout << "saved " << args.classifier << " model to " << args.out << "\ntrain accuracy "
            << pd::format_double(train_acc) << ", test accuracy "
            << pd::format_double(test_acc) << "\n";
  return 0;
}

int run_classify(const ClassifyArgs& args) {
  const std::string type = pd::model_type(args.model_path);
  auto subsets = pd::load_raw_counts(args.data_path);
  if (subsets.empty()) throw pd::ConfigError("no subsets found in " + args.data_path);

  std::vector<pd::SourceKind> predictions;
  predictions.reserve(subsets.size());
  if (type == "adaline") {
    const auto model = pd::load_adaline(args.model_path);
    for (const auto& s : subsets) predictions.push_back(pd::adaline_predict(model, s.features));
  } else if (type == "nb") {
    const auto model = pd::load_nb(args.model_path);
    for (const auto& s : subsets) predictions.push_back(pd::nb_classify(s.counts, model).label);
  } else if (type == "mnn") {
    const auto model = pd::load_mnn(args.model_path);
    for (const auto& s : subsets) predictions.push_back(pd::mnn_predict(model, s.features).label);
  } else if (type == "cnn") {
    const auto model = pd::load_cnn(args.model_path);
    for (const auto& s : subsets) predictions.push_back(pd::cnn_predict(model, s.features).label);
  } else {
    throw pd::ConfigError("unrecognized model type \"" + type + "\" in " + args.model_path);
  }

  if (!args.out.empty()) {
    std::ofstream os(args.out, std::ios::binary);
    if (!os) throw pd::IoError("cannot open predictions file for writing: " + args.out);
    os << "subset_id,prediction\n";
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      os << subsets[i].id << ',' << pd::to_string(predictions[i]) << '\n';
    }
    if (!os) throw pd::IoError("failed writing predictions: " + args.out);
    std::cout << "wrote " << args.out << "\n";
  } else {
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      std::cout << subsets[i].id << ',' << pd::to_string(predictions[i]) << '\n';
    }
  }

  if (!args.labels_path.empty()) {
    const auto labels = pd::load_labels(args.labels_path);
    std::size_t correct = 0, matched = 0;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      for (const auto& [id, kind] : labels) {
        if (id == subsets[i].id) {
          ++matched;
          if (kind == predictions[i]) ++correct;
          break;
        }
      }
    }
    if (matched == 0) throw pd::ConfigError("no subset ids from " + args.data_path +
                                            " found in " + args.labels_path);
    std::cout << "accuracy " << pd::format_double(static_cast<double>(correct) / matched)
              << " over " << matched << " labelled subsets\n";
  }
  return 0;
}

void add_seed_option(CLI::App* cmd, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "master random seed")->envname(kSeedEnv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coherent/thermal light discrimination toolkit"};
  app.require_subcommand(1);

  SimulateArgs simulate;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "sample photon counts and write a histogram CSV (simulated vs analytic)");
  sim_cmd->add_option("--nbar", simulate.nbar, "mean photon number")->required();
  sim_cmd->add_option("--n", simulate.n, "measurements per source");
  add_seed_option(sim_cmd, simulate.seed);
  sim_cmd->add_option("--out", simulate.out, "output CSV path")->required();
  sim_cmd->add_flag("--gnuplot", simulate.gnuplot, "also write a gnuplot script");

  TraceArgs trace;
  auto* trace_cmd = app.add_subcommand(
      "trace", "synthesize a detector voltage trace and count it back");
  trace_cmd->add_option("--source", trace.source, "coherent or thermal");
  trace_cmd->add_option("--nbar", trace.nbar, "mean photon number");
  trace_cmd->add_option("--bins", trace.bins, "number of 1 us bins")->check(CLI::PositiveNumber);
  add_seed_option(trace_cmd, trace.seed);
  trace_cmd->add_option("--out", trace.out, "trace output (.ptrc binary or .csv)");
  trace_cmd->add_option("--noise-sigma", trace.noise_sigma, "additive noise sigma (V)");
  trace_cmd->add_option("--threshold", trace.threshold, "counting threshold (V)");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "run the accuracy sweep grid");
  sweep_cmd->add_option("--config", sweep.config_path, "sweep config JSON (schema 1)");
  auto* sweep_seed =
      sweep_cmd->add_option("--seed", sweep.seed, "master random seed")->envname(kSeedEnv);
  sweep_cmd->add_option("--out", sweep.out_dir, "output directory");
  sweep_cmd->add_option("--classifiers", sweep.classifiers,
                        "comma-separated subset of adaline,nb,mnn,cnn");
  sweep_cmd->add_option("--subsets", sweep.subsets, "subsets per class");
  sweep_cmd->add_option("--reps", sweep.reps, "repetitions per cell");
  sweep_cmd->add_option("--workers", sweep.workers, "worker threads (0 = hardware)");
  sweep_cmd->add_flag("--gnuplot", sweep.gnuplot, "also write a gnuplot script");

  ProjectArgs project;
  auto* proj_cmd = app.add_subcommand(
      "project", "export the (P0,P1,P2) feature-space projection");
  proj_cmd->add_option("--nbar", project.nbar, "mean photon number")->required();
  proj_cmd->add_option("--m", project.m, "data points per subset")->check(CLI::PositiveNumber);
  proj_cmd->add_option("--subsets", project.subsets, "subsets per class");
  add_seed_option(proj_cmd, project.seed);
  proj_cmd->add_option("--out", project.out, "output CSV path")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train one classifier and save it as JSON");
  train_cmd->add_option("--classifier", train.classifier, "adaline, nb, mnn or cnn")->required();
  train_cmd->add_option("--nbar", train.nbar, "mean photon number")->required();
  train_cmd->add_option("--m", train.m, "data points per subset")->required()->check(CLI::PositiveNumber);
  train_cmd->add_option("--subsets", train.subsets, "subsets per class");
  train_cmd->add_option("--split", train.split, "train fraction");
  train_cmd->add_option("--sampling", train.sampling, "fresh (default) or pool partitioning");
  add_seed_option(train_cmd, train.seed);
  train_cmd->add_option("--out", train.out, "model JSON path")->required();
  train_cmd->add_option("--eta", train.eta, "adaline learning rate");
  train_cmd->add_option("--epochs", train.epochs, "training epochs (classifier default if omitted)");
  train_cmd->add_option("--hidden", train.hidden, "MNN hidden width");

  ClassifyArgs classify;
  auto* cls_cmd = app.add_subcommand("classify", "classify raw-count subsets with a saved model");
  cls_cmd->add_option("--model", classify.model_path, "model JSON path")->required();
  cls_cmd->add_option("--data", classify.data_path, "raw counts CSV (subset_id,bin_index,count)")
      ->required();
  cls_cmd->add_option("--labels", classify.labels_path,
                      "feature CSV with class labels (reports accuracy)");
  cls_cmd->add_option("--out", classify.out, "predictions CSV path");

  try {
    app.parse(argc, argv);
    sweep.seed_given = sweep_seed->count() > 0 || std::getenv(kSeedEnv) != nullptr;
    if (sim_cmd->parsed()) return run_simulate(simulate);
    if (trace_cmd->parsed()) return run_trace(trace);
    if (sweep_cmd->parsed()) return run_sweep_cmd(sweep);
    if (proj_cmd->parsed()) return run_project(project);
    if (train_cmd->parsed()) return run_train(train);
    if (cls_cmd->parsed()) return run_classify(classify);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const pd::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const pd::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
