#include "photon_discrim/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "photon_discrim/photon_stats.hpp"
#include "photon_discrim/rng.hpp"

namespace photon_discrim {

namespace {

std::array<double, kFeatureDim> rescale(const AdalineModel& model,
                                        const std::array<double, kFeatureDim>& x) {
  std::array<double, kFeatureDim> out;
  for (int k = 0; k < kFeatureDim; ++k) {
    out[k] = (x[k] - model.input_offset[k]) * model.input_scale[k];
  }
  return out;
}

// Per-feature map of the training range onto [-1,1]; constant features map
// to zero. Stored in the model so prediction applies the same transform.
void fit_input_scaling(const SubsetCollection& train, std::array<double, kFeatureDim>& offset,
                       std::array<double, kFeatureDim>& scale) {
  std::array<double, kFeatureDim> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const Subset& s : train.subsets) {
    for (int k = 0; k < kFeatureDim; ++k) {
      lo[k] = std::min(lo[k], s.features.probs[k]);
      hi[k] = std::max(hi[k], s.features.probs[k]);
    }
  }
  for (int k = 0; k < kFeatureDim; ++k) {
    if (hi[k] > lo[k]) {
      offset[k] = 0.5 * (lo[k] + hi[k]);
      scale[k] = 2.0 / (hi[k] - lo[k]);
    } else {
      offset[k] = lo[k];
      scale[k] = 1.0;
    }
  }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform() * i);
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
  return idx;
}

void check_balanced_nonempty(const SubsetCollection& train, const char* who) {
  if (train.subsets.empty()) throw std::domain_error(std::string(who) + ": empty training collection");
  std::size_t coherent = 0;
  for (const Subset& s : train.subsets) {
    if (!s.features.label) throw std::domain_error(std::string(who) + ": unlabelled training subset");
    if (*s.features.label == SourceKind::Coherent) ++coherent;
  }
  if (2 * coherent != train.subsets.size()) {
    throw std::domain_error(std::string(who) + ": training collection is not class-balanced");
  }
}

}  // namespace

void adaline_delta_update(std::array<double, kFeatureDim>& weights, double& bias,
                          const std::array<double, kFeatureDim>& x, double target,
                          double eta) {
  double y = bias;
  for (int k = 0; k < kFeatureDim; ++k) y += weights[k] * x[k];
  const double err = target - y;
  for (int k = 0; k < kFeatureDim; ++k) weights[k] += eta * err * x[k];
  bias += eta * err;
}

AdalineModel adaline_train(const SubsetCollection& train, const AdalineOptions& options,
                           std::uint64_t seed) {
  check_balanced_nonempty(train, "adaline_train");
  if (options.learning_rate <= 0.0) throw std::domain_error("learning rate must be > 0");

  AdalineModel model;
  model.learning_rate = options.learning_rate;
  model.nbar = train.nbar;
  model.m = train.m;
  model.seed = seed;
  if (options.scale_inputs) fit_input_scaling(train, model.input_offset, model.input_scale);

  Rng rng(seed);
  if (options.random_init) {
    for (double& w : model.weights) w = 0.02 * rng.uniform() - 0.01;
    model.bias = 0.02 * rng.uniform() - 0.01;
  }

  std::vector<std::array<double, kFeatureDim>> inputs;
  std::vector<double> targets;
  inputs.reserve(train.subsets.size());
  targets.reserve(train.subsets.size());
  for (const Subset& s : train.subsets) {
    inputs.push_back(rescale(model, s.features.probs));
    targets.push_back(adaline_target(*s.features.label));
  }

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    const auto order = shuffled_indices(inputs.size(), rng);
    for (std::size_t i : order) {
      adaline_delta_update(model.weights, model.bias, inputs[i], targets[i],
                           options.learning_rate);
    }
    bool finite = std::isfinite(model.bias);
    for (double w : model.weights) finite = finite && std::isfinite(w);
    if (!finite) {
      throw TrainingError("adaline training diverged at epoch " + std::to_string(epoch + 1) +
                          " with learning rate " + std::to_string(options.learning_rate));
    }
    model.epochs_trained = epoch + 1;
  }
  return model;
}

std::vector<EtaSweepEntry> adaline_eta_sweep(const SubsetCollection& train,
                                             const SubsetCollection& test,
                                             const std::vector<double>& learning_rates,
                                             int max_epochs, std::uint64_t seed) {
  if (learning_rates.empty()) throw std::domain_error("eta sweep needs at least one rate");
  std::vector<EtaSweepEntry> entries;
  entries.reserve(learning_rates.size());
  for (double eta : learning_rates) {
    AdalineOptions options;
    options.learning_rate = eta;
    options.max_epochs = max_epochs;
    const AdalineModel model = adaline_train(train, options, seed);
    entries.push_back({eta, evaluate_adaline(model, test)});
  }
  return entries;
}

double adaline_activation(const AdalineModel& model, const FeatureVector& x) {
  const auto scaled = rescale(model, x.probs);
  double y = model.bias;
  for (int k = 0; k < kFeatureDim; ++k) y += model.weights[k] * scaled[k];
  return y;
}

SourceKind adaline_predict(const AdalineModel& model, const FeatureVector& x) {
  return adaline_activation(model, x) >= 0.0 ? SourceKind::Coherent : SourceKind::Thermal;
}

NaiveBayesModel nb_model(MeanPhotonNumber nbar, double class_prior) {
  if (class_prior <= 0.0 || class_prior >= 1.0) {
    throw std::domain_error("class prior must lie in (0,1)");
  }
  return NaiveBayesModel{nbar.value(), class_prior};
}

NaiveBayesModel nb_model_from_data(const SubsetCollection& train, double class_prior) {
  check_balanced_nonempty(train, "nb_model_from_data");
  double total = 0.0;
  std::size_t n = 0;
  for (const Subset& s : train.subsets) {
    for (int c : s.counts.counts) total += c;
    n += s.counts.counts.size();
  }
  if (total <= 0.0) throw std::domain_error("cannot estimate nbar from an all-vacuum pool");
  return nb_model(MeanPhotonNumber(total / static_cast<double>(n)), class_prior);
}

NbResult nb_classify(const PhotonCountSequence& counts, const NaiveBayesModel& model) {
  if (counts.counts.empty()) throw std::domain_error("nb_classify requires a non-empty sequence");
  const MeanPhotonNumber nbar(model.nbar);
  double log_coh = std::log(model.class_prior);
  double log_th = std::log1p(-model.class_prior);
  for (int c : counts.counts) {
    log_coh += log_coherent_pmf(c, nbar);
    log_th += log_thermal_pmf(c, nbar);
  }
  if (!std::isfinite(log_coh) || !std::isfinite(log_th)) {
    throw TrainingError("naive Bayes log-posterior accumulation went non-finite");
  }
  // Both pmfs are strictly positive for every count, so the only degenerate
  // case is an exact tie, which goes to Thermal.
  if (log_coh > log_th) return {SourceKind::Coherent, log_coh - log_th};
  return {SourceKind::Thermal, log_th - log_coh};
}

double evaluate(const std::vector<SourceKind>& predictions,
                const std::vector<SourceKind>& labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw std::domain_error("evaluate requires equal-length non-empty prediction/label lists");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double evaluate_adaline(const AdalineModel& model, const SubsetCollection& test) {
  std::vector<SourceKind> pred, truth;
  pred.reserve(test.subsets.size());
  truth.reserve(test.subsets.size());
  for (const Subset& s : test.subsets) {
    pred.push_back(adaline_predict(model, s.features));
    truth.push_back(*s.features.label);
  }
  return evaluate(pred, truth);
}

double evaluate_nb(const NaiveBayesModel& model, const SubsetCollection& test) {
  std::vector<SourceKind> pred, truth;
  pred.reserve(test.subsets.size());
  truth.reserve(test.subsets.size());
  for (const Subset& s : test.subsets) {
    pred.push_back(nb_classify(s.counts, model).label);
    truth.push_back(*s.features.label);
  }
  return evaluate(pred, truth);
}

void save_adaline(const AdalineModel& model, const std::string& path) {
  nlohmann::json j{{"type", "adaline"},
                   {"weights", model.weights},
                   {"bias", model.bias},
                   {"eta", model.learning_rate},
                   {"epochs", model.epochs_trained},
                   {"nbar", model.nbar},
                   {"m", model.m},
                   {"seed", model.seed},
                   {"input_offset", model.input_offset},
                   {"input_scale", model.input_scale}};
  std::ofstream os(path);
  if (!os) throw IoError("cannot open model file for writing: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing model file: " + path);
}

AdalineModel load_adaline(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed model JSON in " + path + ": " + e.what());
  }
  if (j.value("type", "") != "adaline") {
    throw ConfigError("model file " + path + " is not an adaline model");
  }
  AdalineModel model;
  j.at("weights").get_to(model.weights);
  model.bias = j.at("bias").get<double>();
  model.learning_rate = j.value("eta", 0.0);
  model.epochs_trained = j.value("epochs", 0);
  model.nbar = j.value("nbar", 0.0);
  model.m = j.value("m", 0);
  model.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("input_offset")) j.at("input_offset").get_to(model.input_offset);
  if (j.contains("input_scale")) j.at("input_scale").get_to(model.input_scale);
  return model;
}

void save_nb(const NaiveBayesModel& model, const std::string& path) {
  nlohmann::json j{{"type", "nb"}, {"nbar", model.nbar}, {"prior", model.class_prior}};
  std::ofstream os(path);
  if (!os) throw IoError("cannot open model file for writing: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing model file: " + path);
}

NaiveBayesModel load_nb(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed model JSON in " + path + ": " + e.what());
  }
  if (j.value("type", "") != "nb") {
    throw ConfigError("model file " + path + " is not a naive Bayes model");
  }
  return NaiveBayesModel{j.at("nbar").get<double>(), j.value("prior", 0.5)};
}

}  // namespace photon_discrim
