#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "photon_discrim/dataset.hpp"
#include "photon_discrim/types.hpp"

namespace photon_discrim {

/// Single linear neuron: y = w.x + b with identity activation, thresholded
/// at zero for prediction. Labels are encoded Coherent -> +1, Thermal -> -1.
/// `input_offset`/`input_scale` hold the per-feature affine rescaling fitted
/// on the training data (identity when trained without scaling).
struct AdalineModel {
  std::array<double, kFeatureDim> weights{};
  double bias = 0.0;
  double learning_rate = 0.0;
  int epochs_trained = 0;
  std::array<double, kFeatureDim> input_offset{};
  std::array<double, kFeatureDim> input_scale{1, 1, 1, 1, 1, 1, 1};
  double nbar = 0.0;
  int m = 0;
  std::uint64_t seed = 0;
};

struct AdalineOptions {
  double learning_rate = 0.01;
  int max_epochs = 50;
  /// Rescale features to [-1,1] per dimension (fitted on train data).
  bool scale_inputs = true;
  /// Zero weights by default; uniform +-0.01 when true.
  bool random_init = false;
};

inline double adaline_target(SourceKind k) {
  return k == SourceKind::Coherent ? 1.0 : -1.0;
}

/// One application of the delta rule:
///   y = w.x + b,  w += eta (d - y) x,  b += eta (d - y).
/// Equivalent to a gradient step on the per-sample squared error.
void adaline_delta_update(std::array<double, kFeatureDim>& weights, double& bias,
                          const std::array<double, kFeatureDim>& x, double target,
                          double eta);

/// Trains for exactly `max_epochs` epochs, visiting samples in a fresh
/// seed-determined shuffled order each epoch. Throws TrainingError if the
/// parameters go non-finite.
AdalineModel adaline_train(const SubsetCollection& train, const AdalineOptions& options,
                           std::uint64_t seed);

/// Learning-rate sweep utility: trains once per candidate rate and reports
/// the held-out accuracy of each.
struct EtaSweepEntry {
  double learning_rate;
  double test_accuracy;
};
std::vector<EtaSweepEntry> adaline_eta_sweep(
    const SubsetCollection& train, const SubsetCollection& test,
    const std::vector<double>& learning_rates = {0.001, 0.01, 0.1},
    int max_epochs = 50, std::uint64_t seed = 0);

/// Linear activation on the (rescaled) feature vector.
double adaline_activation(const AdalineModel& model, const FeatureVector& x);

/// Coherent if the activation is >= 0, Thermal otherwise.
SourceKind adaline_predict(const AdalineModel& model, const FeatureVector& x);

/// Naive Bayes over raw count sequences with analytic per-count likelihoods
/// at a fixed mean photon number and equal class priors.
struct NaiveBayesModel {
  double nbar = 0.0;
  double class_prior = 0.5;
};

struct NbResult {
  SourceKind label;
  double log_margin;  // winner log-posterior minus loser log-posterior, >= 0
};

NaiveBayesModel nb_model(MeanPhotonNumber nbar, double class_prior = 0.5);

/// Optional mode: set nbar to the pooled sample mean of the training data
/// instead of the generator value.
NaiveBayesModel nb_model_from_data(const SubsetCollection& train, double class_prior = 0.5);

/// Accumulates log 0.5 + sum_i log P(x_i | class) for both classes and picks
/// the larger; an exact tie goes to Thermal.
NbResult nb_classify(const PhotonCountSequence& counts, const NaiveBayesModel& model);

/// Fraction of matching labels.
double evaluate(const std::vector<SourceKind>& predictions,
                const std::vector<SourceKind>& labels);

double evaluate_adaline(const AdalineModel& model, const SubsetCollection& test);
double evaluate_nb(const NaiveBayesModel& model, const SubsetCollection& test);

/// JSON model persistence (type field selects adaline vs nb on load).
void save_adaline(const AdalineModel& model, const std::string& path);
AdalineModel load_adaline(const std::string& path);
void save_nb(const NaiveBayesModel& model, const std::string& path);
NaiveBayesModel load_nb(const std::string& path);

}  // namespace photon_discrim
