#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "photon_discrim/dataset.hpp"
#include "photon_discrim/types.hpp"

namespace photon_discrim {

/// Class index convention for both networks: 0 = Coherent, 1 = Thermal.
struct NetPrediction {
  SourceKind label;
  std::array<double, 2> probabilities;
};

/// Rescaled inputs plus class indices; the unit both networks train on.
struct LabeledBatch {
  std::vector<std::array<double, kFeatureDim>> inputs;
  std::vector<int> labels;
};

LabeledBatch make_batch(const SubsetCollection& collection,
                        const std::array<double, kFeatureDim>& input_offset,
                        const std::array<double, kFeatureDim>& input_scale);

/// Fits the per-feature [-1,1] rescaling on a training collection.
void fit_feature_scaling(const SubsetCollection& train,
                         std::array<double, kFeatureDim>& offset,
                         std::array<double, kFeatureDim>& scale);

// ---------------------------------------------------------------------------
// Two-layer feed-forward network: sigmoid hidden layer, softmax output.
// Parameters are stored flat as [W1 (h x 7), b1 (h), W2 (2 x h), b2 (2)].
// ---------------------------------------------------------------------------

struct MnnModel {
  int hidden_width = 10;
  std::vector<double> params;
  std::array<double, kFeatureDim> input_offset{};
  std::array<double, kFeatureDim> input_scale{1, 1, 1, 1, 1, 1, 1};
  double nbar = 0.0;
  int m = 0;
  std::uint64_t seed = 0;
  int epochs_trained = 0;

  std::size_t param_count() const {
    return static_cast<std::size_t>(hidden_width) * (kFeatureDim + 3) + 2;
  }
};

struct MnnOptions {
  int hidden_width = 10;
  int max_epochs = 200;
  double learning_rate = 0.05;
  double momentum = 0.9;
  bool scale_inputs = true;
};

/// Glorot-initialized model before any training (deterministic under seed).
MnnModel mnn_init(const MnnOptions& options, std::uint64_t seed);

/// Mean cross-entropy over the batch.
double mnn_loss(const MnnModel& model, const LabeledBatch& batch);

/// Analytic full-batch gradient; `grad` is resized to param_count().
void mnn_loss_and_gradient(const MnnModel& model, const LabeledBatch& batch,
                           double& loss, std::vector<double>& grad);

/// Full-batch gradient descent with momentum for exactly max_epochs epochs.
MnnModel mnn_train(const SubsetCollection& train, const MnnOptions& options,
                   std::uint64_t seed);

NetPrediction mnn_predict(const MnnModel& model, const FeatureVector& x);

// ---------------------------------------------------------------------------
// 1D CNN over the 7-entry feature vector. Layer order:
//   conv(3, same) -> conv(3, same) -> maxpool(2) -> conv(3, same)
//   -> maxpool(2) -> dense -> softmax, ReLU activations throughout.
// ---------------------------------------------------------------------------

struct CnnArchitecture {
  int conv1_channels = 8;
  int conv2_channels = 16;
  int conv3_channels = 16;
  int kernel_width = 3;
  int pool_width = 2;
  int dense_width = 16;

  int input_length() const { return kFeatureDim; }
  int length_after_pool1() const { return input_length() / pool_width; }
  int length_after_pool2() const { return length_after_pool1() / pool_width; }
  /// Input width of the dense layer once the last feature map is flattened.
  int flattened_size() const { return conv3_channels * length_after_pool2(); }
  std::size_t param_count() const;
};

struct CnnModel {
  CnnArchitecture arch;
  std::vector<double> params;
  std::array<double, kFeatureDim> input_offset{};
  std::array<double, kFeatureDim> input_scale{1, 1, 1, 1, 1, 1, 1};
  double nbar = 0.0;
  int m = 0;
  std::uint64_t seed = 0;
  int epochs_trained = 0;
};

struct CnnOptions {
  CnnArchitecture arch{};
  int max_epochs = 100;
  double learning_rate = 0.05;
  double momentum = 0.9;
  bool scale_inputs = true;
};

CnnModel cnn_init(const CnnOptions& options, std::uint64_t seed);
double cnn_loss(const CnnModel& model, const LabeledBatch& batch);
void cnn_loss_and_gradient(const CnnModel& model, const LabeledBatch& batch,
                           double& loss, std::vector<double>& grad);
CnnModel cnn_train(const SubsetCollection& train, const CnnOptions& options,
                   std::uint64_t seed);
NetPrediction cnn_predict(const CnnModel& model, const FeatureVector& x);

/// Width-`width` non-overlapping max pooling (floor semantics: a trailing
/// partial window is dropped).
std::vector<double> max_pool(const std::vector<double>& values, int width);

/// JSON persistence with a versioned schema and architecture descriptor.
void save_mnn(const MnnModel& model, const std::string& path);
MnnModel load_mnn(const std::string& path);
void save_cnn(const CnnModel& model, const std::string& path);
CnnModel load_cnn(const std::string& path);

/// Reads the "type" field of a persisted model ("adaline", "nb", "mnn", "cnn").
std::string model_type(const std::string& path);

}  // namespace photon_discrim
