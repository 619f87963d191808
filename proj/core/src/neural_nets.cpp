#include "photon_discrim/neural_nets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "photon_discrim/rng.hpp"

namespace photon_discrim {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void softmax2(const double z[2], double p[2]) {
  const double zmax = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - zmax);
  const double e1 = std::exp(z[1] - zmax);
  const double sum = e0 + e1;
  p[0] = e0 / sum;
  p[1] = e1 / sum;
}

double glorot_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void check_trainable(const SubsetCollection& train, const char* who) {
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

template <typename Model, typename LossGrad>
void gradient_descent(Model& model, const LabeledBatch& batch, int max_epochs,
                      double learning_rate, double momentum, LossGrad&& loss_grad,
                      const char* who) {
  std::vector<double> velocity(model.params.size(), 0.0);
  std::vector<double> grad;
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    double loss = 0.0;
    loss_grad(model, batch, loss, grad);
    if (!std::isfinite(loss)) {
      throw TrainingError(std::string(who) + " training diverged (non-finite loss) at epoch " +
                          std::to_string(epoch + 1));
    }
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      velocity[i] = momentum * velocity[i] - learning_rate * grad[i];
      model.params[i] += velocity[i];
    }
    model.epochs_trained = epoch + 1;
  }
}

}  // namespace

void fit_feature_scaling(const SubsetCollection& train,
                         std::array<double, kFeatureDim>& offset,
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

LabeledBatch make_batch(const SubsetCollection& collection,
                        const std::array<double, kFeatureDim>& input_offset,
                        const std::array<double, kFeatureDim>& input_scale) {
  LabeledBatch batch;
  batch.inputs.reserve(collection.subsets.size());
  batch.labels.reserve(collection.subsets.size());
  for (const Subset& s : collection.subsets) {
    std::array<double, kFeatureDim> x;
    for (int k = 0; k < kFeatureDim; ++k) {
      x[k] = (s.features.probs[k] - input_offset[k]) * input_scale[k];
    }
    batch.inputs.push_back(x);
    batch.labels.push_back(s.features.label && *s.features.label == SourceKind::Thermal ? 1 : 0);
  }
  return batch;
}

// ---------------------------------------------------------------------------
// MNN
// ---------------------------------------------------------------------------

namespace {

// Flat layout: W1 (h x 7) | b1 (h) | W2 (2 x h) | b2 (2).
struct MnnView {
  const double* w1;
  const double* b1;
  const double* w2;
  const double* b2;
  int h;
  explicit MnnView(const MnnModel& m)
      : w1(m.params.data()),
        b1(m.params.data() + static_cast<std::size_t>(m.hidden_width) * kFeatureDim),
        w2(b1 + m.hidden_width),
        b2(w2 + 2 * m.hidden_width),
        h(m.hidden_width) {}
};

void mnn_forward(const MnnView& v, const std::array<double, kFeatureDim>& x,
                 std::vector<double>& hidden, double probs[2]) {
  hidden.resize(v.h);
  for (int j = 0; j < v.h; ++j) {
    double z = v.b1[j];
    for (int k = 0; k < kFeatureDim; ++k) z += v.w1[j * kFeatureDim + k] * x[k];
    hidden[j] = sigmoid(z);
  }
  double z2[2];
  for (int c = 0; c < 2; ++c) {
    double z = v.b2[c];
    for (int j = 0; j < v.h; ++j) z += v.w2[c * v.h + j] * hidden[j];
    z2[c] = z;
  }
  softmax2(z2, probs);
}

}  // namespace

MnnModel mnn_init(const MnnOptions& options, std::uint64_t seed) {
  if (options.hidden_width < 1) throw std::domain_error("hidden width must be >= 1");
  MnnModel model;
  model.hidden_width = options.hidden_width;
  model.seed = seed;
  model.params.assign(model.param_count(), 0.0);
  Rng rng(seed);
  const int h = model.hidden_width;
  const double lim1 = glorot_limit(kFeatureDim, h);
  for (int i = 0; i < h * kFeatureDim; ++i) model.params[i] = lim1 * (2.0 * rng.uniform() - 1.0);
  const double lim2 = glorot_limit(h, 2);
  double* w2 = model.params.data() + static_cast<std::size_t>(h) * (kFeatureDim + 1);
  for (int i = 0; i < 2 * h; ++i) w2[i] = lim2 * (2.0 * rng.uniform() - 1.0);
  return model;
}

double mnn_loss(const MnnModel& model, const LabeledBatch& batch) {
  if (batch.inputs.empty()) throw std::domain_error("mnn_loss: empty batch");
  const MnnView v(model);
  std::vector<double> hidden;
  double probs[2];
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
    mnn_forward(v, batch.inputs[i], hidden, probs);
    loss -= std::log(std::max(probs[batch.labels[i]], 1e-300));
  }
  return loss / static_cast<double>(batch.inputs.size());
}

void mnn_loss_and_gradient(const MnnModel& model, const LabeledBatch& batch,
                           double& loss, std::vector<double>& grad) {
  if (batch.inputs.empty()) throw std::domain_error("mnn_loss_and_gradient: empty batch");
  const MnnView v(model);
  const int h = v.h;
  grad.assign(model.params.size(), 0.0);
  double* gw1 = grad.data();
  double* gb1 = grad.data() + static_cast<std::size_t>(h) * kFeatureDim;
  double* gw2 = gb1 + h;
  double* gb2 = gw2 + 2 * h;

  const double inv_n = 1.0 / static_cast<double>(batch.inputs.size());
  std::vector<double> hidden;
  double probs[2];
  loss = 0.0;
  for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
    const auto& x = batch.inputs[i];
    mnn_forward(v, x, hidden, probs);
    loss -= std::log(std::max(probs[batch.labels[i]], 1e-300));

    double dz2[2] = {probs[0] * inv_n, probs[1] * inv_n};
    dz2[batch.labels[i]] -= inv_n;
    for (int c = 0; c < 2; ++c) {
      for (int j = 0; j < h; ++j) gw2[c * h + j] += dz2[c] * hidden[j];
      gb2[c] += dz2[c];
    }
    for (int j = 0; j < h; ++j) {
      const double dh = (dz2[0] * v.w2[j] + dz2[1] * v.w2[h + j]) * hidden[j] * (1.0 - hidden[j]);
      for (int k = 0; k < kFeatureDim; ++k) gw1[j * kFeatureDim + k] += dh * x[k];
      gb1[j] += dh;
    }
  }
  loss *= inv_n;
}

MnnModel mnn_train(const SubsetCollection& train, const MnnOptions& options,
                   std::uint64_t seed) {
  check_trainable(train, "mnn_train");
  MnnModel model = mnn_init(options, seed);
  model.nbar = train.nbar;
  model.m = train.m;
  if (options.scale_inputs) fit_feature_scaling(train, model.input_offset, model.input_scale);
  const LabeledBatch batch = make_batch(train, model.input_offset, model.input_scale);
  gradient_descent(model, batch, options.max_epochs, options.learning_rate, options.momentum,
                   [](const MnnModel& m, const LabeledBatch& b, double& l, std::vector<double>& g) {
                     mnn_loss_and_gradient(m, b, l, g);
                   },
                   "mnn");
  return model;
}

NetPrediction mnn_predict(const MnnModel& model, const FeatureVector& x) {
  std::array<double, kFeatureDim> scaled;
  for (int k = 0; k < kFeatureDim; ++k) {
    scaled[k] = (x.probs[k] - model.input_offset[k]) * model.input_scale[k];
  }
  const MnnView v(model);
  std::vector<double> hidden;
  double probs[2];
  mnn_forward(v, scaled, hidden, probs);
  NetPrediction out;
  out.probabilities = {probs[0], probs[1]};
  out.label = probs[0] >= probs[1] ? SourceKind::Coherent : SourceKind::Thermal;
  return out;
}

// ---------------------------------------------------------------------------
// CNN
// ---------------------------------------------------------------------------

std::size_t CnnArchitecture::param_count() const {
  const int k = kernel_width;
  return static_cast<std::size_t>(conv1_channels * k + conv1_channels) +
         (conv2_channels * conv1_channels * k + conv2_channels) +
         (conv3_channels * conv2_channels * k + conv3_channels) +
         (dense_width * flattened_size() + dense_width) + (2 * dense_width + 2);
}

namespace {

// Flat layout mirrors the layer order; biases directly follow their weights.
struct CnnOffsets {
  std::size_t w1, b1, w2, b2, w3, b3, w4, b4, w5, b5;
  explicit CnnOffsets(const CnnArchitecture& a) {
    const int k = a.kernel_width;
    w1 = 0;
    b1 = w1 + static_cast<std::size_t>(a.conv1_channels) * k;
    w2 = b1 + a.conv1_channels;
    b2 = w2 + static_cast<std::size_t>(a.conv2_channels) * a.conv1_channels * k;
    w3 = b2 + a.conv2_channels;
    b3 = w3 + static_cast<std::size_t>(a.conv3_channels) * a.conv2_channels * k;
    w4 = b3 + a.conv3_channels;
    b4 = w4 + static_cast<std::size_t>(a.dense_width) * a.flattened_size();
    w5 = b4 + a.dense_width;
    b5 = w5 + static_cast<std::size_t>(2) * a.dense_width;
  }
};

// Per-sample activations kept for backpropagation.
struct CnnScratch {
  std::vector<double> a1, a2, p1, a3, p2;   // post-ReLU maps and pooled maps
  std::vector<int> argmax1, argmax2;        // pooling choices
  std::vector<double> dense;                // post-ReLU dense activations
  double probs[2];
};

// Same-length convolution with zero padding, kernel width 3, plus ReLU.
void conv_relu(const double* weights, const double* biases, const double* in,
               int in_channels, double* out, int out_channels, int length) {
  for (int o = 0; o < out_channels; ++o) {
    for (int t = 0; t < length; ++t) {
      double z = biases[o];
      for (int i = 0; i < in_channels; ++i) {
        const double* w = weights + (static_cast<std::size_t>(o) * in_channels + i) * 3;
        const double* row = in + static_cast<std::size_t>(i) * length;
        if (t > 0) z += w[0] * row[t - 1];
        z += w[1] * row[t];
        if (t + 1 < length) z += w[2] * row[t + 1];
      }
      out[static_cast<std::size_t>(o) * length + t] = z > 0.0 ? z : 0.0;
    }
  }
}

void conv_relu_backward(const double* weights, const double* in, int in_channels,
                        const double* out, int out_channels, int length,
                        const double* dout, double* gweights, double* gbias,
                        double* din) {
  if (din) std::fill(din, din + static_cast<std::size_t>(in_channels) * length, 0.0);
  for (int o = 0; o < out_channels; ++o) {
    for (int t = 0; t < length; ++t) {
      // ReLU gate: units that were clamped pass no gradient.
      const double g = out[static_cast<std::size_t>(o) * length + t] > 0.0
                           ? dout[static_cast<std::size_t>(o) * length + t]
                           : 0.0;
      if (g == 0.0) continue;
      gbias[o] += g;
      for (int i = 0; i < in_channels; ++i) {
        double* gw = gweights + (static_cast<std::size_t>(o) * in_channels + i) * 3;
        const double* row = in + static_cast<std::size_t>(i) * length;
        double* drow = din ? din + static_cast<std::size_t>(i) * length : nullptr;
        const double* w = weights + (static_cast<std::size_t>(o) * in_channels + i) * 3;
        if (t > 0) {
          gw[0] += g * row[t - 1];
          if (drow) drow[t - 1] += g * w[0];
        }
        gw[1] += g * row[t];
        if (drow) drow[t] += g * w[1];
        if (t + 1 < length) {
          gw[2] += g * row[t + 1];
          if (drow) drow[t + 1] += g * w[2];
        }
      }
    }
  }
}

void pool_forward(const double* in, int channels, int length, int width,
                  double* out, int* argmax) {
  const int out_len = length / width;
  for (int c = 0; c < channels; ++c) {
    for (int t = 0; t < out_len; ++t) {
      int best = t * width;
      for (int j = 1; j < width; ++j) {
        if (in[static_cast<std::size_t>(c) * length + t * width + j] >
            in[static_cast<std::size_t>(c) * length + best]) {
          best = t * width + j;
        }
      }
      out[static_cast<std::size_t>(c) * out_len + t] = in[static_cast<std::size_t>(c) * length + best];
      argmax[static_cast<std::size_t>(c) * out_len + t] = best;
    }
  }
}

void cnn_forward(const CnnModel& model, const CnnOffsets& off,
                 const std::array<double, kFeatureDim>& x, CnnScratch& s) {
  const CnnArchitecture& a = model.arch;
  const double* p = model.params.data();
  const int len = a.input_length();
  const int len_p1 = a.length_after_pool1();
  const int len_p2 = a.length_after_pool2();

  s.a1.resize(static_cast<std::size_t>(a.conv1_channels) * len);
  s.a2.resize(static_cast<std::size_t>(a.conv2_channels) * len);
  s.p1.resize(static_cast<std::size_t>(a.conv2_channels) * len_p1);
  s.argmax1.resize(s.p1.size());
  s.a3.resize(static_cast<std::size_t>(a.conv3_channels) * len_p1);
  s.p2.resize(static_cast<std::size_t>(a.conv3_channels) * len_p2);
  s.argmax2.resize(s.p2.size());
  s.dense.resize(a.dense_width);

  conv_relu(p + off.w1, p + off.b1, x.data(), 1, s.a1.data(), a.conv1_channels, len);
  conv_relu(p + off.w2, p + off.b2, s.a1.data(), a.conv1_channels, s.a2.data(),
            a.conv2_channels, len);
  pool_forward(s.a2.data(), a.conv2_channels, len, a.pool_width, s.p1.data(), s.argmax1.data());
  conv_relu(p + off.w3, p + off.b3, s.p1.data(), a.conv2_channels, s.a3.data(),
            a.conv3_channels, len_p1);
  pool_forward(s.a3.data(), a.conv3_channels, len_p1, a.pool_width, s.p2.data(),
               s.argmax2.data());

  // s.p2 is already the flattened dense input (channel-major).
  const int flat = a.flattened_size();
  for (int j = 0; j < a.dense_width; ++j) {
    double z = p[off.b4 + j];
    for (int f = 0; f < flat; ++f) z += p[off.w4 + static_cast<std::size_t>(j) * flat + f] * s.p2[f];
    s.dense[j] = z > 0.0 ? z : 0.0;
  }
  double z5[2];
  for (int c = 0; c < 2; ++c) {
    double z = p[off.b5 + c];
    for (int j = 0; j < a.dense_width; ++j) {
      z += p[off.w5 + static_cast<std::size_t>(c) * a.dense_width + j] * s.dense[j];
    }
    z5[c] = z;
  }
  softmax2(z5, s.probs);
}

}  // namespace

CnnModel cnn_init(const CnnOptions& options, std::uint64_t seed) {
  const CnnArchitecture& a = options.arch;
  if (a.input_length() / a.pool_width / a.pool_width < 1) {
    throw std::domain_error("CNN architecture does not compose over the input length");
  }
  CnnModel model;
  model.arch = a;
  model.seed = seed;
  model.params.assign(a.param_count(), 0.0);
  const CnnOffsets off(a);
  Rng rng(seed);
  const int k = a.kernel_width;
  auto fill = [&](std::size_t start, std::size_t count, int fan_in, int fan_out) {
    const double lim = glorot_limit(fan_in, fan_out);
    for (std::size_t i = 0; i < count; ++i) model.params[start + i] = lim * (2.0 * rng.uniform() - 1.0);
  };
  fill(off.w1, static_cast<std::size_t>(a.conv1_channels) * k, k, a.conv1_channels * k);
  fill(off.w2, static_cast<std::size_t>(a.conv2_channels) * a.conv1_channels * k,
       a.conv1_channels * k, a.conv2_channels * k);
  fill(off.w3, static_cast<std::size_t>(a.conv3_channels) * a.conv2_channels * k,
       a.conv2_channels * k, a.conv3_channels * k);
  fill(off.w4, static_cast<std::size_t>(a.dense_width) * a.flattened_size(), a.flattened_size(),
       a.dense_width);
  fill(off.w5, static_cast<std::size_t>(2) * a.dense_width, a.dense_width, 2);
  return model;
}

double cnn_loss(const CnnModel& model, const LabeledBatch& batch) {
  if (batch.inputs.empty()) throw std::domain_error("cnn_loss: empty batch");
  const CnnOffsets off(model.arch);
  CnnScratch s;
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
    cnn_forward(model, off, batch.inputs[i], s);
    loss -= std::log(std::max(s.probs[batch.labels[i]], 1e-300));
  }
  return loss / static_cast<double>(batch.inputs.size());
}

void cnn_loss_and_gradient(const CnnModel& model, const LabeledBatch& batch,
                           double& loss, std::vector<double>& grad) {
  if (batch.inputs.empty()) throw std::domain_error("cnn_loss_and_gradient: empty batch");
  const CnnArchitecture& a = model.arch;
  const CnnOffsets off(a);
  const double* p = model.params.data();
  grad.assign(model.params.size(), 0.0);
  double* g = grad.data();

  const int len = a.input_length();
  const int len_p1 = a.length_after_pool1();
  const int len_p2 = a.length_after_pool2();
  const int flat = a.flattened_size();
  const double inv_n = 1.0 / static_cast<double>(batch.inputs.size());

  CnnScratch s;
  std::vector<double> dp2(static_cast<std::size_t>(a.conv3_channels) * len_p2);
  std::vector<double> da3(static_cast<std::size_t>(a.conv3_channels) * len_p1);
  std::vector<double> dp1(static_cast<std::size_t>(a.conv2_channels) * len_p1);
  std::vector<double> da2(static_cast<std::size_t>(a.conv2_channels) * len);
  std::vector<double> da1(static_cast<std::size_t>(a.conv1_channels) * len);
  std::vector<double> ddense(a.dense_width);

  loss = 0.0;
  for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
    const auto& x = batch.inputs[i];
    cnn_forward(model, off, x, s);
    loss -= std::log(std::max(s.probs[batch.labels[i]], 1e-300));

    double dz5[2] = {s.probs[0] * inv_n, s.probs[1] * inv_n};
    dz5[batch.labels[i]] -= inv_n;
    std::fill(ddense.begin(), ddense.end(), 0.0);
    for (int c = 0; c < 2; ++c) {
      for (int j = 0; j < a.dense_width; ++j) {
        g[off.w5 + static_cast<std::size_t>(c) * a.dense_width + j] += dz5[c] * s.dense[j];
        ddense[j] += dz5[c] * p[off.w5 + static_cast<std::size_t>(c) * a.dense_width + j];
      }
      g[off.b5 + c] += dz5[c];
    }

    std::fill(dp2.begin(), dp2.end(), 0.0);
    for (int j = 0; j < a.dense_width; ++j) {
      const double dj = s.dense[j] > 0.0 ? ddense[j] : 0.0;
      if (dj == 0.0) continue;
      g[off.b4 + j] += dj;
      for (int f = 0; f < flat; ++f) {
        g[off.w4 + static_cast<std::size_t>(j) * flat + f] += dj * s.p2[f];
        dp2[f] += dj * p[off.w4 + static_cast<std::size_t>(j) * flat + f];
      }
    }

    // Unpool: gradient flows only to each window's argmax.
    std::fill(da3.begin(), da3.end(), 0.0);
    for (int c = 0; c < a.conv3_channels; ++c) {
      for (int t = 0; t < len_p2; ++t) {
        da3[static_cast<std::size_t>(c) * len_p1 + s.argmax2[static_cast<std::size_t>(c) * len_p2 + t]] +=
            dp2[static_cast<std::size_t>(c) * len_p2 + t];
      }
    }
    conv_relu_backward(p + off.w3, s.p1.data(), a.conv2_channels, s.a3.data(), a.conv3_channels,
                       len_p1, da3.data(), g + off.w3, g + off.b3, dp1.data());

    std::fill(da2.begin(), da2.end(), 0.0);
    for (int c = 0; c < a.conv2_channels; ++c) {
      for (int t = 0; t < len_p1; ++t) {
        da2[static_cast<std::size_t>(c) * len + s.argmax1[static_cast<std::size_t>(c) * len_p1 + t]] +=
            dp1[static_cast<std::size_t>(c) * len_p1 + t];
      }
    }
    conv_relu_backward(p + off.w2, s.a1.data(), a.conv1_channels, s.a2.data(), a.conv2_channels,
                       len, da2.data(), g + off.w2, g + off.b2, da1.data());
    conv_relu_backward(p + off.w1, x.data(), 1, s.a1.data(), a.conv1_channels, len, da1.data(),
                       g + off.w1, g + off.b1, nullptr);
  }
  loss *= inv_n;
}

CnnModel cnn_train(const SubsetCollection& train, const CnnOptions& options,
                   std::uint64_t seed) {
  check_trainable(train, "cnn_train");
  CnnModel model = cnn_init(options, seed);
  model.nbar = train.nbar;
  model.m = train.m;
  if (options.scale_inputs) fit_feature_scaling(train, model.input_offset, model.input_scale);
  const LabeledBatch batch = make_batch(train, model.input_offset, model.input_scale);
  gradient_descent(model, batch, options.max_epochs, options.learning_rate, options.momentum,
                   [](const CnnModel& m, const LabeledBatch& b, double& l, std::vector<double>& g) {
                     cnn_loss_and_gradient(m, b, l, g);
                   },
                   "cnn");
  return model;
}

NetPrediction cnn_predict(const CnnModel& model, const FeatureVector& x) {
  std::array<double, kFeatureDim> scaled;
  for (int k = 0; k < kFeatureDim; ++k) {
    scaled[k] = (x.probs[k] - model.input_offset[k]) * model.input_scale[k];
  }
  const CnnOffsets off(model.arch);
  CnnScratch s;
  cnn_forward(model, off, scaled, s);
  NetPrediction out;
  out.probabilities = {s.probs[0], s.probs[1]};
  out.label = s.probs[0] >= s.probs[1] ? SourceKind::Coherent : SourceKind::Thermal;
  return out;
}

std::vector<double> max_pool(const std::vector<double>& values, int width) {
  if (width < 1) throw std::domain_error("pool width must be >= 1");
  std::vector<double> out;
  const std::size_t n = values.size() / width;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    double best = values[t * width];
    for (int j = 1; j < width; ++j) best = std::max(best, values[t * width + j]);
    out.push_back(best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed model JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open model file for writing: " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing model file: " + path);
}

}  // namespace

void save_mnn(const MnnModel& model, const std::string& path) {
  write_json(nlohmann::json{{"type", "mnn"},
                            {"schema", 1},
                            {"hidden_width", model.hidden_width},
                            {"params", model.params},
                            {"input_offset", model.input_offset},
                            {"input_scale", model.input_scale},
                            {"nbar", model.nbar},
                            {"m", model.m},
                            {"seed", model.seed},
                            {"epochs", model.epochs_trained}},
             path);
}

MnnModel load_mnn(const std::string& path) {
  const nlohmann::json j = read_json(path);
  if (j.value("type", "") != "mnn") throw ConfigError("model file " + path + " is not an MNN model");
  MnnModel model;
  model.hidden_width = j.at("hidden_width").get<int>();
  j.at("params").get_to(model.params);
  if (model.params.size() != model.param_count()) {
    throw ConfigError("MNN parameter count mismatch in " + path);
  }
  j.at("input_offset").get_to(model.input_offset);
  j.at("input_scale").get_to(model.input_scale);
  model.nbar = j.value("nbar", 0.0);
  model.m = j.value("m", 0);
  model.seed = j.value("seed", std::uint64_t{0});
  model.epochs_trained = j.value("epochs", 0);
  return model;
}

void save_cnn(const CnnModel& model, const std::string& path) {
  const CnnArchitecture& a = model.arch;
  write_json(nlohmann::json{{"type", "cnn"},
                            {"schema", 1},
                            {"arch",
                             {{"conv_channels", {a.conv1_channels, a.conv2_channels, a.conv3_channels}},
                              {"kernel_width", a.kernel_width},
                              {"pool_width", a.pool_width},
                              {"dense_width", a.dense_width},
                              {"layer_order", "conv-conv-pool-conv-pool-dense-softmax"}}},
                            {"params", model.params},
                            {"input_offset", model.input_offset},
                            {"input_scale", model.input_scale},
                            {"nbar", model.nbar},
                            {"m", model.m},
                            {"seed", model.seed},
                            {"epochs", model.epochs_trained}},
             path);
}

CnnModel load_cnn(const std::string& path) {
  const nlohmann::json j = read_json(path);
  if (j.value("type", "") != "cnn") throw ConfigError("model file " + path + " is not a CNN model");
  CnnModel model;
  const auto& arch = j.at("arch");
  const auto channels = arch.at("conv_channels").get<std::vector<int>>();
  if (channels.size() != 3) throw ConfigError("CNN architecture must list three conv layers");
  model.arch.conv1_channels = channels[0];
  model.arch.conv2_channels = channels[1];
  model.arch.conv3_channels = channels[2];
  model.arch.kernel_width = arch.value("kernel_width", 3);
  model.arch.pool_width = arch.value("pool_width", 2);
  model.arch.dense_width = arch.value("dense_width", 16);
  j.at("params").get_to(model.params);
  if (model.params.size() != model.arch.param_count()) {
    throw ConfigError("CNN parameter count mismatch in " + path);
  }
  j.at("input_offset").get_to(model.input_offset);
  j.at("input_scale").get_to(model.input_scale);
  model.nbar = j.value("nbar", 0.0);
  model.m = j.value("m", 0);
  model.seed = j.value("seed", std::uint64_t{0});
  model.epochs_trained = j.value("epochs", 0);
  return model;
}

std::string model_type(const std::string& path) { return read_json(path).value("type", ""); }

}  // namespace photon_discrim
