#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "photon_discrim/dataset.hpp"
#include "photon_discrim/neural_nets.hpp"
#include "photon_discrim/photon_stats.hpp"
#include "photon_discrim/rng.hpp"
#include "test_support.hpp"

using namespace photon_discrim;

namespace {

FeatureVector fv_of(std::array<double, kFeatureDim> probs) {
  FeatureVector fv;
  fv.probs = probs;
  fv.m = 10;
  return fv;
}

}  // namespace

TEST_CASE("all-zero MNN outputs a symmetric softmax and breaks the tie to Coherent") {
  MnnModel model;
  model.params.assign(model.param_count(), 0.0);
  const auto pred = mnn_predict(model, fv_of({0.3, 0.2, 0.5, 0, 0, 0, 0}));
  CHECK(pred.probabilities[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pred.probabilities[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pred.label == SourceKind::Coherent);
}

TEST_CASE("a dominant output bias saturates the softmax") {
  MnnModel model;
  model.params.assign(model.param_count(), 0.0);
  // b2 sits at the end of the flat layout: (+10, -10).
  model.params[model.param_count() - 2] = 10.0;
  model.params[model.param_count() - 1] = -10.0;
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    std::array<double, kFeatureDim> probs;
    for (auto& p : probs) p = rng.uniform();
    const auto pred = mnn_predict(model, fv_of(probs));
    CHECK(pred.label == SourceKind::Coherent);
    CHECK(pred.probabilities[0] > 0.999);
    CHECK(pred.probabilities[0] + pred.probabilities[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("MNN analytic gradient matches central finite differences on three seeds") {
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    MnnOptions opts;
    MnnModel model = mnn_init(opts, seed);
    const auto batch = testing::random_batch(24, seed * 91);
    const double worst = testing::max_relative_gradient_error(
        model, batch, [](const MnnModel& m, const LabeledBatch& b) { return mnn_loss(m, b); },
        [](const MnnModel& m, const LabeledBatch& b, double& l, std::vector<double>& g) {
          mnn_loss_and_gradient(m, b, l, g);
        });
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("MNN separates synthetic clouds") {
  const auto train = testing::separable_clouds(50, 321);
  MnnOptions opts;
  const auto model = mnn_train(train, opts, 9);
  CHECK(model.epochs_trained == 200);
  for (const Subset& s : train.subsets) {
    CHECK(mnn_predict(model, s.features).label == *s.features.label);
  }
}

TEST_CASE("MNN training is deterministic and beats chance on its training data") {
  CollectionOptions copts;
  copts.n_subsets_per_class = 60;
  auto [train, test] = build_collection(MeanPhotonNumber(0.77), 40, copts, 13);
  MnnOptions opts;
  opts.max_epochs = 60;
  const auto a = mnn_train(train, opts, 5);
  const auto b = mnn_train(train, opts, 5);
  CHECK(a.params == b.params);

  std::size_t correct = 0;
  for (const Subset& s : train.subsets) {
    if (mnn_predict(a, s.features).label == *s.features.label) ++correct;
  }
  CHECK(static_cast<double>(correct) / train.subsets.size() >= 0.5);
}

TEST_CASE("non-finite losses surface as training errors") {
  auto train = testing::separable_clouds(10, 1);
  // NaN features poison the sigmoid path directly.
  auto poisoned = train;
  poisoned.subsets[0].features.probs[2] = std::nan("");
  MnnOptions mnn_opts;
  mnn_opts.max_epochs = 3;
  mnn_opts.scale_inputs = false;
  CHECK_THROWS_AS(mnn_train(poisoned, mnn_opts, 2), TrainingError);
  // The CNN's ReLU gates clamp poisoned activations to zero, so drive the
  // parameters themselves non-finite through the optimizer instead.
  CnnOptions cnn_opts;
  cnn_opts.max_epochs = 3;
  cnn_opts.learning_rate = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(cnn_train(train, cnn_opts, 2), TrainingError);
}

TEST_CASE("CNN shape contract: length-7 input flattens to 16 dense inputs") {
  CnnArchitecture arch;
  CHECK(arch.input_length() == 7);
  CHECK(arch.length_after_pool1() == 3);
  CHECK(arch.length_after_pool2() == 1);
  CHECK(arch.flattened_size() == 16);
  CHECK(arch.param_count() == 1522);

  CnnOptions opts;
  const auto model = cnn_init(opts, 3);
  CHECK(model.params.size() == 1522);
  const auto pred = cnn_predict(model, fv_of({0.4, 0.3, 0.2, 0.1, 0, 0, 0}));
  CHECK(pred.probabilities[0] + pred.probabilities[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("max pooling keeps the window maxima") {
  CHECK(max_pool({0.2, 0.9, 0.4, 0.4}, 2) == std::vector<double>{0.9, 0.4});
  CHECK(max_pool({1.0, 2.0, 3.0}, 2) == std::vector<double>{2.0});  // trailing element dropped
  CHECK_THROWS_AS(max_pool({1.0}, 0), std::domain_error);
}

TEST_CASE("CNN analytic gradient matches central finite differences on three seeds") {
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    CnnOptions opts;
    CnnModel model = cnn_init(opts, seed);
    const auto batch = testing::random_batch(10, seed * 13);
    const double worst = testing::max_relative_gradient_error(
        model, batch, [](const CnnModel& m, const LabeledBatch& b) { return cnn_loss(m, b); },
        [](const CnnModel& m, const LabeledBatch& b, double& l, std::vector<double>& g) {
          cnn_loss_and_gradient(m, b, l, g);
        });
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("CNN separates synthetic clouds and trains deterministically") {
  const auto train = testing::separable_clouds(40, 654);
  CnnOptions opts;
  opts.max_epochs = 80;
  const auto a = cnn_train(train, opts, 17);
  const auto b = cnn_train(train, opts, 17);
  CHECK(a.params == b.params);
  std::size_t correct = 0;
  for (const Subset& s : train.subsets) {
    if (cnn_predict(a, s.features).label == *s.features.label) ++correct;
  }
  CHECK(correct == train.subsets.size());
}

TEST_CASE("network models persist with their architecture descriptors") {
  namespace fs = std::filesystem;
  const auto train = testing::separable_clouds(20, 31);

  MnnOptions mnn_opts;
  mnn_opts.max_epochs = 10;
  mnn_opts.hidden_width = 12;
  const auto mnn = mnn_train(train, mnn_opts, 41);
  const auto mnn_path = (fs::temp_directory_path() / "pd_mnn.json").string();
  save_mnn(mnn, mnn_path);
  const auto mnn_loaded = load_mnn(mnn_path);
  CHECK(mnn_loaded.hidden_width == 12);
  CHECK(mnn_loaded.params == mnn.params);
  CHECK(mnn_loaded.input_offset == mnn.input_offset);
  CHECK(mnn_loaded.input_scale == mnn.input_scale);
  CHECK(model_type(mnn_path) == "mnn");

  CnnOptions cnn_opts;
  cnn_opts.max_epochs = 5;
  const auto cnn = cnn_train(train, cnn_opts, 42);
  const auto cnn_path = (fs::temp_directory_path() / "pd_cnn.json").string();
  save_cnn(cnn, cnn_path);
  const auto cnn_loaded = load_cnn(cnn_path);
  CHECK(cnn_loaded.params == cnn.params);
  CHECK(cnn_loaded.arch.flattened_size() == cnn.arch.flattened_size());
  CHECK(model_type(cnn_path) == "cnn");

  // Identical predictions after reload.
  for (const Subset& s : train.subsets) {
    CHECK(mnn_predict(mnn_loaded, s.features).label == mnn_predict(mnn, s.features).label);
    CHECK(cnn_predict(cnn_loaded, s.features).label == cnn_predict(cnn, s.features).label);
  }

  CHECK_THROWS_AS(load_mnn(cnn_path), ConfigError);
  CHECK_THROWS_AS(load_cnn(mnn_path), ConfigError);
  fs::remove(mnn_path);
  fs::remove(cnn_path);
}
