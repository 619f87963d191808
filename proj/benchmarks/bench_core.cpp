#include <benchmark/benchmark.h>

#include "photon_discrim/classifiers.hpp"
#include "photon_discrim/dataset.hpp"
#include "photon_discrim/neural_nets.hpp"
#include "photon_discrim/photon_stats.hpp"
#include "photon_discrim/rng.hpp"
#include "photon_discrim/trace_sim.hpp"

using namespace photon_discrim;

namespace {

void BM_CoherentPmf(benchmark::State& state) {
  const MeanPhotonNumber nbar(0.77);
  int n = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(coherent_pmf(n++ & 7, nbar));
  }
}
BENCHMARK(BM_CoherentPmf);

void BM_ThermalPmf(benchmark::State& state) {
  const MeanPhotonNumber nbar(0.77);
  int n = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(thermal_pmf(n++ & 7, nbar));
  }
}
BENCHMARK(BM_ThermalPmf);

void BM_SampleCounts(benchmark::State& state) {
  const auto source = state.range(0) == 0 ? SourceKind::Coherent : SourceKind::Thermal;
  const std::size_t m = 1000;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_counts(source, MeanPhotonNumber(0.77), m, seed++));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_SampleCounts)->Arg(0)->Arg(1);

void BM_Featurize(benchmark::State& state) {
  const auto seq = sample_counts(SourceKind::Thermal, MeanPhotonNumber(0.77), 160, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(featurize(seq));
  }
}
BENCHMARK(BM_Featurize);

void BM_NbClassify(benchmark::State& state) {
  const auto seq = sample_counts(SourceKind::Thermal, MeanPhotonNumber(0.40),
                                 static_cast<std::size_t>(state.range(0)), 5);
  const auto model = nb_model(MeanPhotonNumber(0.40));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nb_classify(seq, model));
  }
}
BENCHMARK(BM_NbClassify)->Arg(10)->Arg(160);

void BM_AdalineTrain(benchmark::State& state) {
  CollectionOptions opts;
  opts.n_subsets_per_class = 200;
  auto [train, test] = build_collection(MeanPhotonNumber(0.40), 160, opts, 11);
  AdalineOptions a;
  for (auto _ : state) {
    benchmark::DoNotOptimize(adaline_train(train, a, 7));
  }
}
BENCHMARK(BM_AdalineTrain);

void BM_MnnEpoch(benchmark::State& state) {
  CollectionOptions opts;
  opts.n_subsets_per_class = 200;
  auto [train, test] = build_collection(MeanPhotonNumber(0.40), 160, opts, 11);
  MnnModel model = mnn_init(MnnOptions{}, 3);
  fit_feature_scaling(train, model.input_offset, model.input_scale);
  const auto batch = make_batch(train, model.input_offset, model.input_scale);
  double loss;
  std::vector<double> grad;
  for (auto _ : state) {
    mnn_loss_and_gradient(model, batch, loss, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_MnnEpoch);

void BM_CnnEpoch(benchmark::State& state) {
  CollectionOptions opts;
  opts.n_subsets_per_class = 200;
  auto [train, test] = build_collection(MeanPhotonNumber(0.40), 160, opts, 11);
  CnnModel model = cnn_init(CnnOptions{}, 3);
  fit_feature_scaling(train, model.input_offset, model.input_scale);
  const auto batch = make_batch(train, model.input_offset, model.input_scale);
  double loss;
  std::vector<double> grad;
  for (auto _ : state) {
    cnn_loss_and_gradient(model, batch, loss, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_CnnEpoch);

void BM_TraceRoundTrip(benchmark::State& state) {
  const auto counts = sample_counts(SourceKind::Thermal, MeanPhotonNumber(0.77), 100, 9);
  PulseShape pulse;
  for (auto _ : state) {
    const auto trace = synthesize_trace(counts, pulse, kDefaultSamplePeriod, 10);
    benchmark::DoNotOptimize(count_photons(trace));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_TraceRoundTrip);

}  // namespace

BENCHMARK_MAIN();
