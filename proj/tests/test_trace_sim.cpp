#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "photon_discrim/photon_stats.hpp"
#include "photon_discrim/trace_sim.hpp"

using namespace photon_discrim;

namespace {

PhotonCountSequence seq_of(std::vector<int> counts) {
  PhotonCountSequence s;
  s.counts = std::move(counts);
  return s;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("zero-photon trace stays at the noise floor") {
  PulseShape pulse;  // sigma 0.02
  const auto trace = synthesize_trace(seq_of({0, 0, 0}), pulse, kDefaultSamplePeriod, 11);
  CHECK(trace.samples.size() == 300);
  double vmax = 0.0;
  for (double v : trace.samples) vmax = std::max(vmax, std::abs(v));
  CHECK(vmax < 0.2);
}

TEST_CASE("noiseless rectangular pulses form exactly c disjoint runs") {
  PulseShape pulse;
  pulse.noise_sigma = 0.0;
  const auto trace = synthesize_trace(seq_of({3}), pulse, kDefaultSamplePeriod, 7);
  int runs = 0;
  bool in_run = false;
  for (double v : trace.samples) {
    const bool above = v > 0.5;
    if (above && !in_run) ++runs;
    in_run = above;
  }
  CHECK(runs == 3);
  CHECK(count_photons(trace).counts == std::vector<int>{3});
}

TEST_CASE("round trip recovers thermal ground truth exactly") {
  const auto counts = sample_counts(SourceKind::Thermal, MeanPhotonNumber(0.77), 1000, 1234);
  PulseShape pulse;  // default sigma 0.02
  const auto trace = synthesize_trace(counts, pulse, kDefaultSamplePeriod, 99);
  const auto recovered = count_photons(trace);
  REQUIRE(trace.ground_truth.has_value());
  CHECK(recovered.counts == *trace.ground_truth);
  CHECK(recovered.counts == counts.counts);
}

TEST_CASE("round trip holds at noise sigma 0.05 over ten thousand bins") {
  const auto counts = sample_counts(SourceKind::Thermal, MeanPhotonNumber(0.77), 10000, 555);
  PulseShape pulse;
  pulse.noise_sigma = 0.05;
  const auto trace = synthesize_trace(counts, pulse, kDefaultSamplePeriod, 556);
  CHECK(count_photons(trace).counts == counts.counts);
}

TEST_CASE("round trip holds for raised-cosine pulses") {
  const auto counts = sample_counts(SourceKind::Coherent, MeanPhotonNumber(0.40), 1000, 31);
  PulseShape pulse;
  pulse.rise = RiseModel::RaisedCosine;
  pulse.width = 100e-9;  // keeps several samples inside the above-threshold arc
  const auto trace = synthesize_trace(counts, pulse, kDefaultSamplePeriod, 32);
  CHECK(count_photons(trace).counts == counts.counts);
}

TEST_CASE("a pulse straddling a bin boundary counts once, in the first bin") {
  VoltageTrace trace;
  trace.sample_period = 10e-9;
  trace.bin_duration = 100e-9;
  trace.samples.assign(20, 0.0);  // two 10-sample bins
  for (int s = 8; s < 13; ++s) trace.samples[s] = 1.0;
  const auto counts = count_photons(trace, 0.5, 100e-9);
  CHECK(counts.counts == std::vector<int>{1, 0});
}

TEST_CASE("flat trace counts to zeros") {
  VoltageTrace trace;
  trace.sample_period = 10e-9;
  trace.samples.assign(1000, 0.0);
  CHECK(count_photons(trace, 0.5, 1e-6).counts == std::vector<int>(10, 0));
}

TEST_CASE("raising the threshold never raises a bin count") {
  const auto counts = sample_counts(SourceKind::Thermal, MeanPhotonNumber(0.67), 500, 71);
  PulseShape pulse;
  const auto trace = synthesize_trace(counts, pulse, kDefaultSamplePeriod, 72);
  std::vector<int> previous;
  for (double threshold : {0.2, 0.35, 0.5, 0.65, 0.8}) {
    const auto current = count_photons(trace, threshold).counts;
    if (!previous.empty()) {
      for (std::size_t b = 0; b < current.size(); ++b) CHECK(current[b] <= previous[b]);
    }
    previous = current;
  }
}

TEST_CASE("trailing samples short of a full bin are dropped") {
  VoltageTrace trace;
  trace.sample_period = 10e-9;
  trace.samples.assign(1050, 0.0);
  trace.samples[1049] = 1.0;  // inside the truncated tail; must not count
  const auto counts = count_photons(trace, 0.5, 100e-9);
  CHECK(counts.counts.size() == 105);
}

TEST_CASE("overcrowded bins raise a capacity error naming the bin") {
  PulseShape pulse;  // width 30 ns + 20 ns gap -> max 20 pulses per microsecond
  CHECK_THROWS_AS(synthesize_trace(seq_of({0, 0, 40}), pulse, kDefaultSamplePeriod, 5),
                  CapacityError);
  try {
    synthesize_trace(seq_of({0, 0, 40}), pulse, kDefaultSamplePeriod, 5);
  } catch (const CapacityError& e) {
    CHECK(e.bin_index() == 2);
    CHECK(std::string(e.what()).find("bin 2") != std::string::npos);
  }
}

TEST_CASE("bin geometry must divide evenly") {
  VoltageTrace trace;
  trace.sample_period = 30e-9;
  trace.samples.assign(100, 0.0);
  CHECK_THROWS_AS(count_photons(trace, 0.5, 1e-6), ConfigError);
  PulseShape pulse;
  CHECK_THROWS_AS(synthesize_trace(seq_of({1}), pulse, 30e-9, 1), ConfigError);
}

TEST_CASE("count_photons validates its inputs") {
  VoltageTrace empty;
  empty.sample_period = 10e-9;
  CHECK_THROWS_AS(count_photons(empty), std::domain_error);
  VoltageTrace ok;
  ok.sample_period = 10e-9;
  ok.samples.assign(100, 0.0);
  CHECK_THROWS_AS(count_photons(ok, 0.0), std::domain_error);
  CHECK_THROWS_AS(count_photons(ok, -0.5), std::domain_error);
}

TEST_CASE("binary trace files round trip") {
  const auto counts = sample_counts(SourceKind::Coherent, MeanPhotonNumber(0.53), 50, 8);
  PulseShape pulse;
  const auto trace = synthesize_trace(counts, pulse, kDefaultSamplePeriod, 9);
  const auto path = temp_file("pd_trace_roundtrip.ptrc");
  write_trace(trace, path.string());
  const auto loaded = read_trace(path.string());
  REQUIRE(loaded.samples.size() == trace.samples.size());
  CHECK(loaded.sample_period == trace.sample_period);
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    // Samples are stored as float32.
    CHECK(loaded.samples[i] == doctest::Approx(trace.samples[i]).epsilon(1e-6));
  }
  // Counting the reloaded trace still reproduces the ground truth.
  CHECK(count_photons(loaded).counts == counts.counts);
  std::filesystem::remove(path);
}

TEST_CASE("csv trace files round trip") {
  const auto counts = sample_counts(SourceKind::Thermal, MeanPhotonNumber(0.40), 20, 3);
  PulseShape pulse;
  pulse.noise_sigma = 0.0;
  const auto trace = synthesize_trace(counts, pulse, kDefaultSamplePeriod, 4);
  const auto path = temp_file("pd_trace_roundtrip.csv");
  write_trace_csv(trace, path.string());
  const auto loaded = read_trace_csv(path.string());
  REQUIRE(loaded.samples.size() == trace.samples.size());
  CHECK(loaded.sample_period == doctest::Approx(trace.sample_period).epsilon(1e-9));
  CHECK(count_photons(loaded).counts == counts.counts);
  std::filesystem::remove(path);
}

TEST_CASE("malformed trace files raise I/O errors") {
  const auto path = temp_file("pd_trace_bad.ptrc");
  std::ofstream(path) << "not a trace";
  CHECK_THROWS_AS(read_trace(path.string()), IoError);
  CHECK_THROWS_AS(read_trace("/nonexistent/dir/trace.ptrc"), IoError);
  CHECK_THROWS_AS(write_trace(VoltageTrace{}, "/nonexistent/dir/trace.ptrc"), IoError);
  std::filesystem::remove(path);
}
