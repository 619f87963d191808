#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "photon_discrim/types.hpp"

namespace photon_discrim {

enum class RiseModel { Rectangular, RaisedCosine };

/// Detector pulse template. With the defaults (1.0 V rectangular pulses,
/// 20 mV noise) every pulse clears a 0.5 V threshold with a wide margin and
/// the noise floor stays far below it.
struct PulseShape {
  double amplitude = 1.0;        // volts
  double width = 30e-9;          // seconds
  RiseModel rise = RiseModel::Rectangular;
  double noise_sigma = 0.02;     // volts, additive white Gaussian
};

/// Sampled detector output. `ground_truth` echoes the generating counts when
/// the trace was synthesized; traces read from files carry none.
struct VoltageTrace {
  std::vector<double> samples;
  double sample_period = 10e-9;  // seconds
  double bin_duration = 1e-6;    // seconds
  std::optional<std::vector<int>> ground_truth;
};

inline constexpr double kDefaultThreshold = 0.5;       // volts
inline constexpr double kDefaultBinDuration = 1e-6;    // seconds
inline constexpr double kDefaultSamplePeriod = 10e-9;  // seconds

/// Renders one pulse per photon into a voltage trace. Pulses are placed at
/// jittered offsets inside their bin, kept pairwise separated so each one
/// produces its own above-threshold run. Throws CapacityError (naming the
/// bin) if a bin cannot hold its pulses.
VoltageTrace synthesize_trace(const PhotonCountSequence& counts,
                              const PulseShape& pulse, double sample_period,
                              std::uint64_t seed,
                              double bin_duration = kDefaultBinDuration);

/// Surjective photon counting: splits the trace into consecutive bins and
/// counts maximal runs of samples above the threshold; each run is one
/// photon event, assigned to the bin containing its first sample.
PhotonCountSequence count_photons(const VoltageTrace& trace,
                                  double threshold = kDefaultThreshold,
                                  double bin_duration = kDefaultBinDuration);

/// Binary trace file ("PTRC" magic, little-endian header, float32 samples).
void write_trace(const VoltageTrace& trace, const std::string& path);
VoltageTrace read_trace(const std::string& path);

/// CSV alternative with columns `time_s,volts`.
void write_trace_csv(const VoltageTrace& trace, const std::string& path);
VoltageTrace read_trace_csv(const std::string& path);

}  // namespace photon_discrim
