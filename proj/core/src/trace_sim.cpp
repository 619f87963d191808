#include "photon_discrim/trace_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "photon_discrim/rng.hpp"

namespace photon_discrim {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Enforced spacing between consecutive pulses, in sample periods. Two clean
// samples between runs keep them distinct under the run-counting rule.
constexpr int kMinGapSamples = 2;

// Returns samples-per-bin, validating that the bin is an integer multiple of
// the sample period.
std::size_t samples_per_bin(double bin_duration, double sample_period) {
  if (sample_period <= 0.0 || bin_duration <= 0.0) {
    throw ConfigError("bin duration and sample period must be > 0");
  }
  const double ratio = bin_duration / sample_period;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "bin duration " << bin_duration << " s is not an integer multiple of sample period "
        << sample_period << " s";
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(rounded);
}

double pulse_value(const PulseShape& pulse, double t_from_start) {
  if (t_from_start < 0.0 || t_from_start >= pulse.width) return 0.0;
  if (pulse.rise == RiseModel::Rectangular) return pulse.amplitude;
  // Raised cosine: 0 at both edges, peak amplitude at the centre.
  return pulse.amplitude * 0.5 * (1.0 - std::cos(2.0 * kPi * t_from_start / pulse.width));
}

void put_u16_le(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64_le(std::ostream& os, double v) { put_u64_le(os, std::bit_cast<std::uint64_t>(v)); }

void put_f32_le(std::ostream& os, float v) {
  std::uint32_t u = std::bit_cast<std::uint32_t>(v);
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint16_t get_u16_le(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint64_t get_u64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64_le(std::istream& is) { return std::bit_cast<double>(get_u64_le(is)); }

float get_f32_le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t u = 0;
  for (int i = 3; i >= 0; --i) u = (u << 8) | b[i];
  return std::bit_cast<float>(u);
}

}  // namespace

VoltageTrace synthesize_trace(const PhotonCountSequence& counts,
                              const PulseShape& pulse, double sample_period,
                              std::uint64_t seed, double bin_duration) {
  const std::size_t per_bin = samples_per_bin(bin_duration, sample_period);
  const std::size_t n_bins = counts.counts.size();
  if (n_bins == 0) throw std::domain_error("synthesize_trace requires at least one bin");

  const double min_gap = kMinGapSamples * sample_period;
  VoltageTrace trace;
  trace.sample_period = sample_period;
  trace.bin_duration = bin_duration;
  trace.samples.assign(n_bins * per_bin, 0.0);
  trace.ground_truth = counts.counts;

  Rng rng(seed);
  for (std::size_t bin = 0; bin < n_bins; ++bin) {
    const int c = counts.counts[bin];
    if (c < 0) throw std::domain_error("negative photon count in bin " + std::to_string(bin));
    if (c == 0) continue;
    if (c * (pulse.width + min_gap) > bin_duration) {
      std::ostringstream msg;
      msg << "bin " << bin << " cannot hold " << c << " pulses of width " << pulse.width
          << " s (plus " << min_gap << " s gap) within " << bin_duration << " s";
      throw CapacityError(bin, msg.str());
    }
    // One slot per pulse; jitter inside the slot keeps pulses >= min_gap apart.
    const double slot = bin_duration / c;
    const double free_range = std::max(0.0, slot - pulse.width - min_gap);
    for (int k = 0; k < c; ++k) {
      const double start = bin * bin_duration + k * slot + 0.5 * min_gap +
                           rng.uniform() * free_range;
      const std::size_t first = static_cast<std::size_t>(std::ceil(start / sample_period));
      for (std::size_t s = first; s < trace.samples.size(); ++s) {
        const double offset = s * sample_period - start;
        if (offset >= pulse.width) break;
        trace.samples[s] += pulse_value(pulse, offset);
      }
    }
  }

  if (pulse.noise_sigma > 0.0) {
    for (double& v : trace.samples) v += rng.gaussian(pulse.noise_sigma);
  }
  return trace;
}

PhotonCountSequence count_photons(const VoltageTrace& trace, double threshold,
                                  double bin_duration) {
  if (trace.samples.empty()) throw std::domain_error("count_photons requires a non-empty trace");
  if (threshold <= 0.0) throw std::domain_error("threshold must be > 0");
  const std::size_t per_bin = samples_per_bin(bin_duration, trace.sample_period);
  const std::size_t n_bins = trace.samples.size() / per_bin;

  PhotonCountSequence out;
  out.counts.assign(n_bins, 0);
  bool in_run = false;
  for (std::size_t s = 0; s < trace.samples.size(); ++s) {
    const bool above = trace.samples[s] > threshold;
    if (above && !in_run) {
      // A run straddling a bin boundary belongs to the bin of its first sample.
      const std::size_t bin = s / per_bin;
      if (bin < n_bins) ++out.counts[bin];
    }
    in_run = above;
  }
  return out;
}

void write_trace(const VoltageTrace& trace, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open trace file for writing: " + path);
  os.write("PTRC", 4);
  put_u16_le(os, 1);
  put_f64_le(os, trace.sample_period);
  put_u64_le(os, trace.samples.size());
  for (double v : trace.samples) put_f32_le(os, static_cast<float>(v));
  if (!os) throw IoError("failed writing trace file: " + path);
}

VoltageTrace read_trace(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open trace file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PTRC", 4) != 0) {
    throw IoError("not a PTRC trace file: " + path);
  }
  const std::uint16_t version = get_u16_le(is);
  if (version != 1) {
    throw IoError("unsupported PTRC version " + std::to_string(version) + " in " + path);
  }
  VoltageTrace trace;
  trace.sample_period = get_f64_le(is);
  const std::uint64_t n = get_u64_le(is);
  trace.samples.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) trace.samples[i] = get_f32_le(is);
  if (!is) throw IoError("truncated PTRC trace file: " + path);
  return trace;
}

void write_trace_csv(const VoltageTrace& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open trace CSV for writing: " + path);
  os << "time_s,volts\n";
  char line[64];
  for (std::size_t s = 0; s < trace.samples.size(); ++s) {
    std::snprintf(line, sizeof(line), "%.9e,%.6f\n", s * trace.sample_period,
                  trace.samples[s]);
    os << line;
  }
  if (!os) throw IoError("failed writing trace CSV: " + path);
}

VoltageTrace read_trace_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open trace CSV: " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("time_s,volts", 0) != 0) {
    throw IoError("missing time_s,volts header in " + path);
  }
  VoltageTrace trace;
  std::vector<double> times;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError("malformed trace CSV row in " + path);
    times.push_back(std::stod(line.substr(0, comma)));
    trace.samples.push_back(std::stod(line.substr(comma + 1)));
  }
  if (trace.samples.size() < 2) throw IoError("trace CSV has fewer than two samples: " + path);
  trace.sample_period = times[1] - times[0];
  return trace;
}

}  // namespace photon_discrim
