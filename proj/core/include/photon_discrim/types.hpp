#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace photon_discrim {

/// Raised for malformed run configurations (bad config files, impossible
/// splits, mismatched bin geometry). Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for filesystem problems (unreadable input, unwritable output).
/// Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative training run produces non-finite parameters.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a requested bin cannot physically hold its pulses.
class CapacityError : public std::domain_error {
 public:
  CapacityError(std::size_t bin_index, const std::string& what)
      : std::domain_error(what), bin_index_(bin_index) {}
  std::size_t bin_index() const { return bin_index_; }

 private:
  std::size_t bin_index_;
};

enum class SourceKind { Coherent, Thermal };

inline const char* to_string(SourceKind k) {
  return k == SourceKind::Coherent ? "coherent" : "thermal";
}

inline SourceKind source_kind_from_string(const std::string& s) {
  if (s == "coherent") return SourceKind::Coherent;
  if (s == "thermal") return SourceKind::Thermal;
  throw ConfigError("unknown source kind: \"" + s + "\" (expected \"coherent\" or \"thermal\")");
}

/// Mean photon number per coherence-time bin. Validated on construction:
/// must be finite and strictly positive.
class MeanPhotonNumber {
 public:
  explicit MeanPhotonNumber(double value) : value_(value) {
    if (!std::isfinite(value) || value <= 0.0) {
      throw std::domain_error("mean photon number must be finite and > 0, got " +
                              std::to_string(value));
    }
  }
  double value() const { return value_; }

 private:
  double value_;
};

/// Ordered photon counts, one per time bin. `source`/`nbar`/`seed` record
/// generator provenance when the sequence was simulated; counts recovered
/// from a voltage trace carry no provenance.
struct PhotonCountSequence {
  std::vector<int> counts;
  std::optional<SourceKind> source;
  double nbar = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr int kFeatureDim = 7;

/// Empirical probabilities [P(0)..P(5), P(>=6)] estimated from one subset.
/// `m` is the subset size (0 for analytic vectors, where the entries are the
/// exact distribution values rather than multiples of 1/m).
struct FeatureVector {
  std::array<double, kFeatureDim> probs{};
  int m = 0;
  std::optional<SourceKind> label;
  double nbar = 0.0;
};

}  // namespace photon_discrim
