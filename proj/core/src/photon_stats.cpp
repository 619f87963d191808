#include "photon_discrim/photon_stats.hpp"

#include <cmath>
#include <stdexcept>

#include "photon_discrim/rng.hpp"

namespace photon_discrim {

namespace {

// Above this count the direct product underflows long before double
// precision becomes a concern, so evaluation switches to log space.
constexpr int kDirectEvalLimit = 20;

void check_count(int n) {
  if (n < 0) throw std::domain_error("photon count must be >= 0, got " + std::to_string(n));
}

}  // namespace

double log_coherent_pmf(int n, MeanPhotonNumber nbar) {
  check_count(n);
  const double x = nbar.value();
  return -x + n * std::log(x) - std::lgamma(static_cast<double>(n) + 1.0);
}

double log_thermal_pmf(int n, MeanPhotonNumber nbar) {
  check_count(n);
  const double x = nbar.value();
  return n * std::log(x) - (n + 1) * std::log1p(x);
}

double coherent_pmf(int n, MeanPhotonNumber nbar) {
  check_count(n);
  if (n >= kDirectEvalLimit) return std::exp(log_coherent_pmf(n, nbar));
  const double x = nbar.value();
  double p = std::exp(-x);
  for (int k = 1; k <= n; ++k) p *= x / k;
  return p;
}

double thermal_pmf(int n, MeanPhotonNumber nbar) {
  check_count(n);
  if (n >= kDirectEvalLimit) return std::exp(log_thermal_pmf(n, nbar));
  const double x = nbar.value();
  const double ratio = x / (x + 1.0);
  double p = 1.0 / (x + 1.0);
  for (int k = 1; k <= n; ++k) p *= ratio;
  return p;
}

double pmf(SourceKind source, int n, MeanPhotonNumber nbar) {
  return source == SourceKind::Coherent ? coherent_pmf(n, nbar) : thermal_pmf(n, nbar);
}

double log_pmf(SourceKind source, int n, MeanPhotonNumber nbar) {
  return source == SourceKind::Coherent ? log_coherent_pmf(n, nbar)
                                        : log_thermal_pmf(n, nbar);
}

PhotonCountSequence sample_counts(SourceKind source, MeanPhotonNumber nbar,
                                  std::size_t m, std::uint64_t seed) {
  if (m == 0) throw std::domain_error("sample_counts requires m >= 1");
  Rng rng(seed);
  PhotonCountSequence seq;
  seq.counts.resize(m);
  seq.source = source;
  seq.nbar = nbar.value();
  seq.seed = seed;
  if (source == SourceKind::Coherent) {
    for (std::size_t i = 0; i < m; ++i) seq.counts[i] = rng.poisson(nbar.value());
  } else {
    const double p_success = 1.0 / (nbar.value() + 1.0);
    for (std::size_t i = 0; i < m; ++i) seq.counts[i] = rng.geometric(p_success);
  }
  return seq;
}

FeatureVector theoretical_feature_pmf(SourceKind source, MeanPhotonNumber nbar) {
  FeatureVector fv;
  double head = 0.0;
  for (int n = 0; n < kFeatureDim - 1; ++n) {
    fv.probs[n] = pmf(source, n, nbar);
    head += fv.probs[n];
  }
  fv.probs[kFeatureDim - 1] = std::max(0.0, 1.0 - head);
  fv.m = 0;
  fv.label = source;
  fv.nbar = nbar.value();
  return fv;
}

}  // namespace photon_discrim
