#pragma once

#include <cstdint>

#include "photon_discrim/types.hpp"

namespace photon_discrim {

/// P_coh(n) = e^(-nbar) nbar^n / n!  (Poissonian photon statistics).
double coherent_pmf(int n, MeanPhotonNumber nbar);

/// P_th(n) = nbar^n / (nbar+1)^(n+1)  (Bose-Einstein photon statistics).
double thermal_pmf(int n, MeanPhotonNumber nbar);

double log_coherent_pmf(int n, MeanPhotonNumber nbar);
double log_thermal_pmf(int n, MeanPhotonNumber nbar);

double pmf(SourceKind source, int n, MeanPhotonNumber nbar);
double log_pmf(SourceKind source, int n, MeanPhotonNumber nbar);

/// Draws m independent counts from the source's distribution. Coherent
/// light uses a Poisson sampler; thermal light uses exact inversion of the
/// geometric form P_th(n) = p (1-p)^n with p = 1/(nbar+1). Identical
/// arguments always produce identical sequences.
PhotonCountSequence sample_counts(SourceKind source, MeanPhotonNumber nbar,
                                  std::size_t m, std::uint64_t seed);

/// Analytic feature vector [P(0)..P(5), P(>=6)]; the last entry accumulates
/// the tail so the vector sums to exactly one.
FeatureVector theoretical_feature_pmf(SourceKind source, MeanPhotonNumber nbar);

}  // namespace photon_discrim
