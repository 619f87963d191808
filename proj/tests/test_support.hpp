#pragma once

// Shared helpers for the unit and acceptance suites: synthetic linearly
// separable collections and the independent naive-Bayes product oracle.

#include <array>
#include <cmath>
#include <vector>

#include "photon_discrim/dataset.hpp"
#include "photon_discrim/neural_nets.hpp"
#include "photon_discrim/photon_stats.hpp"
#include "photon_discrim/rng.hpp"
#include "photon_discrim/types.hpp"

namespace photon_discrim::testing {

/// Two tight point clouds far apart along the first two feature axes; any
/// sane classifier must separate them perfectly.
inline SubsetCollection separable_clouds(int per_class, std::uint64_t seed) {
  SubsetCollection col;
  col.m = 100;
  col.n_subsets_per_class = per_class;
  col.split_fraction = 1.0;
  col.nbar = 0.5;
  Rng rng(seed);
  for (int i = 0; i < 2 * per_class; ++i) {
    const bool coherent = i < per_class;
    Subset s;
    s.id = i;
    FeatureVector fv;
    const double base0 = coherent ? 0.85 : 0.15;
    const double jitter = 0.02 * (rng.uniform() - 0.5);
    fv.probs[0] = base0 + jitter;
    fv.probs[1] = 1.0 - fv.probs[0];
    fv.m = col.m;
    fv.label = coherent ? SourceKind::Coherent : SourceKind::Thermal;
    fv.nbar = col.nbar;
    s.features = fv;
    s.counts.source = fv.label;
    s.counts.counts.assign(4, coherent ? 1 : 0);
    col.subsets.push_back(std::move(s));
  }
  return col;
}

/// Random inputs and labels for gradient checks, deliberately unrelated to
/// photon data so the check exercises arbitrary activations.
inline LabeledBatch random_batch(int n, std::uint64_t seed) {
  LabeledBatch batch;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    std::array<double, kFeatureDim> x;
    for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
    batch.inputs.push_back(x);
    batch.labels.push_back(rng.uniform() < 0.5 ? 0 : 1);
  }
  return batch;
}

/// Worst per-parameter relative error between the analytic gradient and a
/// central finite difference. The denominator is floored at the mean
/// absolute gradient: below that scale a two-point difference of O(1) losses
/// is pure cancellation noise, not signal about the gradient.
template <typename Model, typename LossFn, typename GradFn>
double max_relative_gradient_error(Model& model, const LabeledBatch& batch,
                                   LossFn&& loss_fn, GradFn&& grad_fn) {
  double loss = 0.0;
  std::vector<double> grad;
  grad_fn(model, batch, loss, grad);
  double gscale = 0.0;
  for (double g : grad) gscale += std::abs(g);
  gscale /= static_cast<double>(grad.size());

  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const double saved = model.params[i];
    model.params[i] = saved + h;
    const double up = loss_fn(model, batch);
    model.params[i] = saved - h;
    const double down = loss_fn(model, batch);
    model.params[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[i]), gscale});
    worst = std::max(worst, std::abs(fd - grad[i]) / denom);
  }
  return worst;
}

/// Direct-product naive Bayes (no logarithms): the oracle the log-space
/// implementation is checked against on short sequences.
struct DirectNbResult {
  SourceKind label;
  double log_margin;
};

inline DirectNbResult nb_direct_product(const std::vector<int>& counts, double nbar,
                                        double prior = 0.5) {
  const MeanPhotonNumber x(nbar);
  double post_coh = prior;
  double post_th = 1.0 - prior;
  for (int c : counts) {
    post_coh *= coherent_pmf(c, x);
    post_th *= thermal_pmf(c, x);
  }
  if (post_coh > post_th) return {SourceKind::Coherent, std::log(post_coh / post_th)};
  return {SourceKind::Thermal, std::log(post_th / post_coh)};
}

}  // namespace photon_discrim::testing
