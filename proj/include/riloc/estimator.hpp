#pragma once

#include <cstdint>
#include <vector>

#include "riloc/fim.hpp"
#include "riloc/geometry.hpp"
#include "riloc/solver.hpp"

namespace riloc {

struct TrialResult {
  int trial_index = 0;
  Vec4 eta_sample = Vec4::Zero();
  UEState estimate;
  bool converged = false;
  double position_error_m = 0.0;  // against the true position
};

/// Deterministic stream split: child seed for (master, index).
uint64_t derive_seed(uint64_t master, uint64_t index);

/// One draw from N(g(truth | true anchors), sigma), deterministic per seed.
Vec4 sample_channel_estimate(const UEState& truth,
                             const RisGeometry& true_geom, const Mat4& sigma,
                             uint64_t seed);

/// Location fit of a channel-estimate sample under the believed anchors:
/// the maximum-likelihood estimate of the (generally wrong) assumed model.
/// Step tolerance 1e-10 m equivalent, at most 200 iterations.
FitResult mml_estimate(const Vec4& eta_sample,
                       const RisGeometry& assumed_geom, const Mat4& sigma,
                       const UEState& init);

/// num_trials independent draw-and-fit rounds, trial seeds derived from
/// (master_seed, trial index), every fit initialized at the true state.
std::vector<TrialResult> run_trials(const UEState& truth,
                                    const RisGeometry& true_geom,
                                    const RisGeometry& assumed_geom,
                                    const Mat4& sigma, int num_trials,
                                    uint64_t master_seed);

/// Root mean squared position error over converged trials, accumulated in
/// trial-index order regardless of input order. Throws NumericalError
/// when no trial converged.
double rmse(const std::vector<TrialResult>& trials);

}  // namespace riloc
