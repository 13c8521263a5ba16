#include "riloc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "riloc/errors.hpp"

namespace riloc {

uint64_t derive_seed(uint64_t master, uint64_t index) {
  // splitmix64 finalizer over a golden-ratio indexed stream
  uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vec4 sample_channel_estimate(const UEState& truth,
                             const RisGeometry& true_geom, const Mat4& sigma,
                             uint64_t seed) {
  // Factor sigma = (D L)(D L)' with D from diagonal equilibration, so the
  // Cholesky runs on a correlation-like matrix despite mixed units.
  Vec4 scale;
  for (int i = 0; i < 4; ++i) {
    if (!(sigma(i, i) > 0.0)) {
      throw NumericalError("covariance not positive definite");
    }
    scale[i] = std::sqrt(sigma(i, i));
  }
  const Mat4 balanced = scale.cwiseInverse().asDiagonal() * sigma *
                        scale.cwiseInverse().asDiagonal();
  Eigen::LLT<Mat4> llt(balanced);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("covariance not positive definite");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  Vec4 z;
  for (int i = 0; i < 4; ++i) z[i] = unit_normal(rng);

  const Vec4 mean = location_to_channel_params(truth, true_geom).to_vector();
  return mean + scale.asDiagonal() * (Mat4(llt.matrixL()) * z);
}

FitResult mml_estimate(const Vec4& eta_sample,
                       const RisGeometry& assumed_geom, const Mat4& sigma,
                       const UEState& init) {
  FitOptions opts;
  opts.step_tol_m = 1e-10;
  return fit_location(eta_sample, assumed_geom, sigma, init, opts);
}

std::vector<TrialResult> run_trials(const UEState& truth,
                                    const RisGeometry& true_geom,
                                    const RisGeometry& assumed_geom,
                                    const Mat4& sigma, int num_trials,
                                    uint64_t master_seed) {
  std::vector<TrialResult> trials;
  trials.reserve(std::max(num_trials, 0));
  for (int t = 0; t < num_trials; ++t) {
    TrialResult trial;
    trial.trial_index = t;
    trial.eta_sample = sample_channel_estimate(
        truth, true_geom, sigma, derive_seed(master_seed, t));
    const FitResult fit =
        mml_estimate(trial.eta_sample, assumed_geom, sigma, truth);
    trial.estimate = fit.state;
    trial.converged = fit.converged;
    trial.position_error_m = (fit.state.pos - truth.pos).norm();
    trials.push_back(trial);
  }
  return trials;
}

double rmse(const std::vector<TrialResult>& trials) {
  std::vector<const TrialResult*> ordered;
  ordered.reserve(trials.size());
  for (const auto& t : trials) {
    if (t.converged) ordered.push_back(&t);
  }
  if (ordered.empty()) throw NumericalError("no converged trials");
  std::sort(ordered.begin(), ordered.end(),
            [](const TrialResult* a, const TrialResult* b) {
              return a->trial_index < b->trial_index;
            });
  double sum_sq = 0.0;
  for (const TrialResult* t : ordered) {
    sum_sq += t->position_error_m * t->position_error_m;
  }
  return std::sqrt(sum_sq / static_cast<double>(ordered.size()));
}

}  // namespace riloc
