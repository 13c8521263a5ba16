#pragma once

#include <string>
#include <vector>

#include "riloc/config.hpp"
#include "riloc/mcrb.hpp"

namespace riloc {

/// One power-sweep point. The estimator columns are filled only when the
/// run was configured with trials > 0.
struct PowerRow {
  double power_dbm = 0.0;
  double lb_m = 0.0;
  double bias_m = 0.0;
  double peb_m = 0.0;
  double mcrb_trace_m2 = 0.0;  // position block of the covariance part
  bool has_rmse = false;
  double rmse_m = 0.0;
  int trials_converged = 0;
};

/// One mismatch-level point: lower-bound statistics across seeded
/// mismatch realizations at fixed transmit power.
struct SigmaRow {
  double sigma = 0.0;  // meters or degrees, depending on the sweep kind
  double lb_min_m = 0.0;
  double lb_mean_m = 0.0;
  double lb_max_m = 0.0;
  int failures = 0;
};

struct PseudoTrueReport {
  PseudoTrue closed;
  double bias_m = 0.0;  // |p0 - true position|
  UEState numerical_state;
  bool numerical_converged = false;
  int numerical_iterations = 0;
  double solver_gap_m = 0.0;  // closed-form vs numerical position gap
  double kld_at_solution = 0.0;
};

/// Channel-estimate covariance for the configured deployment at the given
/// transmit power: signal Jacobians under the true anchors, information
/// matrix, nuisance elimination, inversion. Profiles are regenerated from
/// the run seed, so equal configs give equal covariances.
Mat4 estimate_covariance(const ExperimentConfig& cfg, double power_dbm);

/// Closed-form and iterative pseudo-true solutions for the configured
/// mismatch, cross-checked against each other.
PseudoTrueReport run_pseudo_true(const ExperimentConfig& cfg);

/// Bound-vs-power table over the configured grid. The mismatch (and so
/// the bias column) is fixed; covariance, bounds, and optional estimator
/// trials are recomputed per point.
std::vector<PowerRow> run_power_sweep(const ExperimentConfig& cfg);

/// Bound statistics over random mismatch realizations for sigma values
/// {0, 1, .., 6} times the configured per-axis std. The mode selects
/// whether position or orientation errors are drawn; the other error is
/// zero. Realization draws are shared across sigma values, so each
/// realization's bound rises with sigma and failures are counted per row.
std::vector<SigmaRow> run_sigma_sweep(const ExperimentConfig& cfg);

/// CSV schema: power_dbm, lb_m, bias_m, peb_m, mcrb_trace_m2 and, when
/// any row carries estimator results, rmse_m, trials_converged.
void write_power_csv(const std::vector<PowerRow>& rows,
                     const std::string& path);

/// CSV schema: sigma, lb_min_m, lb_mean_m, lb_max_m, failures.
void write_sigma_csv(const std::vector<SigmaRow>& rows,
                     const std::string& path);

}  // namespace riloc
