#pragma once

#include "riloc/fim.hpp"
#include "riloc/geometry.hpp"

namespace riloc {

struct FitOptions {
  double step_tol_m = 1e-10;     // step norm in meter-equivalent coordinates
  int max_iterations = 200;
  double initial_damping = 1e-6;
};

struct FitResult {
  UEState state;
  bool converged = false;
  int iterations = 0;
  double final_step_m = 0.0;
  double gradient_norm = 0.0;  // in meter-equivalent coordinates
  double cost = 0.0;           // 0.5 * residual' Sigma^-1 residual
};

/// Weighted least-squares fit of a user state to observed channel
/// parameters under the given deployment: minimizes
/// 0.5 (observed - g(r))' Sigma^-1 (observed - g(r)) by damped
/// Gauss-Newton. Azimuth residuals are wrapped to (-pi, pi]. Iterates in
/// [position; c * clock_bias] coordinates; damping grows tenfold on a
/// rejected step and shrinks tenfold on an accepted one. Accepted steps
/// never increase the cost, so the returned state is the best iterate.
/// Non-convergence is flagged on the result, not thrown.
FitResult fit_location(const Vec4& observed, const RisGeometry& geom,
                       const Mat4& sigma, const UEState& init,
                       const FitOptions& opts = {});

}  // namespace riloc
