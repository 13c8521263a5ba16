#include "riloc/solver.hpp"

#include <cmath>

#include "riloc/errors.hpp"

namespace riloc {

namespace {

constexpr double kMaxDamping = 1e15;
constexpr double kMinDamping = 1e-15;

Vec4 wrapped_residual(const Vec4& observed, const UEState& state,
                      const RisGeometry& geom) {
  Vec4 r = observed - location_to_channel_params(state, geom).to_vector();
  r[0] = wrap_angle(r[0]);
  return r;
}

UEState apply_step(const UEState& state, const Vec4& dx) {
  UEState next = state;
  next.pos += dx.head<3>();
  next.clock_bias_s += dx[3] / kSpeedOfLight;
  return next;
}

}  // namespace

FitResult fit_location(const Vec4& observed, const RisGeometry& geom,
                       const Mat4& sigma, const UEState& init,
                       const FitOptions& opts) {
  const Mat4 weights = spd_inverse(sigma, "covariance not positive definite");
  Mat4 scale = Mat4::Identity();
  scale(3, 3) = 1.0 / kSpeedOfLight;

  FitResult result;
  result.state = init;

  Vec4 residual;
  try {
    residual = wrapped_residual(observed, result.state, geom);
  } catch (const NumericalError&) {
    return result;  // infeasible start, flagged by converged = false
  }
  result.cost = 0.5 * residual.dot(weights * residual);

  double damping = opts.initial_damping;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    result.iterations = it;

    Mat4 g_scaled;
    try {
      g_scaled = location_jacobian(result.state, geom) * scale;
    } catch (const NumericalError&) {
      return result;  // current iterate hit degenerate geometry
    }
    const Vec4 gradient = g_scaled.transpose() * (weights * residual);
    const Mat4 normal = g_scaled.transpose() * weights * g_scaled;
    result.gradient_norm = gradient.norm();

    bool accepted = false;
    Vec4 step = Vec4::Zero();
    UEState candidate;
    Vec4 cand_residual;
    double cand_cost = 0.0;
    while (damping <= kMaxDamping) {
      Mat4 damped = normal;
      damped.diagonal() += damping * normal.diagonal();
      step = damped.ldlt().solve(gradient);
      if (step.allFinite()) {
        candidate = apply_step(result.state, step);
        bool feasible = true;
        try {
          cand_residual = wrapped_residual(observed, candidate, geom);
          cand_cost = 0.5 * cand_residual.dot(weights * cand_residual);
        } catch (const NumericalError&) {
          feasible = false;
        }
        if (feasible && std::isfinite(cand_cost) && cand_cost <= result.cost) {
          accepted = true;
          break;
        }
      }
      damping *= 10.0;
    }
    if (!accepted) {
      result.final_step_m = 0.0;
      return result;  // damping exhausted without a descent step
    }

    result.state = candidate;
    residual = cand_residual;
    result.cost = cand_cost;
    result.final_step_m = step.norm();
    damping = std::max(damping / 10.0, kMinDamping);

    if (result.final_step_m < opts.step_tol_m) {
      result.converged = true;
      return result;
    }
  }
  return result;  // iteration budget exhausted
}

}  // namespace riloc
