#include "riloc/mcrb.hpp"

#include <cmath>

#include "riloc/errors.hpp"

namespace riloc {

namespace {

constexpr double kDenominatorTol = 1e-12;   // m^2
constexpr double kGeometryTol = 1e-9;       // m, line/sheet violations
constexpr double kClockTol = 1e-12;         // s

Vec4 wrapped_param_diff(const Vec4& lhs, const Vec4& rhs) {
  Vec4 h = lhs - rhs;
  h[0] = wrap_angle(h[0]);
  return h;
}

Mat4 clock_to_meters() {
  Mat4 s = Mat4::Identity();
  s(3, 3) = 1.0 / kSpeedOfLight;
  return s;
}

bool geometries_identical(const RisGeometry& a, const RisGeometry& b) {
  return a.bs_pos == b.bs_pos && a.ris_pos == b.ris_pos &&
         a.ris_rot == b.ris_rot;
}

}  // namespace

double kld(const UEState& r, const UEState& truth,
           const RisGeometry& true_geom, const RisGeometry& assumed_geom,
           const Mat4& sigma) {
  const Vec4 h = wrapped_param_diff(
      location_to_channel_params(truth, true_geom).to_vector(),
      location_to_channel_params(r, assumed_geom).to_vector());
  const Mat4 weights = spd_inverse(sigma, "covariance not positive definite");
  return 0.5 * h.dot(weights * h);
}

PseudoTrue pseudo_true_closed_form(const UEState& truth,
                                   const RisGeometry& true_geom,
                                   const RisGeometry& assumed_geom) {
  const Vec3& bs = true_geom.bs_pos;         // shared by both models
  const Vec3& surf_true = true_geom.ris_pos;
  const Vec3& surf_bel = assumed_geom.ris_pos;

  PseudoTrue out;

  // The believed departure ray: the true departure direction expressed in
  // believed coordinates, anchored at the believed surface position.
  out.line_direction = assumed_geom.ris_rot * true_geom.ris_rot.transpose() *
                       (truth.pos - surf_true);

  out.path_offset_m = (bs - surf_bel).norm() + (bs - truth.pos).norm() -
                      (bs - surf_true).norm();
  out.range_diff_m = (truth.pos - surf_true).norm() - out.path_offset_m;

  if (geometries_identical(true_geom, assumed_geom)) {
    // Exact degeneracy: the believed model reproduces the observation at
    // the true state itself.
    out.state = truth;
    out.line_scale = 1.0;
    out.residual.setZero();
    out.line_distance_m = 0.0;
    out.hyperboloid_residual_m = 0.0;
    out.clock_consistency_s = 0.0;
    return out;
  }

  const Vec3 surf_to_bs = surf_bel - bs;
  const double beta = out.range_diff_m;
  const double denom =
      2.0 * (out.line_direction.dot(surf_to_bs) +
             beta * out.line_direction.norm());
  if (std::abs(denom) < kDenominatorTol) {
    throw NumericalError("degenerate intersection");
  }
  out.line_scale = (beta * beta - surf_to_bs.squaredNorm()) / denom;
  if (out.line_scale <= 0.0) {
    throw NumericalError("intersection behind surface");
  }

  out.state.pos = out.line_scale * out.line_direction + surf_bel;
  out.state.clock_bias_s =
      truth.clock_bias_s +
      ((bs - truth.pos).norm() - (bs - out.state.pos).norm()) / kSpeedOfLight;

  // Self-consistency. The squared sheet equation admits a spurious branch;
  // these checks reject it and any near-degenerate arithmetic.
  const Vec3 unit_dir = out.line_direction.normalized();
  const Vec3 offset = out.state.pos - surf_bel;
  out.line_distance_m = (offset - offset.dot(unit_dir) * unit_dir).norm();
  out.hyperboloid_residual_m = std::abs(
      (out.state.pos - surf_bel).norm() - (out.state.pos - bs).norm() - beta);

  const double clock_from_reflected =
      truth.clock_bias_s +
      ((bs - surf_true).norm() + (surf_true - truth.pos).norm() -
       (bs - surf_bel).norm() - (surf_bel - out.state.pos).norm()) /
          kSpeedOfLight;
  out.clock_consistency_s =
      std::abs(out.state.clock_bias_s - clock_from_reflected);

  out.residual = wrapped_param_diff(
      location_to_channel_params(truth, true_geom).to_vector(),
      location_to_channel_params(out.state, assumed_geom).to_vector());

  if (out.line_distance_m > kGeometryTol ||
      out.hyperboloid_residual_m > kGeometryTol ||
      out.clock_consistency_s > kClockTol ||
      out.residual.cwiseAbs().maxCoeff() > 1e-9) {
    throw NumericalError("pseudo-true solution failed self-consistency");
  }
  return out;
}

FitResult pseudo_true_numerical(const UEState& truth,
                                const RisGeometry& true_geom,
                                const RisGeometry& assumed_geom,
                                const Mat4& sigma, const UEState& init) {
  const Vec4 observed =
      location_to_channel_params(truth, true_geom).to_vector();
  FitOptions opts;
  opts.step_tol_m = 1e-12;
  return fit_location(observed, assumed_geom, sigma, init, opts);
}

Mat4 mismatch_curvature(const UEState& r0, const RisGeometry& assumed_geom,
                        const Mat4& sigma, const Vec4& eta_true) {
  const Mat4 weights = spd_inverse(sigma, "covariance not positive definite");
  const Mat4 g = location_jacobian(r0, assumed_geom);
  const auto hess = location_hessian(r0, assumed_geom);
  const Vec4 h = wrapped_param_diff(
      eta_true, location_to_channel_params(r0, assumed_geom).to_vector());
  const Vec4 weighted_h = weights * h;

  Mat4 a = -(g.transpose() * weights * g);
  for (int m = 0; m < 4; ++m) a += weighted_h[m] * hess[m];
  return ((a + a.transpose()) / 2.0).eval();
}

Mat4 score_covariance(const UEState& r0, const RisGeometry& assumed_geom,
                      const Mat4& sigma, const Vec4& eta_true) {
  const Mat4 weights = spd_inverse(sigma, "covariance not positive definite");
  const Mat4 g = location_jacobian(r0, assumed_geom);
  const Vec4 h = wrapped_param_diff(
      eta_true, location_to_channel_params(r0, assumed_geom).to_vector());
  const Vec4 u = g.transpose() * (weights * h);
  const Mat4 b = g.transpose() * weights * g + u * u.transpose();
  return ((b + b.transpose()) / 2.0).eval();
}

BoundReport bound_report(const UEState& truth, const UEState& r0,
                         const Mat4& curvature, const Mat4& score_cov,
                         const Mat4& sigma, const RisGeometry& true_geom) {
  // Rescaling the clock to meters is exact (diagonal) and keeps the
  // curvature inversion conditioned despite mixed meter/second units.
  const Mat4 scale = clock_to_meters();
  const Mat4 neg_curv_scaled = -(scale * curvature * scale);
  const Mat4 inv_curv_scaled = spd_inverse(neg_curv_scaled, "MCRB undefined");
  const Mat4 score_scaled = scale * score_cov * scale;
  const Mat4 mcrb_scaled = inv_curv_scaled * score_scaled * inv_curv_scaled;

  BoundReport report;
  report.mcrb = scale * ((mcrb_scaled + mcrb_scaled.transpose()) / 2.0) * scale;

  Vec4 bias;
  bias << truth.pos - r0.pos, truth.clock_bias_s - r0.clock_bias_s;
  report.bias_outer = bias * bias.transpose();
  report.lbm = report.mcrb + report.bias_outer;
  report.lb_m = std::sqrt(report.lbm.topLeftCorner<3, 3>().trace());
  report.bias_norm_pos_m = bias.head<3>().norm();
  report.peb_m = position_error_bound(truth, true_geom, sigma);
  return report;
}

}  // namespace riloc
