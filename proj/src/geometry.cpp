#include "riloc/geometry.hpp"

#include <cmath>

#include "riloc/errors.hpp"

namespace riloc {

namespace {

constexpr double kCoincidentTol = 1e-12;  // m, anchors/user treated as equal
constexpr double kPoleTol = 1e-6;         // rad from pole where azimuth degenerates
constexpr double kPosStep = 1e-6;         // m, Hessian differencing
constexpr double kClockStep = 1e-12;      // s, Hessian differencing

}  // namespace

double wrap_angle(double rad) {
  double w = std::remainder(rad, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;  // remainder may return -pi exactly
  return w;
}

Mat3 rotation_about_axis(Axis axis, double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  Mat3 R = Mat3::Identity();
  switch (axis) {
    case Axis::X:
      R(1, 1) = c; R(1, 2) = -s;
      R(2, 1) = s; R(2, 2) = c;
      break;
    case Axis::Y:
      R(0, 0) = c; R(0, 2) = s;
      R(2, 0) = -s; R(2, 2) = c;
      break;
    case Axis::Z:
      R(0, 0) = c; R(0, 1) = -s;
      R(1, 0) = s; R(1, 1) = c;
      break;
  }
  return R;
}

bool is_rotation(const Mat3& R, double tol) {
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho < tol && std::abs(R.determinant() - 1.0) < tol;
}

Mat3 euler_zyx_rotation(const Vec3& angles_deg) {
  return rotation_about_axis(Axis::Z, deg2rad(angles_deg[2])) *
         rotation_about_axis(Axis::Y, deg2rad(angles_deg[1])) *
         rotation_about_axis(Axis::X, deg2rad(angles_deg[0]));
}

Scenario Scenario::make(const Vec3& bs_pos, const Vec3& ris_pos,
                        const Vec3& ris_orientation_deg,
                        const Vec3& ris_pos_error_m,
                        const Vec3& ris_ori_error_deg) {
  if (!bs_pos.allFinite() || !ris_pos.allFinite() ||
      !ris_orientation_deg.allFinite() || !ris_pos_error_m.allFinite() ||
      !ris_ori_error_deg.allFinite()) {
    throw ConfigError("scenario: non-finite entry");
  }
  if ((bs_pos - ris_pos).norm() < 1e-9) {
    throw ConfigError("scenario: base station and surface coincide");
  }
  Scenario s;
  s.bs_pos = bs_pos;
  s.ris_pos = ris_pos;
  s.ris_orientation_deg = ris_orientation_deg;
  s.ris_pos_error_m = ris_pos_error_m;
  s.ris_ori_error_deg = ris_ori_error_deg;
  s.ris_rot_ = euler_zyx_rotation(ris_orientation_deg);
  s.ris_rot_assumed_ = euler_zyx_rotation(ris_ori_error_deg) * s.ris_rot_;
  return s;
}

Angles local_direction(const Vec3& target, const Vec3& ris_pos,
                       const Mat3& ris_rot) {
  const Vec3 q = ris_rot.transpose() * (target - ris_pos);
  const double range = q.norm();
  if (range < kCoincidentTol) {
    throw NumericalError("direction undefined: target coincides with surface");
  }
  const double horiz = std::hypot(q.x(), q.y());
  const double el = std::asin(std::clamp(q.z() / range, -1.0, 1.0));
  const double az = horiz == 0.0 ? 0.0 : wrap_angle(std::atan2(q.y(), q.x()));
  return {az, el};
}

std::pair<double, double> path_delays(const UEState& ue,
                                      const RisGeometry& geom) {
  const double d_bu = (ue.pos - geom.bs_pos).norm();
  const double d_ru = (ue.pos - geom.ris_pos).norm();
  if (d_bu < kCoincidentTol || d_ru < kCoincidentTol) {
    throw NumericalError("delay undefined: user coincides with an anchor");
  }
  const double d_br = (geom.ris_pos - geom.bs_pos).norm();
  const double tau_los = d_bu / kSpeedOfLight + ue.clock_bias_s;
  const double tau_ris = (d_br + d_ru) / kSpeedOfLight + ue.clock_bias_s;
  return {tau_los, tau_ris};
}

GeoChannelParams location_to_channel_params(const UEState& ue,
                                            const RisGeometry& geom) {
  const Angles aod = aod_to_ue(ue.pos, geom);
  const auto [tau_los, tau_ris] = path_delays(ue, geom);
  return {aod.az_rad, aod.el_rad, tau_los, tau_ris};
}

Mat4 location_jacobian(const UEState& ue, const RisGeometry& geom) {
  const Vec3 q = geom.ris_rot.transpose() * (ue.pos - geom.ris_pos);
  const double range = q.norm();
  if (range < kCoincidentTol) {
    throw NumericalError("Jacobian undefined: user coincides with surface");
  }
  const double horiz2 = q.x() * q.x() + q.y() * q.y();
  const double horiz = std::sqrt(horiz2);
  if (horiz / range < kPoleTol) {
    throw NumericalError("Jacobian degenerate near elevation pole");
  }
  const double d_bu = (ue.pos - geom.bs_pos).norm();
  if (d_bu < kCoincidentTol) {
    throw NumericalError("Jacobian undefined: user coincides with base station");
  }

  // Angle gradients in the local frame, rotated back to global coordinates.
  const Vec3 grad_az_local(-q.y() / horiz2, q.x() / horiz2, 0.0);
  const double s = q.z() / range;
  const Vec3 grad_el_local = (Vec3::UnitZ() - (s / range) * q) / horiz;

  const Vec3 grad_az = geom.ris_rot * grad_az_local;
  const Vec3 grad_el = geom.ris_rot * grad_el_local;
  const Vec3 grad_tau_los = (ue.pos - geom.bs_pos) / (kSpeedOfLight * d_bu);
  const Vec3 grad_tau_ris = (ue.pos - geom.ris_pos) / (kSpeedOfLight * range);

  Mat4 J = Mat4::Zero();
  J.block<1, 3>(0, 0) = grad_az.transpose();
  J.block<1, 3>(1, 0) = grad_el.transpose();
  J.block<1, 3>(2, 0) = grad_tau_los.transpose();
  J.block<1, 3>(3, 0) = grad_tau_ris.transpose();
  J(2, 3) = 1.0;
  J(3, 3) = 1.0;
  return J;
}

std::array<Mat4, 4> location_hessian(const UEState& ue,
                                     const RisGeometry& geom) {
  std::array<Mat4, 4> H;
  for (auto& slice : H) slice.setZero();

  for (int j = 0; j < 4; ++j) {
    const double step = j < 3 ? kPosStep : kClockStep;
    UEState hi = ue, lo = ue;
    if (j < 3) {
      hi.pos[j] += step;
      lo.pos[j] -= step;
    } else {
      hi.clock_bias_s += step;
      lo.clock_bias_s -= step;
    }
    const Mat4 Jhi = location_jacobian(hi, geom);
    const Mat4 Jlo = location_jacobian(lo, geom);
    const Mat4 col = (Jhi - Jlo) / (2.0 * step);
    for (int m = 0; m < 4; ++m) {
      for (int i = 0; i < 4; ++i) H[m](i, j) = col(m, i);
    }
  }
  for (auto& slice : H) slice = ((slice + slice.transpose()) / 2.0).eval();
  return H;
}

}  // namespace riloc
