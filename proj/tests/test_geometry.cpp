#include "riloc/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "riloc/errors.hpp"

using namespace riloc;

namespace {

// Matrix exponential of angle * [axis]_x by truncated power series. Slow
// and independent of the implementation under test.
Mat3 rotation_series_oracle(const Vec3& axis, double angle) {
  Mat3 cross;
  cross << 0, -axis.z(), axis.y(),
           axis.z(), 0, -axis.x(),
          -axis.y(), axis.x(), 0;
  cross *= angle;
  Mat3 term = Mat3::Identity();
  Mat3 sum = Mat3::Identity();
  for (int n = 1; n <= 40; ++n) {
    term = (term * cross / n).eval();
    sum += term;
  }
  return sum;
}

// Hand-expanded yaw(z) * pitch(y) * roll(x) matrix.
Mat3 zyx_oracle(double roll, double pitch, double yaw) {
  const double cx = std::cos(roll), sx = std::sin(roll);
  const double cy = std::cos(pitch), sy = std::sin(pitch);
  const double cz = std::cos(yaw), sz = std::sin(yaw);
  Mat3 r;
  r << cy * cz, cz * sx * sy - cx * sz, cx * cz * sy + sx * sz,
       cy * sz, cx * cz + sx * sy * sz, -cz * sx + cx * sy * sz,
       -sy, cy * sx, cy * cx;
  return r;
}

RisGeometry default_geometry() {
  return {Vec3(5.0, 0.0, 3.0), Vec3(0.0, -5.0, 2.5),
          euler_zyx_rotation(Vec3(0.0, 0.0, 90.0))};
}

UEState default_ue() { return {Vec3(-2.5, 2.5, 0.0), 0.0}; }

Mat4 jacobian_by_fd(const UEState& ue, const RisGeometry& geom) {
  Mat4 J;
  for (int j = 0; j < 4; ++j) {
    const double step = j < 3 ? 1e-6 : 1e-12;
    UEState hi = ue, lo = ue;
    if (j < 3) {
      hi.pos[j] += step;
      lo.pos[j] -= step;
    } else {
      hi.clock_bias_s += step;
      lo.clock_bias_s -= step;
    }
    const Vec4 fhi = location_to_channel_params(hi, geom).to_vector();
    const Vec4 flo = location_to_channel_params(lo, geom).to_vector();
    J.col(j) = (fhi - flo) / (2.0 * step);
  }
  return J;
}

}  // namespace

TEST(WrapAngle, RangeAndPeriodicity) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3.0 * kPi), kPi, 1e-12);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const double w = wrap_angle(x);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(w - x, 2.0 * kPi), 0.0, 1e-9);
    EXPECT_NEAR(wrap_angle(x + 2.0 * kPi), w, 1e-12);
  }
}

TEST(RotationAboutAxis, MatchesSeriesOracle) {
  const Vec3 axes[] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  const Axis ids[] = {Axis::X, Axis::Y, Axis::Z};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 50; ++i) {
      const double angle = u(rng);
      const Mat3 got = rotation_about_axis(ids[k], angle);
      const Mat3 want = rotation_series_oracle(axes[k], angle);
      EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(RotationAboutAxis, QuarterTurnAboutZ) {
  const Mat3 r = rotation_about_axis(Axis::Z, kPi / 2.0);
  Mat3 want;
  want << 0, -1, 0,
          1, 0, 0,
          0, 0, 1;
  EXPECT_LT((r - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(IsRotation, AcceptsRotationsRejectsOthers) {
  EXPECT_TRUE(is_rotation(Mat3::Identity()));
  EXPECT_TRUE(is_rotation(euler_zyx_rotation(Vec3(10.0, -40.0, 170.0))));
  EXPECT_FALSE(is_rotation(2.0 * Mat3::Identity()));
  Mat3 reflection = Mat3::Identity();
  reflection(0, 0) = -1.0;
  EXPECT_FALSE(is_rotation(reflection));
}

TEST(EulerZyx, MatchesHandExpandedMatrix) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-180.0, 180.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 deg(u(rng), u(rng), u(rng));
    const Mat3 got = euler_zyx_rotation(deg);
    const Mat3 want =
        zyx_oracle(deg2rad(deg[0]), deg2rad(deg[1]), deg2rad(deg[2]));
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(is_rotation(got, 1e-16 * 100));
  }
}

TEST(Scenario, AppliesErrorsOnCorrectSides) {
  const Vec3 u(0.1, -0.2, 0.3);
  const Vec3 v(1.0, 2.0, -3.0);
  const Scenario s = Scenario::make(Vec3(5, 0, 3), Vec3(0, -5, 2.5),
                                    Vec3(0, 0, 90), u, v);
  const RisGeometry truth = s.true_geometry();
  const RisGeometry believed = s.assumed_geometry();
  EXPECT_EQ(truth.bs_pos, believed.bs_pos);
  EXPECT_LT((believed.ris_pos - (truth.ris_pos + u)).norm(), 1e-15);
  const Mat3 want_rot = euler_zyx_rotation(v) * truth.ris_rot;
  EXPECT_LT((believed.ris_rot - want_rot).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(is_rotation(believed.ris_rot, 1e-14));
}

TEST(Scenario, RejectsDegenerateAndNonFiniteInput) {
  EXPECT_THROW(Scenario::make(Vec3(1, 2, 3), Vec3(1, 2, 3), Vec3::Zero()),
               ConfigError);
  EXPECT_THROW(Scenario::make(Vec3(std::nan(""), 0, 0), Vec3(1, 2, 3),
                              Vec3::Zero()),
               ConfigError);
}

TEST(LocalDirection, KnownDirections) {
  const Vec3 origin = Vec3::Zero();
  const Angles boresight = local_direction(Vec3(1, 0, 0), origin,
                                           Mat3::Identity());
  EXPECT_NEAR(boresight.az_rad, 0.0, 1e-15);
  EXPECT_NEAR(boresight.el_rad, 0.0, 1e-15);

  const Angles left = local_direction(Vec3(0, 2, 0), origin, Mat3::Identity());
  EXPECT_NEAR(left.az_rad, kPi / 2.0, 1e-15);
  EXPECT_NEAR(left.el_rad, 0.0, 1e-15);

  // Azimuth is defined as zero at the pole.
  const Angles pole = local_direction(Vec3(0, 0, 1), origin, Mat3::Identity());
  EXPECT_DOUBLE_EQ(pole.az_rad, 0.0);
  EXPECT_NEAR(pole.el_rad, kPi / 2.0, 1e-15);

  EXPECT_THROW(local_direction(origin, origin, Mat3::Identity()),
               NumericalError);
}

TEST(LocalDirection, ReferenceDeploymentAngles) {
  const RisGeometry geom = default_geometry();

  // Departure direction to the user, worked out by hand: the surface
  // frame is the global frame yawed by 90 degrees, so local coordinates
  // of the offset [-2.5, 7.5, -2.5] become [7.5, 2.5, -2.5].
  const Angles aod = aod_to_ue(default_ue().pos, geom);
  EXPECT_NEAR(aod.az_rad, std::atan2(2.5, 7.5), 1e-14);
  EXPECT_NEAR(aod.el_rad, std::asin(-2.5 / std::sqrt(68.75)), 1e-14);

  const Angles aoa = aoa_from_bs(geom);
  EXPECT_NEAR(aoa.az_rad, -kPi / 4.0, 1e-14);
  EXPECT_NEAR(aoa.el_rad, std::asin(0.5 / std::sqrt(50.25)), 1e-14);
}

TEST(PathDelays, ReferenceDeploymentValues) {
  const auto [tau_los, tau_ris] = path_delays(default_ue(), default_geometry());
  EXPECT_NEAR(tau_los, std::sqrt(71.5) / kSpeedOfLight, 1e-22);
  EXPECT_NEAR(tau_ris,
              (std::sqrt(50.25) + std::sqrt(68.75)) / kSpeedOfLight, 1e-22);

  // Clock bias shifts both delays equally.
  UEState biased = default_ue();
  biased.clock_bias_s = 7.5e-9;
  const auto [b_los, b_ris] = path_delays(biased, default_geometry());
  EXPECT_DOUBLE_EQ(b_los - tau_los, 7.5e-9);
  EXPECT_DOUBLE_EQ(b_ris - tau_ris, 7.5e-9);
}

TEST(PathDelays, VanishesInTheNearLimitAndThrowsWhenCoincident) {
  RisGeometry geom = default_geometry();
  UEState ue;
  ue.pos = geom.bs_pos + Vec3(1e-9, 0, 0);
  const auto [tau_los, tau_ris] = path_delays(ue, geom);
  EXPECT_LT(tau_los, 1e-17);
  EXPECT_GT(tau_ris, 0.0);

  ue.pos = geom.bs_pos;
  EXPECT_THROW(path_delays(ue, geom), NumericalError);
  ue.pos = geom.ris_pos;
  EXPECT_THROW(path_delays(ue, geom), NumericalError);
}

TEST(LocationJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::uniform_real_distribution<double> clock(-5e-9, 5e-9);
  const RisGeometry geom = default_geometry();
  int checked = 0;
  while (checked < 100) {
    UEState ue{Vec3(box(rng), box(rng), box(rng)), clock(rng)};
    if ((ue.pos - geom.ris_pos).norm() < 0.5) continue;
    if ((ue.pos - geom.bs_pos).norm() < 0.5) continue;
    const Vec3 local = geom.ris_rot.transpose() * (ue.pos - geom.ris_pos);
    if (std::hypot(local.x(), local.y()) / local.norm() < 1e-3) continue;

    const Mat4 analytic = location_jacobian(ue, geom);
    const Mat4 fd = jacobian_by_fd(ue, geom);
    for (int r = 0; r < 4; ++r) {
      const double err = (analytic.row(r) - fd.row(r)).norm();
      EXPECT_LT(err / fd.row(r).norm(), 1e-6) << "row " << r;
    }
    ++checked;
  }
}

TEST(LocationJacobian, DelayGradientGeometry) {
  const RisGeometry geom = default_geometry();
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> box(-8.0, 8.0);
  for (int i = 0; i < 50; ++i) {
    const UEState ue{Vec3(box(rng), box(rng), box(rng)), 0.0};
    if ((ue.pos - geom.ris_pos).norm() < 0.5) continue;
    if ((ue.pos - geom.bs_pos).norm() < 0.5) continue;
    const Vec3 local = geom.ris_rot.transpose() * (ue.pos - geom.ris_pos);
    if (std::hypot(local.x(), local.y()) / local.norm() < 1e-3) continue;
    const Mat4 J = location_jacobian(ue, geom);

    // Each delay responds to position along its own unit direction: both
    // row gradients have norm exactly 1/c (the bs-to-surface leg of the
    // reflected path does not move with the user).
    EXPECT_NEAR(J.row(2).head<3>().norm(), 1.0 / kSpeedOfLight, 1e-23);
    EXPECT_NEAR(J.row(3).head<3>().norm(), 1.0 / kSpeedOfLight, 1e-23);

    // Angles are scale-free along the ray from the surface.
    const Vec3 radial = ue.pos - geom.ris_pos;
    EXPECT_NEAR(J.row(0).head<3>().dot(radial), 0.0, 1e-12);
    EXPECT_NEAR(J.row(1).head<3>().dot(radial), 0.0, 1e-12);

    // Clock column: delays shift one-for-one, angles not at all.
    EXPECT_EQ(J(0, 3), 0.0);
    EXPECT_EQ(J(1, 3), 0.0);
    EXPECT_EQ(J(2, 3), 1.0);
    EXPECT_EQ(J(3, 3), 1.0);
  }
}

TEST(LocationJacobian, CollinearDelayGradientsAdd) {
  // With the user on the bs-surface line beyond the surface, both delay
  // gradients point the same way, so their sum has norm 2/c.
  const RisGeometry geom = default_geometry();
  const Vec3 dir = (geom.ris_pos - geom.bs_pos).normalized();
  const UEState ue{geom.ris_pos + 3.0 * dir, 0.0};
  const Mat4 J = location_jacobian(ue, geom);
  const Vec3 sum = J.block<1, 3>(2, 0) + J.block<1, 3>(3, 0);
  EXPECT_NEAR(sum.norm(), 2.0 / kSpeedOfLight, 1e-20);
}

TEST(LocationJacobian, ThrowsNearElevationPole) {
  const RisGeometry geom{Vec3(5, 0, 3), Vec3::Zero(), Mat3::Identity()};
  const UEState at_pole{Vec3(0, 0, 4), 0.0};
  EXPECT_THROW(location_jacobian(at_pole, geom), NumericalError);
  const UEState near_pole{Vec3(1e-9, 0, 4), 0.0};
  EXPECT_THROW(location_jacobian(near_pole, geom), NumericalError);
}

TEST(LocationParams, InvariantUnderRigidTransform) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const RisGeometry geom = default_geometry();
  const UEState ue = default_ue();
  const GeoChannelParams base = location_to_channel_params(ue, geom);

  for (int i = 0; i < 20; ++i) {
    const Mat3 q = euler_zyx_rotation(
        Vec3(180.0 * u(rng), 90.0 * u(rng), 180.0 * u(rng)));
    const Vec3 shift(10.0 * u(rng), 10.0 * u(rng), 10.0 * u(rng));
    const RisGeometry moved{q * geom.bs_pos + shift, q * geom.ris_pos + shift,
                            q * geom.ris_rot};
    const UEState moved_ue{q * ue.pos + shift, ue.clock_bias_s};
    const GeoChannelParams got = location_to_channel_params(moved_ue, moved);
    EXPECT_NEAR(got.aod_az_rad, base.aod_az_rad, 1e-12);
    EXPECT_NEAR(got.aod_el_rad, base.aod_el_rad, 1e-12);
    EXPECT_NEAR(got.tau_los_s, base.tau_los_s, 1e-22);
    EXPECT_NEAR(got.tau_ris_s, base.tau_ris_s, 1e-22);
  }
}

TEST(LocationHessian, SymmetricSlicesWithInertClockColumn) {
  const auto H = location_hessian(default_ue(), default_geometry());
  for (int m = 0; m < 4; ++m) {
    EXPECT_LT((H[m] - H[m].transpose()).cwiseAbs().maxCoeff(), 1e-18);
    // g is affine in the clock bias, so every slice's clock row is zero.
    EXPECT_EQ(H[m].col(3).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(LocationHessian, MatchesDistanceCurvatureOracle) {
  // The direct-path delay is |p - bs| / c, whose position Hessian is the
  // classic projector form (I - uu') / (c |p - bs|).
  const RisGeometry geom = default_geometry();
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> box(-8.0, 8.0);
  for (int i = 0; i < 20; ++i) {
    const UEState ue{Vec3(box(rng), box(rng), box(rng)), 0.0};
    if ((ue.pos - geom.bs_pos).norm() < 1.0) continue;
    if ((ue.pos - geom.ris_pos).norm() < 1.0) continue;
    const Vec3 local = geom.ris_rot.transpose() * (ue.pos - geom.ris_pos);
    if (std::hypot(local.x(), local.y()) / local.norm() < 1e-2) continue;

    const double dist = (ue.pos - geom.bs_pos).norm();
    const Vec3 unit = (ue.pos - geom.bs_pos) / dist;
    const Mat3 oracle = (Mat3::Identity() - unit * unit.transpose()) /
                        (kSpeedOfLight * dist);
    const auto H = location_hessian(ue, geom);
    const Mat3 got = H[2].topLeftCorner<3, 3>();
    EXPECT_LT((got - oracle).cwiseAbs().maxCoeff() /
                  oracle.cwiseAbs().maxCoeff(),
              1e-6);
  }
}

TEST(LocationHessian, MatchesJacobianDifferencesForAngles) {
  // Independent check of an angle slice: differentiate the analytic
  // Jacobian with a coarser step than the implementation uses.
  const RisGeometry geom = default_geometry();
  const UEState ue = default_ue();
  const auto H = location_hessian(ue, geom);
  const double step = 5e-5;
  for (int j = 0; j < 3; ++j) {
    UEState hi = ue, lo = ue;
    hi.pos[j] += step;
    lo.pos[j] -= step;
    const Mat4 dj =
        (location_jacobian(hi, geom) - location_jacobian(lo, geom)) /
        (2.0 * step);
    for (int m = 0; m < 2; ++m) {
      for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(H[m](i, j), dj(m, i), 5e-6 * std::abs(dj(m, i)) + 1e-9);
      }
    }
  }
}
