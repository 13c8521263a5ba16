#pragma once

#include <Eigen/Dense>
#include <array>
#include <utility>

namespace riloc {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact
inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double rad);

enum class Axis { X, Y, Z };

/// Right-handed rotation by `angle_rad` about a coordinate axis.
Mat3 rotation_about_axis(Axis axis, double angle_rad);

/// True when R is a proper rotation: R^T R = I and det R = +1, within tol.
bool is_rotation(const Mat3& R, double tol = 1e-12);

/// Rotation built from intrinsic Z-Y-X angles given in degrees,
/// R = Rz(deg[2]) * Ry(deg[1]) * Rx(deg[0]).
Mat3 euler_zyx_rotation(const Vec3& angles_deg);

/// One deployment of the anchors as a localization algorithm sees it:
/// base station position, reflecting surface position and orientation,
/// all in global coordinates. Which calibration state it represents
/// (true or assumed) is decided by the caller.
struct RisGeometry {
  Vec3 bs_pos;
  Vec3 ris_pos;
  Mat3 ris_rot;
};

/// Full deployment description: the true anchor placement plus the
/// calibration errors that separate it from what the system believes.
struct Scenario {
  Vec3 bs_pos;
  Vec3 ris_pos;
  Vec3 ris_orientation_deg;  // Z-Y-X angles of the true surface orientation
  Vec3 ris_pos_error_m;      // believed position = true + this
  Vec3 ris_ori_error_deg;    // believed rotation = perturbation * true

  /// Validates inputs and precomputes both rotation matrices.
  /// Throws ConfigError when bs and ris coincide.
  static Scenario make(const Vec3& bs_pos, const Vec3& ris_pos,
                       const Vec3& ris_orientation_deg,
                       const Vec3& ris_pos_error_m = Vec3::Zero(),
                       const Vec3& ris_ori_error_deg = Vec3::Zero());

  RisGeometry true_geometry() const { return {bs_pos, ris_pos, ris_rot_}; }
  RisGeometry assumed_geometry() const {
    return {bs_pos, ris_pos + ris_pos_error_m, ris_rot_assumed_};
  }

 private:
  Mat3 ris_rot_ = Mat3::Identity();
  Mat3 ris_rot_assumed_ = Mat3::Identity();
};

/// User state: position [m] and clock bias [s].
struct UEState {
  Vec3 pos;
  double clock_bias_s = 0.0;
};

struct Angles {
  double az_rad;
  double el_rad;
};

/// Geometric channel parameters in the fixed ordering used throughout:
/// [departure azimuth, departure elevation, direct delay, reflected delay].
struct GeoChannelParams {
  double aod_az_rad;
  double aod_el_rad;
  double tau_los_s;
  double tau_ris_s;

  Vec4 to_vector() const {
    return Vec4(aod_az_rad, aod_el_rad, tau_los_s, tau_ris_s);
  }
};

/// Azimuth/elevation of `target` as seen from the surface at `ris_pos`
/// with orientation `ris_rot`, measured in the surface's local frame.
/// Azimuth lies in (-pi, pi] and is defined as 0 at the elevation poles.
/// Throws NumericalError when target coincides with the surface.
Angles local_direction(const Vec3& target, const Vec3& ris_pos,
                       const Mat3& ris_rot);

/// Departure direction from the surface towards the user.
inline Angles aod_to_ue(const Vec3& ue_pos, const RisGeometry& geom) {
  return local_direction(ue_pos, geom.ris_pos, geom.ris_rot);
}

/// Arrival direction at the surface from the base station.
inline Angles aoa_from_bs(const RisGeometry& geom) {
  return local_direction(geom.bs_pos, geom.ris_pos, geom.ris_rot);
}

/// Biased propagation delays of the direct and reflected paths [s]:
/// first = |ue - bs|/c + clock_bias, second adds the bs->ris leg.
/// Throws NumericalError when the user coincides with an anchor.
std::pair<double, double> path_delays(const UEState& ue,
                                      const RisGeometry& geom);

/// Maps user position and clock bias to the geometric channel parameters
/// under the given deployment.
GeoChannelParams location_to_channel_params(const UEState& ue,
                                            const RisGeometry& geom);

/// 4x4 Jacobian of location_to_channel_params with respect to
/// [pos_x, pos_y, pos_z, clock_bias]. Rows follow GeoChannelParams
/// ordering. Analytic; throws NumericalError within 1e-6 rad of an
/// elevation pole where the azimuth derivative degenerates.
Mat4 location_jacobian(const UEState& ue, const RisGeometry& geom);

/// Second derivatives of the same map: element m of the result holds
/// d^2 params[m] / d state_i d state_j. Central differences of the
/// analytic Jacobian; each slice is symmetrized.
std::array<Mat4, 4> location_hessian(const UEState& ue,
                                     const RisGeometry& geom);

}  // namespace riloc
