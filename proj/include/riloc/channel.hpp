#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "riloc/geometry.hpp"

namespace riloc {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Cplx = std::complex<double>;

/// OFDM waveform and radio settings. Subcarrier k (1-based) sits at
/// fc + (2k - 1 - K) * spacing / 2, so the grid is symmetric about fc.
struct SignalConfig {
  double fc_hz = 28e9;
  double bandwidth_hz = 400e6;
  int num_subcarriers = 3000;   // K
  int num_blocks = 32;          // L, one RIS profile per block
  double power_dbm = 10.0;
  double noise_psd_dbm_hz = -173.855;
  double noise_figure_db = 10.0;

  double subcarrier_spacing_hz() const {
    return bandwidth_hz / num_subcarriers;
  }
  double subcarrier_frequency_hz(int k) const {
    return fc_hz + (2 * k - 1 - num_subcarriers) * subcarrier_spacing_hz() / 2;
  }
  double wavelength_m() const { return kSpeedOfLight / fc_hz; }
  double power_w() const { return std::pow(10.0, power_dbm / 10.0 - 3.0); }

  /// Throws ConfigError on K < 2, L < 1, or non-positive fc/B.
  void validate() const;
};

/// Reflecting element positions in the surface's local frame, one column
/// per element. Elements lie in the local Y-Z plane; boresight is +X.
struct RisArray {
  Eigen::Matrix3Xd elements;

  int size() const { return static_cast<int>(elements.cols()); }

  /// rows x cols grid with the given spacing, centroid at the origin.
  static RisArray uniform_planar(int rows, int cols, double spacing_m);
};

/// The eight estimable channel parameters, in the fixed ordering
/// [aod_az, aod_el, tau_los, tau_ris, Re gain_los, Im gain_los,
///  Re gain_ris, Im gain_ris].
struct FullChannelParams {
  double aod_az_rad = 0.0;
  double aod_el_rad = 0.0;
  double tau_los_s = 0.0;
  double tau_ris_s = 0.0;
  Cplx gain_los;
  Cplx gain_ris;

  Vec8 to_vector() const;
  GeoChannelParams geometric() const {
    return {aod_az_rad, aod_el_rad, tau_los_s, tau_ris_s};
  }
};

/// Unit-modulus phase profiles, one column per OFDM block.
struct RisProfiles {
  Eigen::MatrixXcd phases;  // M x L

  int num_elements() const { return static_cast<int>(phases.rows()); }
  int num_blocks() const { return static_cast<int>(phases.cols()); }
};

// d(tau), entry k (1-based) = exp(-j 2 pi (k-1) spacing tau).
Eigen::VectorXcd delay_steering(double tau_s, const SignalConfig& cfg);

// Unit vector [cos az cos el, sin az cos el, sin el].
Vec3 direction_vector(double az_rad, double el_rad);

// Far-field response, element i = exp(j (2 pi fc / c) t(angles)' p_i).
Eigen::VectorXcd array_response(const Angles& angles, const RisArray& arr,
                                const SignalConfig& cfg);

// Columns: d(response)/d(az), d(response)/d(el).
Eigen::MatrixX2cd array_response_derivative(const Angles& angles,
                                            const RisArray& arr,
                                            const SignalConfig& cfg);

// Elementwise product of the arrival and departure responses.
Eigen::VectorXcd combined_response(const Angles& aoa, const Angles& aod,
                                   const RisArray& arr,
                                   const SignalConfig& cfg);

// I.i.d. uniform phases on [0, 2 pi), deterministic per seed.
RisProfiles generate_profiles(int num_blocks, int num_elements, uint64_t seed);

/// Link-budget gains. Direct path: |g| = lambda / (4 pi d_bu). Reflected
/// path: |g| = A_e / (4 pi d_br d_ru) with element capture area
/// A_e = (lambda/2)^2. Phases are -2 pi fc times the propagation delay.
/// Throws NumericalError on coincident endpoints.
std::pair<Cplx, Cplx> friis_gains(const Vec3& bs_pos, const Vec3& ris_pos,
                                  const Vec3& ue_pos, const SignalConfig& cfg);

// Constant pilots with |x_k|^2 = P_lin / K.
Eigen::VectorXcd pilot_symbols(const SignalConfig& cfg);

/// Noise-free received block ell:
/// mu = g_los d(tau_los) o x + g_ris (b' gamma_ell) d(tau_ris) o x,
/// where b is the combined response at the fixed arrival angles `aoa`
/// and the departure angles stored in `params`.
std::vector<Eigen::VectorXcd> noise_free_signal(const FullChannelParams& params,
                                                const Angles& aoa,
                                                const RisProfiles& profiles,
                                                const RisArray& arr,
                                                const SignalConfig& cfg,
                                                const Eigen::VectorXcd& pilots);

/// Per-block K x 8 Jacobians of the noise-free signal with respect to the
/// parameter vector ordering of FullChannelParams. Analytic.
std::vector<Eigen::MatrixXcd> signal_jacobian(const FullChannelParams& params,
                                              const Angles& aoa,
                                              const RisProfiles& profiles,
                                              const RisArray& arr,
                                              const SignalConfig& cfg,
                                              const Eigen::VectorXcd& pilots);

// Per-subcarrier noise power 10^((N0 + Nf)/10 - 3) * spacing, in watts.
double noise_variance_w(const SignalConfig& cfg);

}  // namespace riloc
