#include "riloc/channel.hpp"

#include <cmath>
#include <random>

#include "riloc/errors.hpp"

namespace riloc {

namespace {

constexpr Cplx kImag(0.0, 1.0);

void check_block_dims(const RisProfiles& profiles, const RisArray& arr,
                      const SignalConfig& cfg, const Eigen::VectorXcd& pilots) {
  if (profiles.num_elements() != arr.size()) {
    throw ConfigError("profiles and array disagree on element count");
  }
  if (profiles.num_blocks() != cfg.num_blocks) {
    throw ConfigError("profiles and config disagree on block count");
  }
  if (pilots.size() != cfg.num_subcarriers) {
    throw ConfigError("pilot vector length must equal num_subcarriers");
  }
}

}  // namespace

void SignalConfig::validate() const {
  if (!(fc_hz > 0.0)) throw ConfigError("fc_hz must be positive");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be positive");
  if (num_subcarriers < 2) throw ConfigError("num_subcarriers must be >= 2");
  if (num_blocks < 1) throw ConfigError("num_symbols must be >= 1");
  if (!std::isfinite(power_dbm) || !std::isfinite(noise_psd_dbm_hz) ||
      !std::isfinite(noise_figure_db)) {
    throw ConfigError("signal levels must be finite");
  }
}

RisArray RisArray::uniform_planar(int rows, int cols, double spacing_m) {
  if (rows < 1 || cols < 1) throw ConfigError("array dimensions must be >= 1");
  RisArray arr;
  arr.elements.resize(3, static_cast<Eigen::Index>(rows) * cols);
  const double y0 = -0.5 * (cols - 1) * spacing_m;
  const double z0 = -0.5 * (rows - 1) * spacing_m;
  Eigen::Index i = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c, ++i) {
      arr.elements.col(i) = Vec3(0.0, y0 + c * spacing_m, z0 + r * spacing_m);
    }
  }
  return arr;
}

Vec8 FullChannelParams::to_vector() const {
  Vec8 v;
  v << aod_az_rad, aod_el_rad, tau_los_s, tau_ris_s, gain_los.real(),
      gain_los.imag(), gain_ris.real(), gain_ris.imag();
  return v;
}

Eigen::VectorXcd delay_steering(double tau_s, const SignalConfig& cfg) {
  if (!std::isfinite(tau_s)) throw ConfigError("delay must be finite");
  const double spacing = cfg.subcarrier_spacing_hz();
  Eigen::VectorXcd d(cfg.num_subcarriers);
  for (int k = 0; k < cfg.num_subcarriers; ++k) {
    d[k] = std::polar(1.0, -2.0 * kPi * k * spacing * tau_s);
  }
  return d;
}

Vec3 direction_vector(double az_rad, double el_rad) {
  const double ce = std::cos(el_rad);
  return Vec3(std::cos(az_rad) * ce, std::sin(az_rad) * ce, std::sin(el_rad));
}

Eigen::VectorXcd array_response(const Angles& angles, const RisArray& arr,
                                const SignalConfig& cfg) {
  const double wavenumber = 2.0 * kPi * cfg.fc_hz / kSpeedOfLight;
  const Vec3 t = direction_vector(angles.az_rad, angles.el_rad);
  const Eigen::VectorXd phase = wavenumber * (arr.elements.transpose() * t);
  return phase.unaryExpr([](double ph) { return std::polar(1.0, ph); });
}

Eigen::MatrixX2cd array_response_derivative(const Angles& angles,
                                            const RisArray& arr,
                                            const SignalConfig& cfg) {
  const double wavenumber = 2.0 * kPi * cfg.fc_hz / kSpeedOfLight;
  const double ca = std::cos(angles.az_rad), sa = std::sin(angles.az_rad);
  const double ce = std::cos(angles.el_rad), se = std::sin(angles.el_rad);
  const Vec3 dt_daz(-sa * ce, ca * ce, 0.0);
  const Vec3 dt_del(-ca * se, -sa * se, ce);

  const Eigen::VectorXcd a = array_response(angles, arr, cfg);
  const Eigen::VectorXd proj_az = arr.elements.transpose() * dt_daz;
  const Eigen::VectorXd proj_el = arr.elements.transpose() * dt_del;
  Eigen::MatrixX2cd deriv(arr.size(), 2);
  deriv.col(0) = (kImag * wavenumber) * proj_az.cast<Cplx>().cwiseProduct(a);
  deriv.col(1) = (kImag * wavenumber) * proj_el.cast<Cplx>().cwiseProduct(a);
  return deriv;
}

Eigen::VectorXcd combined_response(const Angles& aoa, const Angles& aod,
                                   const RisArray& arr,
                                   const SignalConfig& cfg) {
  return array_response(aoa, arr, cfg).cwiseProduct(
      array_response(aod, arr, cfg));
}

RisProfiles generate_profiles(int num_blocks, int num_elements, uint64_t seed) {
  if (num_blocks < 1 || num_elements < 1) {
    throw ConfigError("profile dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  RisProfiles profiles;
  profiles.phases.resize(num_elements, num_blocks);
  for (int l = 0; l < num_blocks; ++l) {
    for (int i = 0; i < num_elements; ++i) {
      profiles.phases(i, l) = std::polar(1.0, phase(rng));
    }
  }
  return profiles;
}

std::pair<Cplx, Cplx> friis_gains(const Vec3& bs_pos, const Vec3& ris_pos,
                                  const Vec3& ue_pos, const SignalConfig& cfg) {
  const double d_bu = (ue_pos - bs_pos).norm();
  const double d_br = (ris_pos - bs_pos).norm();
  const double d_ru = (ue_pos - ris_pos).norm();
  if (d_bu < 1e-9 || d_br < 1e-9 || d_ru < 1e-9) {
    throw NumericalError("gain undefined: coincident endpoints");
  }
  const double lambda = cfg.wavelength_m();
  const double capture_area = (lambda / 2.0) * (lambda / 2.0);
  const double mag_los = lambda / (4.0 * kPi * d_bu);
  const double mag_ris = capture_area / (4.0 * kPi * d_br * d_ru);
  const double phase_los = -2.0 * kPi * cfg.fc_hz * d_bu / kSpeedOfLight;
  const double phase_ris = -2.0 * kPi * cfg.fc_hz * (d_br + d_ru) / kSpeedOfLight;
  return {std::polar(mag_los, phase_los), std::polar(mag_ris, phase_ris)};
}

Eigen::VectorXcd pilot_symbols(const SignalConfig& cfg) {
  const double amplitude = std::sqrt(cfg.power_w() / cfg.num_subcarriers);
  return Eigen::VectorXcd::Constant(cfg.num_subcarriers, Cplx(amplitude, 0.0));
}

std::vector<Eigen::VectorXcd> noise_free_signal(
    const FullChannelParams& params, const Angles& aoa,
    const RisProfiles& profiles, const RisArray& arr, const SignalConfig& cfg,
    const Eigen::VectorXcd& pilots) {
  check_block_dims(profiles, arr, cfg, pilots);
  const Eigen::VectorXcd los_term =
      params.gain_los * delay_steering(params.tau_los_s, cfg).cwiseProduct(pilots);
  const Eigen::VectorXcd ris_carrier =
      delay_steering(params.tau_ris_s, cfg).cwiseProduct(pilots);
  const Eigen::VectorXcd b = combined_response(
      aoa, {params.aod_az_rad, params.aod_el_rad}, arr, cfg);

  std::vector<Eigen::VectorXcd> blocks(cfg.num_blocks);
  for (int l = 0; l < cfg.num_blocks; ++l) {
    const Cplx reflect = b.transpose() * profiles.phases.col(l);
    blocks[l] = los_term + params.gain_ris * reflect * ris_carrier;
  }
  return blocks;
}

std::vector<Eigen::MatrixXcd> signal_jacobian(const FullChannelParams& params,
                                              const Angles& aoa,
                                              const RisProfiles& profiles,
                                              const RisArray& arr,
                                              const SignalConfig& cfg,
                                              const Eigen::VectorXcd& pilots) {
  check_block_dims(profiles, arr, cfg, pilots);
  const int K = cfg.num_subcarriers;
  const double spacing = cfg.subcarrier_spacing_hz();
  const Angles aod{params.aod_az_rad, params.aod_el_rad};

  const Eigen::VectorXcd d_los =
      delay_steering(params.tau_los_s, cfg).cwiseProduct(pilots);
  const Eigen::VectorXcd d_ris =
      delay_steering(params.tau_ris_s, cfg).cwiseProduct(pilots);

  // d/dtau brings down -j 2 pi (k-1) spacing per subcarrier.
  Eigen::VectorXcd omega(K);
  for (int k = 0; k < K; ++k) omega[k] = -kImag * (2.0 * kPi * k * spacing);
  const Eigen::VectorXcd d_los_dtau = omega.cwiseProduct(d_los);
  const Eigen::VectorXcd d_ris_dtau = omega.cwiseProduct(d_ris);

  const Eigen::VectorXcd a_arrival = array_response(aoa, arr, cfg);
  const Eigen::VectorXcd b =
      a_arrival.cwiseProduct(array_response(aod, arr, cfg));
  const Eigen::MatrixX2cd da_departure = array_response_derivative(aod, arr, cfg);
  const Eigen::VectorXcd db_daz = a_arrival.cwiseProduct(da_departure.col(0));
  const Eigen::VectorXcd db_del = a_arrival.cwiseProduct(da_departure.col(1));

  std::vector<Eigen::MatrixXcd> jacobians(cfg.num_blocks);
  for (int l = 0; l < cfg.num_blocks; ++l) {
    const Eigen::VectorXcd gamma = profiles.phases.col(l);
    const Cplx reflect = b.transpose() * gamma;
    const Cplx reflect_daz = db_daz.transpose() * gamma;
    const Cplx reflect_del = db_del.transpose() * gamma;

    Eigen::MatrixXcd J(K, 8);
    J.col(0) = params.gain_ris * reflect_daz * d_ris;
    J.col(1) = params.gain_ris * reflect_del * d_ris;
    J.col(2) = params.gain_los * d_los_dtau;
    J.col(3) = params.gain_ris * reflect * d_ris_dtau;
    J.col(4) = d_los;
    J.col(5) = kImag * d_los;
    J.col(6) = reflect * d_ris;
    J.col(7) = kImag * reflect * d_ris;
    jacobians[l] = std::move(J);
  }
  return jacobians;
}

double noise_variance_w(const SignalConfig& cfg) {
  const double psd_w_hz =
      std::pow(10.0, (cfg.noise_psd_dbm_hz + cfg.noise_figure_db) / 10.0 - 3.0);
  return psd_w_hz * cfg.subcarrier_spacing_hz();
}

}  // namespace riloc
