#pragma once

#include <cstdint>
#include <string>

#include "riloc/channel.hpp"
#include "riloc/geometry.hpp"

#include "json.hpp"

namespace riloc {

/// Experiment settings. Defaults describe the reference deployment: one
/// base station, one 64x64 half-wavelength surface at 28 GHz, 400 MHz of
/// bandwidth over 3000 subcarriers and 32 blocks, 10 dBm transmit power.
struct ExperimentConfig {
  struct ScenarioBlock {
    Vec3 bs_position_m{5.0, 0.0, 3.0};
    Vec3 ris_position_m{0.0, -5.0, 2.5};
    Vec3 ris_orientation_deg{0.0, 0.0, 90.0};
    Vec3 ue_position_m{-2.5, 2.5, 0.0};
    double clock_bias_ns = 0.0;
  } scenario;

  struct SignalBlock {
    double fc_hz = 28e9;
    double bandwidth_hz = 400e6;
    int num_subcarriers = 3000;
    int num_symbols = 32;
    double power_dbm = 10.0;
    double noise_psd_dbm_hz = -173.855;
    double noise_figure_db = 10.0;
    int ris_rows = 64;
    int ris_cols = 64;
  } signal;

  struct MismatchBlock {
    Vec3 u_m = Vec3::Zero();     // surface position error [m]
    Vec3 v_deg = Vec3::Zero();   // surface orientation error [deg]
    double sigma_p_m = 0.01;     // position-error std per axis
    double sigma_o_deg = 0.1;    // orientation-error std per axis
    int realizations = 100;
  } mismatch;

  struct RunBlock {
    std::string mode = "pseudo-true";  // pseudo-true | power-sweep |
                                       // sigma-sweep-position |
                                       // sigma-sweep-orientation
    uint64_t seed = 1;
    int trials = 0;  // per power point; 0 disables the estimator column
    double power_start_dbm = -10.0;
    double power_stop_dbm = 40.0;
    double power_step_db = 5.0;
    std::string output_path;
  } run;

  /// Rejects unknown keys at any level; missing keys keep defaults.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  Scenario make_scenario() const;
  UEState make_ue() const;
  SignalConfig make_signal() const;
  RisArray make_array() const;
};

/// Reads and validates a config file. A file containing only whitespace
/// yields the defaults. Parse errors carry line and column information.
ExperimentConfig load_config(const std::string& path);

}  // namespace riloc
