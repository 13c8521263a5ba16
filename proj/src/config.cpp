#include "riloc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "riloc/errors.hpp"

namespace riloc {

namespace {

using nlohmann::json;

void require_known_keys(const json& j, const std::string& block,
                        const std::set<std::string>& known) {
  if (!j.is_object()) {
    throw ConfigError("config block '" + block + "' must be an object");
  }
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw ConfigError("unknown config key '" + block + "." + item.key() + "'");
    }
  }
}

Vec3 read_vec3(const json& j, const std::string& key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 3) {
    throw ConfigError("config key '" + key + "' must be an array of 3 numbers");
  }
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) {
      throw ConfigError("config key '" + key + "' must be an array of 3 numbers");
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

double read_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) {
    throw ConfigError("config key '" + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

int read_int(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    throw ConfigError("config key '" + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

uint64_t read_u64(const json& j, const std::string& key, uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned() && !j.at(key).is_number_integer()) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  if (j.at(key).is_number_integer() && j.at(key).get<int64_t>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  return j.at(key).get<uint64_t>();
}

std::string read_string(const json& j, const std::string& key,
                        const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) {
    throw ConfigError("config key '" + key + "' must be a string");
  }
  return j.at(key).get<std::string>();
}

json vec3_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  require_known_keys(j, "<root>", {"scenario", "signal", "mismatch", "run"});
  ExperimentConfig cfg;

  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    require_known_keys(s, "scenario",
                       {"bs_position_m", "ris_position_m",
                        "ris_orientation_deg", "ue_position_m",
                        "clock_bias_ns"});
    cfg.scenario.bs_position_m =
        read_vec3(s, "bs_position_m", cfg.scenario.bs_position_m);
    cfg.scenario.ris_position_m =
        read_vec3(s, "ris_position_m", cfg.scenario.ris_position_m);
    cfg.scenario.ris_orientation_deg =
        read_vec3(s, "ris_orientation_deg", cfg.scenario.ris_orientation_deg);
    cfg.scenario.ue_position_m =
        read_vec3(s, "ue_position_m", cfg.scenario.ue_position_m);
    cfg.scenario.clock_bias_ns =
        read_number(s, "clock_bias_ns", cfg.scenario.clock_bias_ns);
  }

  if (j.contains("signal")) {
    const json& s = j.at("signal");
    require_known_keys(s, "signal",
                       {"fc_hz", "bandwidth_hz", "num_subcarriers",
                        "num_symbols", "power_dbm", "noise_psd_dbm_hz",
                        "noise_figure_db", "ris_rows", "ris_cols"});
    cfg.signal.fc_hz = read_number(s, "fc_hz", cfg.signal.fc_hz);
    cfg.signal.bandwidth_hz =
        read_number(s, "bandwidth_hz", cfg.signal.bandwidth_hz);
    cfg.signal.num_subcarriers =
        read_int(s, "num_subcarriers", cfg.signal.num_subcarriers);
    cfg.signal.num_symbols = read_int(s, "num_symbols", cfg.signal.num_symbols);
    cfg.signal.power_dbm = read_number(s, "power_dbm", cfg.signal.power_dbm);
    cfg.signal.noise_psd_dbm_hz =
        read_number(s, "noise_psd_dbm_hz", cfg.signal.noise_psd_dbm_hz);
    cfg.signal.noise_figure_db =
        read_number(s, "noise_figure_db", cfg.signal.noise_figure_db);
    cfg.signal.ris_rows = read_int(s, "ris_rows", cfg.signal.ris_rows);
    cfg.signal.ris_cols = read_int(s, "ris_cols", cfg.signal.ris_cols);
  }

  if (j.contains("mismatch")) {
    const json& m = j.at("mismatch");
    require_known_keys(
        m, "mismatch", {"u_m", "v_deg", "sigma_p_m", "sigma_o_deg",
                        "realizations"});
    cfg.mismatch.u_m = read_vec3(m, "u_m", cfg.mismatch.u_m);
    cfg.mismatch.v_deg = read_vec3(m, "v_deg", cfg.mismatch.v_deg);
    cfg.mismatch.sigma_p_m =
        read_number(m, "sigma_p_m", cfg.mismatch.sigma_p_m);
    cfg.mismatch.sigma_o_deg =
        read_number(m, "sigma_o_deg", cfg.mismatch.sigma_o_deg);
    cfg.mismatch.realizations =
        read_int(m, "realizations", cfg.mismatch.realizations);
  }

  if (j.contains("run")) {
    const json& r = j.at("run");
    require_known_keys(r, "run",
                       {"mode", "seed", "trials", "power_sweep_dbm",
                        "output_path"});
    cfg.run.mode = read_string(r, "mode", cfg.run.mode);
    cfg.run.seed = read_u64(r, "seed", cfg.run.seed);
    cfg.run.trials = read_int(r, "trials", cfg.run.trials);
    if (r.contains("power_sweep_dbm")) {
      const json& p = r.at("power_sweep_dbm");
      require_known_keys(p, "run.power_sweep_dbm", {"start", "stop", "step"});
      cfg.run.power_start_dbm =
          read_number(p, "start", cfg.run.power_start_dbm);
      cfg.run.power_stop_dbm = read_number(p, "stop", cfg.run.power_stop_dbm);
      cfg.run.power_step_db = read_number(p, "step", cfg.run.power_step_db);
    }
    cfg.run.output_path = read_string(r, "output_path", cfg.run.output_path);
  }

  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["scenario"] = {
      {"bs_position_m", vec3_to_json(scenario.bs_position_m)},
      {"ris_position_m", vec3_to_json(scenario.ris_position_m)},
      {"ris_orientation_deg", vec3_to_json(scenario.ris_orientation_deg)},
      {"ue_position_m", vec3_to_json(scenario.ue_position_m)},
      {"clock_bias_ns", scenario.clock_bias_ns},
  };
  j["signal"] = {
      {"fc_hz", signal.fc_hz},
      {"bandwidth_hz", signal.bandwidth_hz},
      {"num_subcarriers", signal.num_subcarriers},
      {"num_symbols", signal.num_symbols},
      {"power_dbm", signal.power_dbm},
      {"noise_psd_dbm_hz", signal.noise_psd_dbm_hz},
      {"noise_figure_db", signal.noise_figure_db},
      {"ris_rows", signal.ris_rows},
      {"ris_cols", signal.ris_cols},
  };
  j["mismatch"] = {
      {"u_m", vec3_to_json(mismatch.u_m)},
      {"v_deg", vec3_to_json(mismatch.v_deg)},
      {"sigma_p_m", mismatch.sigma_p_m},
      {"sigma_o_deg", mismatch.sigma_o_deg},
      {"realizations", mismatch.realizations},
  };
  j["run"] = {
      {"mode", run.mode},
      {"seed", run.seed},
      {"trials", run.trials},
      {"power_sweep_dbm",
       {{"start", run.power_start_dbm},
        {"stop", run.power_stop_dbm},
        {"step", run.power_step_db}}},
      {"output_path", run.output_path},
  };
  return j;
}

void ExperimentConfig::validate() const {
  make_signal().validate();
  if (signal.ris_rows < 1) throw ConfigError("signal.ris_rows must be >= 1");
  if (signal.ris_cols < 1) throw ConfigError("signal.ris_cols must be >= 1");
  if (!std::isfinite(scenario.clock_bias_ns)) {
    throw ConfigError("scenario.clock_bias_ns must be finite");
  }
  if (!(mismatch.sigma_p_m >= 0.0)) {
    throw ConfigError("mismatch.sigma_p_m must be >= 0");
  }
  if (!(mismatch.sigma_o_deg >= 0.0)) {
    throw ConfigError("mismatch.sigma_o_deg must be >= 0");
  }
  if (mismatch.realizations < 1) {
    throw ConfigError("mismatch.realizations must be >= 1");
  }
  if (run.trials < 0) throw ConfigError("run.trials must be >= 0");
  if (!(run.power_step_db > 0.0)) {
    throw ConfigError("run.power_sweep_dbm.step must be > 0");
  }
  if (!(run.power_stop_dbm >= run.power_start_dbm)) {
    throw ConfigError("run.power_sweep_dbm.stop must be >= start");
  }
  if (run.mode != "pseudo-true" && run.mode != "power-sweep" &&
      run.mode != "sigma-sweep-position" &&
      run.mode != "sigma-sweep-orientation") {
    throw ConfigError("run.mode must be one of pseudo-true, power-sweep, "
                      "sigma-sweep-position, sigma-sweep-orientation");
  }
  // Scenario-level geometric validation lives in Scenario::make.
  make_scenario();
}

Scenario ExperimentConfig::make_scenario() const {
  return Scenario::make(scenario.bs_position_m, scenario.ris_position_m,
                        scenario.ris_orientation_deg, mismatch.u_m,
                        mismatch.v_deg);
}

UEState ExperimentConfig::make_ue() const {
  return {scenario.ue_position_m, scenario.clock_bias_ns * 1e-9};
}

SignalConfig ExperimentConfig::make_signal() const {
  SignalConfig s;
  s.fc_hz = signal.fc_hz;
  s.bandwidth_hz = signal.bandwidth_hz;
  s.num_subcarriers = signal.num_subcarriers;
  s.num_blocks = signal.num_symbols;
  s.power_dbm = signal.power_dbm;
  s.noise_psd_dbm_hz = signal.noise_psd_dbm_hz;
  s.noise_figure_db = signal.noise_figure_db;
  return s;
}

RisArray ExperimentConfig::make_array() const {
  return RisArray::uniform_planar(signal.ris_rows, signal.ris_cols,
                                  make_signal().wavelength_m() / 2.0);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  const bool only_whitespace =
      std::all_of(text.begin(), text.end(),
                  [](unsigned char c) { return std::isspace(c); });
  if (only_whitespace) {
    ExperimentConfig cfg;
    cfg.validate();
    return cfg;
  }

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return ExperimentConfig::from_json(j);
}

}  // namespace riloc
