#include "riloc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "riloc/errors.hpp"
#include "riloc/estimator.hpp"

namespace riloc {

namespace {

// Disjoint seed streams per consumer, all derived from the run seed.
enum SeedStream : uint64_t {
  kProfileStream = 0,
  kRealizationStream = 1,
  kTrialStream = 2,
};

std::vector<double> power_grid(const ExperimentConfig& cfg) {
  std::vector<double> grid;
  const double start = cfg.run.power_start_dbm;
  const double stop = cfg.run.power_stop_dbm;
  const double step = cfg.run.power_step_db;
  for (int i = 0;; ++i) {
    const double p = start + i * step;
    if (p > stop + 1e-9) break;
    grid.push_back(p);
  }
  return grid;
}

std::string format_row(const std::vector<double>& values) {
  std::string line;
  char buf[64];
  for (size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.15g", values[i]);
    if (i) line += ',';
    line += buf;
  }
  return line;
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file: " + path);
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace

Mat4 estimate_covariance(const ExperimentConfig& cfg, double power_dbm) {
  SignalConfig sig = cfg.make_signal();
  sig.power_dbm = power_dbm;
  sig.validate();

  const Scenario scenario = cfg.make_scenario();
  const RisGeometry geom = scenario.true_geometry();
  const UEState ue = cfg.make_ue();
  const RisArray arr = cfg.make_array();

  const GeoChannelParams geo = location_to_channel_params(ue, geom);
  const auto [gain_los, gain_ris] =
      friis_gains(geom.bs_pos, geom.ris_pos, ue.pos, sig);
  FullChannelParams params;
  params.aod_az_rad = geo.aod_az_rad;
  params.aod_el_rad = geo.aod_el_rad;
  params.tau_los_s = geo.tau_los_s;
  params.tau_ris_s = geo.tau_ris_s;
  params.gain_los = gain_los;
  params.gain_ris = gain_ris;

  const RisProfiles profiles = generate_profiles(
      sig.num_blocks, arr.size(), derive_seed(cfg.run.seed, kProfileStream));
  const Angles aoa = aoa_from_bs(geom);
  const auto jacobians = signal_jacobian(params, aoa, profiles, arr, sig,
                                         pilot_symbols(sig));
  const Mat8 fim = channel_fim(jacobians, noise_variance_w(sig));
  return channel_param_covariance(eliminate_nuisance(fim));
}

PseudoTrueReport run_pseudo_true(const ExperimentConfig& cfg) {
  const Scenario scenario = cfg.make_scenario();
  const RisGeometry true_geom = scenario.true_geometry();
  const RisGeometry assumed_geom = scenario.assumed_geometry();
  const UEState ue = cfg.make_ue();
  const Mat4 sigma = estimate_covariance(cfg, cfg.signal.power_dbm);

  PseudoTrueReport report;
  report.closed = pseudo_true_closed_form(ue, true_geom, assumed_geom);
  report.bias_m = (report.closed.state.pos - ue.pos).norm();

  const FitResult fit =
      pseudo_true_numerical(ue, true_geom, assumed_geom, sigma, ue);
  report.numerical_state = fit.state;
  report.numerical_converged = fit.converged;
  report.numerical_iterations = fit.iterations;
  report.solver_gap_m = (fit.state.pos - report.closed.state.pos).norm();
  report.kld_at_solution =
      kld(report.closed.state, ue, true_geom, assumed_geom, sigma);
  return report;
}

std::vector<PowerRow> run_power_sweep(const ExperimentConfig& cfg) {
  const Scenario scenario = cfg.make_scenario();
  const RisGeometry true_geom = scenario.true_geometry();
  const RisGeometry assumed_geom = scenario.assumed_geometry();
  const UEState ue = cfg.make_ue();
  const Vec4 eta_true =
      location_to_channel_params(ue, true_geom).to_vector();

  std::vector<PowerRow> rows;
  const std::vector<double> grid = power_grid(cfg);
  double first_bias = std::numeric_limits<double>::quiet_NaN();
  for (size_t i = 0; i < grid.size(); ++i) {
    const double power = grid[i];
    const Mat4 sigma = estimate_covariance(cfg, power);

    // The divergence minimizer does not depend on the covariance, so the
    // bias column must be flat across the sweep.
    const PseudoTrue pt =
        pseudo_true_closed_form(ue, true_geom, assumed_geom);
    const Mat4 a = mismatch_curvature(pt.state, assumed_geom, sigma, eta_true);
    const Mat4 b = score_covariance(pt.state, assumed_geom, sigma, eta_true);
    const BoundReport bound =
        bound_report(ue, pt.state, a, b, sigma, true_geom);
    if (i == 0) {
      first_bias = bound.bias_norm_pos_m;
    } else if (std::abs(bound.bias_norm_pos_m - first_bias) > 1e-12) {
      throw NumericalError("bias drifted across power sweep");
    }

    PowerRow row;
    row.power_dbm = power;
    row.lb_m = bound.lb_m;
    row.bias_m = bound.bias_norm_pos_m;
    row.peb_m = bound.peb_m;
    row.mcrb_trace_m2 = bound.mcrb.topLeftCorner<3, 3>().trace();
    if (cfg.run.trials > 0) {
      const uint64_t point_master = derive_seed(
          derive_seed(cfg.run.seed, kTrialStream), static_cast<uint64_t>(i));
      const auto trials = run_trials(ue, true_geom, assumed_geom, sigma,
                                     cfg.run.trials, point_master);
      row.has_rmse = true;
      row.trials_converged = static_cast<int>(
          std::count_if(trials.begin(), trials.end(),
                        [](const TrialResult& t) { return t.converged; }));
      row.rmse_m = rmse(trials);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SigmaRow> run_sigma_sweep(const ExperimentConfig& cfg) {
  bool position_kind;
  if (cfg.run.mode == "sigma-sweep-position") {
    position_kind = true;
  } else if (cfg.run.mode == "sigma-sweep-orientation") {
    position_kind = false;
  } else {
    throw ConfigError("run.mode must select a sigma sweep kind");
  }

  const UEState ue = cfg.make_ue();
  const Mat4 sigma_cov = estimate_covariance(cfg, cfg.signal.power_dbm);
  const Vec4 eta_true = location_to_channel_params(
      ue, cfg.make_scenario().true_geometry()).to_vector();

  // Unit draws are shared across sigma values: realization i uses the
  // same direction at every level, scaled by the level. Each
  // realization's bound is then monotone in sigma by construction.
  const int realizations = cfg.mismatch.realizations;
  std::vector<Vec3> unit_draws(realizations);
  const uint64_t draw_master = derive_seed(cfg.run.seed, kRealizationStream);
  for (int i = 0; i < realizations; ++i) {
    std::mt19937_64 rng(derive_seed(draw_master, static_cast<uint64_t>(i)));
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    for (int k = 0; k < 3; ++k) unit_draws[i][k] = unit_normal(rng);
  }

  const double base =
      position_kind ? cfg.mismatch.sigma_p_m : cfg.mismatch.sigma_o_deg;
  std::vector<SigmaRow> rows;
  for (int level = 0; level <= 6; ++level) {
    const double sigma_value = level * base;
    SigmaRow row;
    row.sigma = sigma_value;
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    int successes = 0;
    for (int i = 0; i < realizations; ++i) {
      const Vec3 scaled = sigma_value * unit_draws[i];
      const Vec3 u = position_kind ? scaled : Vec3::Zero();
      const Vec3 v = position_kind ? Vec3::Zero() : scaled;
      try {
        const Scenario sc =
            Scenario::make(cfg.scenario.bs_position_m,
                           cfg.scenario.ris_position_m,
                           cfg.scenario.ris_orientation_deg, u, v);
        const RisGeometry tg = sc.true_geometry();
        const RisGeometry ag = sc.assumed_geometry();
        const PseudoTrue pt = pseudo_true_closed_form(ue, tg, ag);
        const Mat4 a = mismatch_curvature(pt.state, ag, sigma_cov, eta_true);
        const Mat4 b = score_covariance(pt.state, ag, sigma_cov, eta_true);
        const BoundReport bound =
            bound_report(ue, pt.state, a, b, sigma_cov, tg);
        sum += bound.lb_m;
        lo = std::min(lo, bound.lb_m);
        hi = std::max(hi, bound.lb_m);
        ++successes;
      } catch (const NumericalError&) {
        ++row.failures;
      }
    }
    if (successes > 0) {
      row.lb_min_m = lo;
      row.lb_mean_m = sum / successes;
      row.lb_max_m = hi;
    } else {
      row.lb_min_m = row.lb_mean_m = row.lb_max_m =
          std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

void write_power_csv(const std::vector<PowerRow>& rows,
                     const std::string& path) {
  const bool with_rmse =
      std::any_of(rows.begin(), rows.end(),
                  [](const PowerRow& r) { return r.has_rmse; });
  std::vector<std::string> lines;
  lines.push_back(with_rmse
                      ? "power_dbm,lb_m,bias_m,peb_m,mcrb_trace_m2,rmse_m,"
                        "trials_converged"
                      : "power_dbm,lb_m,bias_m,peb_m,mcrb_trace_m2");
  for (const auto& r : rows) {
    std::vector<double> values{r.power_dbm, r.lb_m, r.bias_m, r.peb_m,
                               r.mcrb_trace_m2};
    if (with_rmse) {
      values.push_back(r.rmse_m);
      values.push_back(static_cast<double>(r.trials_converged));
    }
    lines.push_back(format_row(values));
  }
  write_lines(path, lines);
}

void write_sigma_csv(const std::vector<SigmaRow>& rows,
                     const std::string& path) {
  std::vector<std::string> lines;
  lines.push_back("sigma,lb_min_m,lb_mean_m,lb_max_m,failures");
  for (const auto& r : rows) {
    lines.push_back(format_row({r.sigma, r.lb_min_m, r.lb_mean_m, r.lb_max_m,
                                static_cast<double>(r.failures)}));
  }
  write_lines(path, lines);
}

}  // namespace riloc
