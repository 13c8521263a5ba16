#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "riloc/config.hpp"
#include "riloc/errors.hpp"
#include "riloc/experiments.hpp"

namespace {

using riloc::ExperimentConfig;

struct CommonArgs {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path,
                  "JSON config file; omitted keys keep defaults");
  cmd->add_option("--seed", args->seed, "Master seed override")
      ->each([args](const std::string&) { args->seed_set = true; });
  cmd->add_option("--out", args->out_path, "Output file override");
}

ExperimentConfig resolve_config(const CommonArgs& args,
                                const std::string& mode) {
  ExperimentConfig cfg = args.config_path.empty()
                             ? ExperimentConfig{}
                             : riloc::load_config(args.config_path);
  cfg.run.mode = mode;
  if (args.seed_set) cfg.run.seed = args.seed;
  if (!args.out_path.empty()) cfg.run.output_path = args.out_path;
  cfg.validate();
  // Resolved settings go to stdout so every run records its provenance.
  std::cout << "resolved config:\n" << cfg.to_json().dump(2) << "\n";
  return cfg;
}

int run_pseudo_true_cmd(const CommonArgs& args) {
  const ExperimentConfig cfg = resolve_config(args, "pseudo-true");
  const riloc::PseudoTrueReport rep = riloc::run_pseudo_true(cfg);

  nlohmann::json j;
  j["pseudo_true_position_m"] = {rep.closed.state.pos[0],
                                 rep.closed.state.pos[1],
                                 rep.closed.state.pos[2]};
  j["pseudo_true_clock_bias_ns"] = rep.closed.state.clock_bias_s * 1e9;
  j["bias_m"] = rep.bias_m;
  j["line_scale"] = rep.closed.line_scale;
  j["path_offset_m"] = rep.closed.path_offset_m;
  j["range_diff_m"] = rep.closed.range_diff_m;
  j["range_diff_sign"] = rep.closed.range_diff_m >= 0.0 ? 1 : -1;
  j["param_residual"] = {rep.closed.residual[0], rep.closed.residual[1],
                         rep.closed.residual[2], rep.closed.residual[3]};
  j["line_distance_m"] = rep.closed.line_distance_m;
  j["hyperboloid_residual_m"] = rep.closed.hyperboloid_residual_m;
  j["clock_consistency_s"] = rep.closed.clock_consistency_s;
  j["numerical_position_m"] = {rep.numerical_state.pos[0],
                               rep.numerical_state.pos[1],
                               rep.numerical_state.pos[2]};
  j["numerical_converged"] = rep.numerical_converged;
  j["numerical_iterations"] = rep.numerical_iterations;
  j["solver_gap_m"] = rep.solver_gap_m;
  j["kld_at_solution"] = rep.kld_at_solution;

  std::cout << "pseudo-true report:\n" << j.dump(2) << "\n";
  if (!cfg.run.output_path.empty()) {
    std::ofstream out(cfg.run.output_path);
    if (!out) {
      throw riloc::ConfigError("cannot write output file: " +
                               cfg.run.output_path);
    }
    out << j.dump(2) << "\n";
    std::cout << "wrote " << cfg.run.output_path << "\n";
  }
  return 0;
}

int run_power_sweep_cmd(const CommonArgs& args, int trials, bool trials_set) {
  ExperimentConfig cfg = resolve_config(args, "power-sweep");
  if (trials_set) {
    cfg.run.trials = trials;
    cfg.validate();
  }
  const auto rows = riloc::run_power_sweep(cfg);
  const std::string path = cfg.run.output_path.empty() ? "power_sweep.csv"
                                                       : cfg.run.output_path;
  riloc::write_power_csv(rows, path);

  for (const auto& r : rows) {
    std::printf("P=%7.2f dBm  LB=%.6g m  bias=%.6g m  PEB=%.6g m", r.power_dbm,
                r.lb_m, r.bias_m, r.peb_m);
    if (r.has_rmse) {
      std::printf("  RMSE=%.6g m (%d converged)", r.rmse_m,
                  r.trials_converged);
    }
    std::printf("\n");
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_sigma_sweep_cmd(const CommonArgs& args, const std::string& kind,
                        bool kind_set) {
  // An explicit --kind wins; otherwise a sigma-sweep mode from the config
  // file is kept; otherwise the position sweep is the default.
  ExperimentConfig probe = args.config_path.empty()
                               ? ExperimentConfig{}
                               : riloc::load_config(args.config_path);
  std::string mode = "sigma-sweep-" + kind;
  if (!kind_set && (probe.run.mode == "sigma-sweep-position" ||
                    probe.run.mode == "sigma-sweep-orientation")) {
    mode = probe.run.mode;
  }
  const ExperimentConfig cfg = resolve_config(args, mode);
  const auto rows = riloc::run_sigma_sweep(cfg);
  const std::string path = cfg.run.output_path.empty() ? "sigma_sweep.csv"
                                                       : cfg.run.output_path;
  riloc::write_sigma_csv(rows, path);

  for (const auto& r : rows) {
    std::printf("sigma=%-8g LB min/mean/max = %.6g / %.6g / %.6g m", r.sigma,
                r.lb_min_m, r.lb_mean_m, r.lb_max_m);
    if (r.failures > 0) std::printf("  (%d failures)", r.failures);
    std::printf("\n");
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Localization error lower bounds for a reflecting-surface-aided "
      "positioning link with miscalibrated surface placement"};
  app.require_subcommand(1);

  CommonArgs pseudo_args;
  CLI::App* pseudo =
      app.add_subcommand("pseudo-true",
                         "Solve for the asymptotic location estimate under "
                         "the configured calibration errors");
  add_common(pseudo, &pseudo_args);

  CommonArgs power_args;
  int trials = 0;
  CLI::App* power = app.add_subcommand(
      "power-sweep", "Bounds (and optional estimator RMSE) vs transmit power");
  add_common(power, &power_args);
  CLI::Option* trials_opt = power->add_option(
      "--trials", trials, "Estimator trials per power point (0 disables)");

  CommonArgs sigma_args;
  std::string kind = "position";
  CLI::App* sweep = app.add_subcommand(
      "sigma-sweep", "Bound statistics vs calibration-error level");
  add_common(sweep, &sigma_args);
  CLI::Option* kind_opt =
      sweep->add_option("--kind", kind, "Which error is randomized")
          ->check(CLI::IsMember({"position", "orientation"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (pseudo->parsed()) return run_pseudo_true_cmd(pseudo_args);
    if (power->parsed()) {
      return run_power_sweep_cmd(power_args, trials, trials_opt->count() > 0);
    }
    if (sweep->parsed()) {
      return run_sigma_sweep_cmd(sigma_args, kind, kind_opt->count() > 0);
    }
  } catch (const riloc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const riloc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
