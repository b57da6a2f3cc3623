// minimax-lab: run minimax pre-training studies on synthetic convex task
// families and emit CSV reports plus a PASS/FAIL summary.
//
// Exit codes: 0 all asserted properties pass, 1 property failure,
// 2 malformed config, 3 I/O failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "minimax_lab/config.hpp"
#include "minimax_lab/experiments.hpp"
#include "minimax_lab/oracle.hpp"
#include "minimax_lab/optimizer.hpp"

namespace {

using namespace minimax_lab;

constexpr int kExitPass = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct CliOptions {
  std::string config_path;
  std::string outdir_flag;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  bool quiet = false;
  std::size_t jobs = 1;
  std::size_t gap_tasks = 4;
};

std::string resolve_outdir(const ExperimentConfig& cfg, const CliOptions& cli) {
  if (!cli.outdir_flag.empty()) return cli.outdir_flag;
  if (!cfg.outdir.empty()) return cfg.outdir;
  if (const char* env = std::getenv("MINIMAX_LAB_OUTDIR"); env && *env) return env;
  return ".";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path);
  out << contents;
  if (!out) throw std::ios_base::failure("cannot write " + path);
}

struct StudyOutput {
  std::string csv;
  std::string summary;
  bool pass = false;
};

void emit(const std::string& study, const ExperimentConfig& cfg, const CliOptions& cli,
          const StudyOutput& output) {
  const std::string outdir = resolve_outdir(cfg, cli);
  std::filesystem::create_directories(outdir);
  const std::string base = outdir + "/" + study + "-" + std::to_string(cfg.seed);
  write_file(base + ".csv", output.csv);
  write_file(outdir + "/summary.txt", output.summary);
  if (!cli.quiet) {
    std::cout << output.summary;
    std::cout << "wrote " << base << ".csv\n";
  }
}

Schedule schedule_from_config(const ExperimentConfig& cfg, const TaskFamily& family,
                              const Vec& theta0, std::size_t jobs) {
  double r0 = cfg.alpha_r0;
  const double lp = cfg.alpha_lipschitz > 0.0 ? cfg.alpha_lipschitz : family.lipschitz();
  const std::size_t num_tasks = cfg.alpha_tasks > 0 ? cfg.alpha_tasks : family.size();
  const double bound = cfg.alpha_bound > 0.0 ? cfg.alpha_bound : family.bound();

  const bool needs_r0 = cfg.step_mode == "theoretical" || cfg.alpha_mode == "theoretical";
  if (needs_r0 && r0 <= 0.0) {
    // theoretical schedules need R0 = ||theta0 - theta*||; ask the oracle
    const GridMinimaxResult oracle =
        grid_minimax(family, default_grid_box(family), 2001, {}, jobs);
    r0 = dist(theta0, oracle.theta);
    if (r0 <= 0.0) r0 = 1e-3;
  }

  AlphaSchedule alpha = cfg.alpha_mode == "theoretical"
                            ? AlphaSchedule::theoretical(r0, lp, num_tasks, bound)
                            : AlphaSchedule::constant(cfg.alpha_value);
  if (cfg.step_mode == "theoretical") {
    return Schedule::theoretical(r0, lp, alpha, cfg.iterations);
  }
  return Schedule::constant(cfg.eta, alpha, cfg.iterations);
}

StudyOutput study_train(const ExperimentConfig& cfg, const CliOptions& cli) {
  const TaskFamily family = cfg.make_family();
  const Vec theta0 = cfg.initial_point(family);

  RunTrace trace;
  if (cfg.balancer == "minimax") {
    const Schedule schedule = schedule_from_config(cfg, family, theta0, cli.jobs);
    std::optional<StochasticOptions> stochastic;
    if (cfg.noise_sigma > 0.0) stochastic = StochasticOptions{1, cfg.seed};
    trace = swgd_run(family, ParamVector(theta0), schedule, stochastic, cfg.record_every);
  } else {
    trace = balanced_run(family, ParamVector(theta0), parse_balance_method(cfg.balancer),
                         cfg.eta, cfg.iterations, cfg.record_every);
  }

  StudyOutput output;
  std::ostringstream csv;
  trace.write_csv(csv);
  output.csv = csv.str();
  const WorstCase terminal = worst_case_risk(family, trace.theta_bar);
  std::ostringstream summary;
  summary << "train: family=" << family.name << " balancer=" << cfg.balancer
          << " K=" << cfg.iterations << "\n";
  summary << "status = "
          << (trace.status == RunStatus::Ok
                  ? "ok"
                  : trace.status == RunStatus::Diverged ? "diverged" : "non-finite")
          << "\n";
  summary << "worst-case risk at averaged iterate = " << terminal.value << "\n";
  summary << (trace.ok() ? "PASS" : "FAIL") << ": run completed\n";
  output.summary = summary.str();
  output.pass = trace.ok();
  return output;
}

template <typename Report>
StudyOutput output_from_report(const Report& report) {
  StudyOutput output;
  std::ostringstream csv;
  report.write_csv(csv);
  output.csv = csv.str();
  std::ostringstream summary;
  report.write_summary(summary);
  output.summary = summary.str();
  output.pass = report.pass();
  return output;
}

StudyOutput study_convergence(const ExperimentConfig& cfg, const CliOptions& cli) {
  const TaskFamily family = cfg.make_family();
  const Vec theta0 = cfg.initial_point(family);
  std::vector<std::size_t> k_list = cfg.k_list;
  if (k_list.empty()) k_list = {100, 400, 1600, 6400};
  ConvergenceOptions opts;
  opts.jobs = cli.jobs;
  if (cfg.alpha_mode == "constant") {
    opts.alpha_mode = AlphaSchedule::Mode::Constant;
    opts.alpha_value = cfg.alpha_value;
  }
  return output_from_report(
      run_convergence_study(family, ParamVector(theta0), k_list, opts));
}

StudyOutput study_compare_init(const ExperimentConfig& cfg, const CliOptions& cli) {
  const TaskFamily family = cfg.make_family();
  InitComparisonOptions opts;
  opts.jobs = cli.jobs;
  return output_from_report(run_init_comparison(family, opts));
}

StudyOutput study_sample_complexity(const ExperimentConfig& cfg, const CliOptions& cli) {
  const TaskFamily family = cfg.make_family();
  std::vector<std::size_t> grid = cfg.sample_grid;
  if (grid.empty()) grid = {1, 2, 4, 8, 16, 32, 64, 128, 256};
  ComplexityComparisonOptions opts;
  opts.jobs = cli.jobs;
  return output_from_report(run_worstcase_complexity_comparison(
      family, cfg.eps, cfg.delta, grid, cfg.trials, cfg.seed, opts));
}

StudyOutput study_compare_balancers(const ExperimentConfig& cfg, const CliOptions& cli) {
  (void)cli;
  const TaskFamily family = cfg.make_family();
  const Vec theta0 = cfg.initial_point(family);
  std::vector<std::string> methods = cfg.methods;
  if (methods.empty()) methods = {"minimax", "none", "uncertainty", "gradnorm", "dwa"};
  return output_from_report(
      run_balancer_comparison(family, ParamVector(theta0), cfg.eta, cfg.iterations, methods));
}

int run_study(const std::string& study, const CliOptions& cli) {
  try {
    ExperimentConfig cfg;
    if (study == "gap") {
      cfg.family_kind = "gap";
      cfg.family_size = cli.gap_tasks;
      if (cli.seed_set) cfg.seed = cli.seed_flag;
    } else {
      cfg = ExperimentConfig::load(cli.config_path);
      if (!cfg.study.empty() && cfg.study != study) {
        throw ConfigError("study", "config is for '" + cfg.study + "', subcommand is '" +
                                       study + "'");
      }
      if (cli.seed_set) cfg.seed = cli.seed_flag;
    }

    StudyOutput output;
    if (study == "train") {
      output = study_train(cfg, cli);
    } else if (study == "convergence") {
      output = study_convergence(cfg, cli);
    } else if (study == "compare-init") {
      output = study_compare_init(cfg, cli);
    } else if (study == "sample-complexity") {
      output = study_sample_complexity(cfg, cli);
    } else if (study == "compare-balancers") {
      output = study_compare_balancers(cfg, cli);
    } else if (study == "gap") {
      output = output_from_report(run_gap_study(cli.gap_tasks, 4001, cli.jobs));
    }

    emit(study, cfg, cli, output);
    return output.pass ? kExitPass : kExitPropertyFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPropertyFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimax pre-training lab: SWGD, baselines and theory checks on "
               "synthetic convex task families"};
  app.require_subcommand(1);

  CliOptions cli;
  std::string study;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", cli.config_path, "path to a flat key=value config")
          ->required();
    }
    sub->add_option("--seed", cli.seed_flag, "override the config seed")
        ->each([&](const std::string&) { cli.seed_set = true; });
    sub->add_option("--outdir", cli.outdir_flag, "output directory");
    sub->add_option("--jobs", cli.jobs, "worker pool size")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", cli.quiet, "suppress progress output");
  };

  for (const char* name :
       {"train", "convergence", "compare-init", "sample-complexity", "compare-balancers"}) {
    CLI::App* sub = app.add_subcommand(name, "");
    add_common(sub, true);
    sub->callback([&, name] { study = name; });
  }
  CLI::App* gap = app.add_subcommand("gap", "analytic vs measured worst-case risk gap");
  gap->add_option("--T", cli.gap_tasks, "number of tasks")->check(CLI::Range(2, 1 << 20));
  add_common(gap, false);
  gap->callback([&] { study = "gap"; });

  CLI11_PARSE(app, argc, argv);
  return run_study(study, cli);
}
