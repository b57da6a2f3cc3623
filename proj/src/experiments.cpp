#include "minimax_lab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "minimax_lab/rng.hpp"

namespace minimax_lab {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string join_point(const Vec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += fmt17(v[i]);
  }
  return out;
}

const char* pass_str(bool ok) { return ok ? "PASS" : "FAIL"; }

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  const std::size_t chunk = (n + jobs - 1) / jobs;
  for (std::size_t w = 0; w < jobs; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace

// ---------------------------------------------------------------------------
// convergence study
// ---------------------------------------------------------------------------

bool ConvergenceReport::pass() const {
  for (const ConvergenceRow& row : rows) {
    if (!row.satisfied) return false;
  }
  for (const ConvergenceRatio& ratio : ratios) {
    if (!ratio.satisfied) return false;
  }
  return !rows.empty();
}

void ConvergenceReport::write_csv(std::ostream& out) const {
  out << "K,excess,bound_value,satisfied,oracle_theta_star,oracle_value\n";
  for (const ConvergenceRow& row : rows) {
    out << row.iterations << ',' << fmt17(row.excess) << ',' << fmt17(row.bound) << ','
        << (row.satisfied ? 1 : 0) << ',' << join_point(oracle_theta) << ','
        << fmt17(oracle_value) << '\n';
  }
}

void ConvergenceReport::write_summary(std::ostream& out) const {
  out << "convergence study: family=" << family_name << "\n";
  out << "oracle theta* = " << join_point(oracle_theta)
      << "  value = " << fmt17(oracle_value) << "\n";
  out << "R0 = " << fmt17(r0) << "  L' = " << fmt17(lipschitz) << "\n";
  for (const ConvergenceRow& row : rows) {
    out << "K=" << row.iterations << "  excess=" << fmt17(row.excess)
        << "  bound=" << fmt17(row.bound)
        << "  bound satisfied: " << (row.satisfied ? "true" : "false") << "\n";
  }
  for (const ConvergenceRatio& ratio : ratios) {
    out << "decay excess(" << ratio.k_small << ")/excess(" << ratio.k_large
        << ") = " << fmt17(ratio.ratio) << " (>= 3): " << pass_str(ratio.satisfied) << "\n";
  }
  out << pass_str(pass()) << ": convergence bound\n";
}

ConvergenceReport run_convergence_study(const TaskFamily& family, const ParamVector& theta0,
                                        const std::vector<std::size_t>& k_list,
                                        const ConvergenceOptions& opts) {
  if (k_list.empty()) throw std::invalid_argument("run_convergence_study: empty K list");
  const GridMinimaxResult oracle =
      grid_minimax(family, default_grid_box(family), opts.grid_resolution, {}, opts.jobs);

  ConvergenceReport report;
  report.family_name = family.name;
  report.oracle_theta = oracle.theta;
  report.oracle_value = oracle.value;
  report.lipschitz = family.lipschitz();
  report.r0 = dist(theta0.coords(), oracle.theta);

  for (std::size_t k : k_list) {
    Schedule schedule;
    if (report.r0 < 1e-12) {
      // already at the optimum: zero step keeps the iterate there
      schedule = Schedule::constant(0.0, AlphaSchedule::constant(1.0), k);
    } else if (opts.alpha_mode == AlphaSchedule::Mode::Theoretical) {
      schedule = Schedule::theoretical(
          report.r0, report.lipschitz,
          AlphaSchedule::theoretical(report.r0, report.lipschitz, family.size(),
                                     family.bound()),
          k);
    } else {
      schedule = Schedule::theoretical(report.r0, report.lipschitz,
                                       AlphaSchedule::constant(opts.alpha_value), k);
    }
    const RunTrace trace = swgd_run(family, theta0, schedule, {}, k);
    if (!trace.ok()) {
      throw std::runtime_error("run_convergence_study: run diverged at K=" +
                               std::to_string(k));
    }
    ConvergenceRow row;
    row.iterations = k;
    row.excess = worst_case_risk(family, trace.theta_bar).value - oracle.value;
    row.bound = 2.0 * report.r0 * report.lipschitz / std::sqrt(static_cast<double>(k));
    row.satisfied = row.excess <= row.bound + 1e-12;
    report.rows.push_back(row);
  }

  // decay shape: excess at K vs 16K, clamped at zero to ignore oracle noise
  for (const ConvergenceRow& small : report.rows) {
    for (const ConvergenceRow& large : report.rows) {
      if (large.iterations != 16 * small.iterations) continue;
      ConvergenceRatio ratio;
      ratio.k_small = small.iterations;
      ratio.k_large = large.iterations;
      const double e_small = std::max(small.excess, 0.0);
      const double e_large = std::max(large.excess, 0.0);
      ratio.ratio = e_large > 0.0 ? e_small / e_large
                                  : std::numeric_limits<double>::infinity();
      ratio.satisfied = e_large <= 1e-9 || e_small + 1e-12 >= 3.0 * e_large;
      report.ratios.push_back(ratio);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// initialization comparison
// ---------------------------------------------------------------------------

void InitComparisonReport::write_csv(std::ostream& out) const {
  out << "theta_max,worst_max,theta_avg,worst_avg,ratio,oracle_theta_star,oracle_value\n";
  out << join_point(theta_max) << ',' << fmt17(worst_max) << ',' << join_point(theta_avg)
      << ',' << fmt17(worst_avg) << ',' << fmt17(ratio) << ',' << join_point(theta_max)
      << ',' << fmt17(grid_value) << '\n';
}

void InitComparisonReport::write_summary(std::ostream& out) const {
  out << "init comparison: family=" << family_name << "\n";
  out << "theta_max = " << join_point(theta_max) << "  worst-case risk = " << fmt17(worst_max)
      << "\n";
  out << "theta_avg = " << join_point(theta_avg) << "  worst-case risk = " << fmt17(worst_avg)
      << "\n";
  out << "ratio = " << fmt17(ratio) << "\n";
  out << "grid value = " << fmt17(grid_value) << "  swgd value = " << fmt17(swgd_value)
      << "  tol = " << fmt17(agreement_tol) << ": " << pass_str(oracle_agrees) << "\n";
  out << pass_str(ordering_holds) << ": worst_max <= worst_avg\n";
  out << pass_str(pass()) << ": init comparison\n";
}

InitComparisonReport run_init_comparison(const TaskFamily& family,
                                         const InitComparisonOptions& opts) {
  InitComparisonReport report;
  report.family_name = family.name;
  report.theta_avg = analytic_average_minimizer(family);
  report.worst_avg = worst_case_risk(family, report.theta_avg).value;

  const GridMinimaxResult oracle =
      grid_minimax(family, default_grid_box(family), opts.grid_resolution,
                   {report.theta_avg}, opts.jobs);
  report.grid_value = oracle.value;

  // long SWGD run from the average minimizer, cross-checked against the grid
  const double r0 = dist(report.theta_avg, oracle.theta);
  RunTrace trace;
  if (r0 < 1e-12) {
    report.swgd_value = worst_case_risk(family, oracle.theta).value;
    report.theta_max = oracle.theta;
  } else {
    const Schedule schedule = Schedule::theoretical(
        r0, family.lipschitz(),
        AlphaSchedule::theoretical(r0, family.lipschitz(), family.size(), family.bound()),
        opts.swgd_iterations);
    trace = swgd_run(family, ParamVector(report.theta_avg), schedule, {},
                     opts.swgd_iterations);
    report.swgd_value = trace.best_worst_risk;
    report.theta_max = trace.theta_best;
  }

  report.agreement_tol = std::max(1e-3, oracle.error_bound);
  report.oracle_agrees = std::abs(report.swgd_value - report.grid_value) <= report.agreement_tol;

  // best available minimax point
  if (report.grid_value < report.swgd_value) report.theta_max = oracle.theta;
  report.worst_max = worst_case_risk(family, report.theta_max).value;
  report.ratio = report.worst_avg / report.worst_max;
  report.ordering_holds = report.worst_max <= report.worst_avg + 1e-9;
  return report;
}

// ---------------------------------------------------------------------------
// ERM trials
// ---------------------------------------------------------------------------

ErmTrialResult erm_trial(const TaskFamily& family, const SimplexPoint& lambda,
                         const Vec& theta0, double eps, std::size_t num_samples,
                         std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("erm_trial: eps <= 0");
  if (num_samples == 0) throw std::invalid_argument("erm_trial: N = 0");
  if (!family.has_samplers()) throw std::invalid_argument("erm_trial: family lacks samplers");
  family.check_theta(theta0);

  const BasinSpec basin = basin_from_initial_risk(family, lambda, theta0);
  if (basin.radius_sq == 0.0 && dist_sq(theta0, basin.center) > 0.0) {
    throw std::invalid_argument("erm_trial: zero basin radius with theta0 != theta*");
  }
  const Ball ball{basin.center, std::sqrt(basin.radius_sq)};
  const double min_value = downstream_risk(family, lambda, basin.center);

  // hold the samples: one tuple (z_1..z_T) per draw
  std::vector<std::vector<Vec>> samples;
  samples.reserve(num_samples);
  for (std::size_t j = 0; j < num_samples; ++j) {
    samples.push_back(draw_family_sample(family, mix_seed(seed, j)));
  }

  const double inv_n = 1.0 / static_cast<double>(num_samples);
  auto empirical_grad = [&](const Vec& theta) {
    Vec g(family.dim, 0.0);
    for (std::size_t t = 0; t < family.size(); ++t) {
      const double w = lambda.weights()[t];
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < num_samples; ++j) {
        axpy(g, w * inv_n, family.tasks[t].point_grad(theta, samples[j][t]));
      }
    }
    return g;
  };

  // projected gradient descent on the empirical risk inside the basin
  const double eta = 1.0 / downstream_smoothness(family, lambda);
  Vec theta = project_onto_ball(theta0, ball);
  for (std::size_t it = 0; it < 500; ++it) {
    const Vec g = empirical_grad(theta);
    if (norm(g) <= 1e-10) break;
    Vec next = theta;
    axpy(next, -eta, g);
    next = project_onto_ball(next, ball);
    const bool stationary = dist(next, theta) <= 1e-15 * (1.0 + norm(theta));
    theta = std::move(next);
    if (stationary) break;  // projected fixed point on the ball boundary
  }

  ErmTrialResult result;
  result.lambda_weights = lambda.weights();
  result.theta0 = theta0;
  result.num_samples = num_samples;
  result.excess_risk = downstream_risk(family, lambda, theta) - min_value;
  result.success = result.excess_risk <= eps;
  return result;
}

std::optional<std::size_t> ComplexityCurve::n_hat(double delta) const {
  for (std::size_t i = 0; i < sample_grid.size(); ++i) {
    if (success_rate[i] >= 1.0 - delta) return sample_grid[i];
  }
  return std::nullopt;
}

ComplexityCurve run_erm_trials(const TaskFamily& family, const SimplexPoint& lambda,
                               const Vec& theta0, double eps,
                               const std::vector<std::size_t>& sample_grid,
                               std::size_t trials, std::uint64_t seed, std::size_t jobs) {
  if (sample_grid.empty()) throw std::invalid_argument("run_erm_trials: empty N grid");
  if (trials == 0) throw std::invalid_argument("run_erm_trials: zero trials");

  ComplexityCurve curve;
  curve.sample_grid = sample_grid;
  curve.trials = trials;
  curve.eps = eps;
  curve.success_rate.assign(sample_grid.size(), 0.0);

  const std::size_t cells = sample_grid.size() * trials;
  std::vector<unsigned char> success(cells, 0);
  parallel_for(cells, jobs, [&](std::size_t cell) {
    const std::size_t n_index = cell / trials;
    const std::size_t trial = cell % trials;
    // independent stream per (master seed, N index, trial index)
    const std::uint64_t cell_seed = mix_seed(seed, n_index, trial);
    const ErmTrialResult r =
        erm_trial(family, lambda, theta0, eps, sample_grid[n_index], cell_seed);
    success[cell] = r.success ? 1 : 0;
  });

  for (std::size_t i = 0; i < sample_grid.size(); ++i) {
    std::size_t count = 0;
    for (std::size_t r = 0; r < trials; ++r) count += success[i * trials + r];
    curve.success_rate[i] = static_cast<double>(count) / static_cast<double>(trials);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// worst-case complexity comparison
// ---------------------------------------------------------------------------

namespace {

ComplexityInitResult complexity_for_init(const TaskFamily& family, const std::string& label,
                                         const Vec& theta0, double eps, double delta,
                                         const std::vector<std::size_t>& sample_grid,
                                         std::size_t trials, std::uint64_t seed,
                                         std::size_t jobs) {
  ComplexityInitResult result;
  result.label = label;
  result.theta0 = theta0;
  result.init_worst_risk = worst_case_risk(family, theta0).value;
  result.bound_value =
      sample_complexity_bound(eps, delta, family.dim, family.bound(), family.lipschitz(),
                              family.mu(), result.init_worst_risk);

  for (std::size_t t = 0; t < family.size(); ++t) {
    const SimplexPoint vertex = SimplexPoint::vertex(family.size(), t);
    // streams keyed by (seed, N index, trial) only, so the two
    // initializations see identical draws (paired comparison)
    ComplexityCurve curve = run_erm_trials(family, vertex, theta0, eps, sample_grid,
                                           trials, mix_seed(seed, 1000 + t), jobs);
    result.n_hat_per_vertex.push_back(curve.n_hat(delta));
    result.curves.push_back(std::move(curve));
  }

  // worst vertex: max N_hat; a missing crossing counts as worse than any value
  bool any_missing = false;
  std::size_t worst = 0;
  for (const auto& nh : result.n_hat_per_vertex) {
    if (!nh) {
      any_missing = true;
    } else {
      worst = std::max(worst, *nh);
    }
  }
  if (!any_missing) {
    result.worst_n_hat = worst;
    for (std::size_t t = 0; t < result.n_hat_per_vertex.size(); ++t) {
      if (*result.n_hat_per_vertex[t] == worst) result.worst_vertices.push_back(t);
    }
    result.within_bound = static_cast<double>(worst) <= result.bound_value;
  }
  return result;
}

}  // namespace

void ComplexityComparisonReport::write_csv(std::ostream& out) const {
  out << "init,vertex,N,success_rate,n_hat,init_worst_risk,bound_value,"
         "oracle_theta_star,oracle_value\n";
  for (const ComplexityInitResult* init : {&minimax_init, &average_init}) {
    for (std::size_t t = 0; t < init->curves.size(); ++t) {
      const ComplexityCurve& curve = init->curves[t];
      for (std::size_t i = 0; i < curve.sample_grid.size(); ++i) {
        out << init->label << ',' << (t + 1) << ',' << curve.sample_grid[i] << ','
            << fmt17(curve.success_rate[i]) << ',';
        if (init->n_hat_per_vertex[t]) {
          out << *init->n_hat_per_vertex[t];
        }
        out << ',' << fmt17(init->init_worst_risk) << ',' << fmt17(init->bound_value)
            << ',' << join_point(oracle_theta) << ',' << fmt17(oracle_value) << '\n';
      }
    }
  }
}

void ComplexityComparisonReport::write_summary(std::ostream& out) const {
  out << "sample-complexity comparison: family=" << family_name << "  eps=" << fmt17(eps)
      << "  delta=" << fmt17(delta) << "\n";
  for (const ComplexityInitResult* init : {&minimax_init, &average_init}) {
    out << init->label << ": theta0 = " << join_point(init->theta0)
        << "  worst initial risk = " << fmt17(init->init_worst_risk) << "\n";
    out << init->label << ": worst-vertex N_hat = ";
    if (init->worst_n_hat) {
      out << *init->worst_n_hat << " (vertices";
      for (std::size_t v : init->worst_vertices) out << ' ' << (v + 1);
      out << ")";
    } else {
      out << "not reached on grid";
    }
    out << "  bound = " << fmt17(init->bound_value) << "  within bound: "
        << pass_str(init->within_bound) << "\n";
  }
  out << pass_str(direction_holds) << ": N_hat(minimax) <= N_hat(average)\n";
  out << pass_str(pass()) << ": sample-complexity comparison\n";
}

ComplexityComparisonReport run_worstcase_complexity_comparison(
    const TaskFamily& family, double eps, double delta,
    const std::vector<std::size_t>& sample_grid, std::size_t trials, std::uint64_t seed,
    const ComplexityComparisonOptions& opts) {
  ComplexityComparisonReport report;
  report.family_name = family.name;
  report.eps = eps;
  report.delta = delta;

  const Vec theta_avg = analytic_average_minimizer(family);
  const GridMinimaxResult oracle = grid_minimax(family, default_grid_box(family),
                                                opts.grid_resolution, {theta_avg}, opts.jobs);
  report.oracle_theta = oracle.theta;
  report.oracle_value = oracle.value;

  report.minimax_init = complexity_for_init(family, "max", oracle.theta, eps, delta,
                                            sample_grid, trials, seed, opts.jobs);
  report.average_init = complexity_for_init(family, "average", theta_avg, eps, delta,
                                            sample_grid, trials, seed, opts.jobs);

  if (report.minimax_init.worst_n_hat && report.average_init.worst_n_hat) {
    report.direction_holds =
        *report.minimax_init.worst_n_hat <= *report.average_init.worst_n_hat;
  }
  return report;
}

// ---------------------------------------------------------------------------
// balancer comparison
// ---------------------------------------------------------------------------

void BalancerComparisonReport::write_csv(std::ostream& out) const {
  out << "method,worst_risk,avg_risk,grad_evaluations\n";
  for (const BalancerRow& row : rows) {
    out << row.method << ',' << fmt17(row.worst_risk) << ',' << fmt17(row.avg_risk) << ','
        << row.grad_evaluations << '\n';
  }
}

void BalancerComparisonReport::write_summary(std::ostream& out) const {
  out << "balancer comparison: family=" << family_name << "\n";
  for (const BalancerRow& row : rows) {
    out << row.method << ": worst=" << fmt17(row.worst_risk)
        << "  avg=" << fmt17(row.avg_risk) << "  grad evals=" << row.grad_evaluations
        << "\n";
  }
  out << pass_str(minimax_weakly_best) << ": minimax has the lowest worst-case risk\n";
  out << pass_str(pass()) << ": balancer comparison\n";
}

BalancerComparisonReport run_balancer_comparison(const TaskFamily& family,
                                                 const ParamVector& theta0, double eta,
                                                 std::size_t iterations,
                                                 const std::vector<std::string>& methods,
                                                 const BalancerComparisonOptions& opts) {
  BalancerComparisonReport report;
  report.family_name = family.name;

  for (const std::string& key : methods) {
    RunTrace trace;
    if (key == "minimax") {
      const Schedule schedule = Schedule::constant(
          eta, AlphaSchedule::constant(opts.minimax_alpha), iterations);
      trace = swgd_run(family, theta0, schedule, {}, iterations);
    } else {
      trace = balanced_run(family, theta0, parse_balance_method(key), eta, iterations,
                           iterations);
    }
    if (!trace.ok()) {
      throw std::runtime_error("run_balancer_comparison: run diverged for " + key);
    }
    BalancerRow row;
    row.method = key;
    const Vec risks = family.risks(trace.theta_bar);
    row.worst_risk = *std::max_element(risks.begin(), risks.end());
    double sum = 0.0;
    for (double r : risks) sum += r;
    row.avg_risk = sum / static_cast<double>(risks.size());
    row.grad_evaluations = trace.completed * family.size();
    report.rows.push_back(row);
  }

  const auto minimax_row = std::find_if(report.rows.begin(), report.rows.end(),
                                        [](const BalancerRow& r) { return r.method == "minimax"; });
  if (minimax_row != report.rows.end()) {
    report.minimax_weakly_best = true;
    for (const BalancerRow& row : report.rows) {
      if (minimax_row->worst_risk > row.worst_risk + 1e-12) {
        report.minimax_weakly_best = false;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// gap study
// ---------------------------------------------------------------------------

double gap_expected_ratio(std::size_t num_tasks) {
  if (num_tasks < 2) throw std::invalid_argument("gap_expected_ratio: T < 2");
  const double root = std::sqrt(static_cast<double>(num_tasks - 1));
  return (1.0 + root) * (1.0 + root) / 4.0;
}

void GapReport::write_csv(std::ostream& out) const {
  out << "T,worst_max,worst_avg,measured_ratio,expected_ratio,"
         "oracle_theta_star,oracle_value\n";
  out << num_tasks << ',' << fmt17(worst_max) << ',' << fmt17(worst_avg) << ','
      << fmt17(measured_ratio) << ',' << fmt17(expected_ratio) << ','
      << join_point(oracle_theta) << ',' << fmt17(worst_max) << '\n';
}

void GapReport::write_summary(std::ostream& out) const {
  out << "gap study: T=" << num_tasks << "\n";
  out << "worst-case risk at theta_max = " << fmt17(worst_max) << "\n";
  out << "worst-case risk at theta_avg = " << fmt17(worst_avg) << "\n";
  out << "ratio = " << fmt17(measured_ratio) << "  expected = " << fmt17(expected_ratio)
      << "\n";
  out << pass_str(within_one_percent) << ": ratio within 1% of (1+sqrt(T-1))^2/4\n";
  out << pass_str(pass()) << ": gap study\n";
}

GapReport run_gap_study(std::size_t num_tasks, std::size_t grid_resolution,
                        std::size_t jobs) {
  const TaskFamily family = gap_family(num_tasks);
  GapReport report;
  report.num_tasks = num_tasks;
  report.expected_ratio = gap_expected_ratio(num_tasks);

  const Vec theta_avg = analytic_average_minimizer(family);
  report.worst_avg = worst_case_risk(family, theta_avg).value;
  const GridMinimaxResult oracle =
      grid_minimax(family, default_grid_box(family), grid_resolution, {}, jobs);
  report.worst_max = oracle.value;
  report.oracle_theta = oracle.theta;
  report.measured_ratio = report.worst_avg / report.worst_max;
  report.within_one_percent =
      std::abs(report.measured_ratio - report.expected_ratio) <= 0.01 * report.expected_ratio;
  return report;
}

}  // namespace minimax_lab
