#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "minimax_lab/oracle.hpp"
#include "minimax_lab/optimizer.hpp"
#include "minimax_lab/tasks.hpp"

namespace minimax_lab {

// ---------------------------------------------------------------------------
// convergence study: excess worst-case risk of the averaged iterate against
// the 2 R0 L' / sqrt(K) bound, plus the 1/sqrt(K) decay shape check between
// K and 16K rows.
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  std::size_t iterations = 0;  // K
  double excess = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

struct ConvergenceRatio {
  std::size_t k_small = 0;
  std::size_t k_large = 0;
  double ratio = 0.0;  // clamped excess(K) / excess(16K)
  bool satisfied = false;
};

struct ConvergenceReport {
  std::string family_name;
  Vec oracle_theta;
  double oracle_value = 0.0;
  double r0 = 0.0;
  double lipschitz = 0.0;
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceRatio> ratios;

  bool pass() const;
  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

struct ConvergenceOptions {
  AlphaSchedule::Mode alpha_mode = AlphaSchedule::Mode::Theoretical;
  double alpha_value = 1.0;  // constant mode only
  std::size_t grid_resolution = 2001;
  std::size_t jobs = 1;
};

ConvergenceReport run_convergence_study(const TaskFamily& family, const ParamVector& theta0,
                                        const std::vector<std::size_t>& k_list,
                                        const ConvergenceOptions& opts = {});

// ---------------------------------------------------------------------------
// initialization comparison: worst-case downstream risk of the minimax
// initialization vs the average-risk initialization.
// ---------------------------------------------------------------------------

struct InitComparisonReport {
  std::string family_name;
  Vec theta_max;  // best available minimax point (grid oracle vs long SWGD run)
  Vec theta_avg;
  double worst_max = 0.0;
  double worst_avg = 0.0;
  double ratio = 0.0;  // worst_avg / worst_max
  double grid_value = 0.0;
  double swgd_value = 0.0;
  double agreement_tol = 0.0;   // max(1e-3, grid error bound)
  bool oracle_agrees = false;   // |swgd_value - grid_value| <= agreement_tol
  bool ordering_holds = false;  // worst_max <= worst_avg + 1e-9

  bool pass() const { return ordering_holds && oracle_agrees; }
  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

struct InitComparisonOptions {
  std::size_t swgd_iterations = 20000;
  std::size_t grid_resolution = 2001;
  std::size_t jobs = 1;
};

InitComparisonReport run_init_comparison(const TaskFamily& family,
                                         const InitComparisonOptions& opts = {});

// ---------------------------------------------------------------------------
// downstream ERM sample-complexity estimation.
// ---------------------------------------------------------------------------

struct ErmTrialResult {
  Vec lambda_weights;
  Vec theta0;
  std::size_t num_samples = 0;
  double excess_risk = 0.0;  // >= 0 up to rounding
  bool success = false;      // excess <= eps
};

/// One seeded ERM trial: draw N i.i.d. samples, minimize the empirical
/// downstream risk by projected gradient descent inside the basin ball, and
/// evaluate the true excess expected risk of the ERM point.
ErmTrialResult erm_trial(const TaskFamily& family, const SimplexPoint& lambda,
                         const Vec& theta0, double eps, std::size_t num_samples,
                         std::uint64_t seed);

struct ComplexityCurve {
  std::vector<std::size_t> sample_grid;
  std::vector<double> success_rate;
  std::size_t trials = 0;
  double eps = 0.0;

  /// smallest grid N with success rate >= 1 - delta (first crossing);
  /// empty when the curve never crosses.
  std::optional<std::size_t> n_hat(double delta) const;
};

ComplexityCurve run_erm_trials(const TaskFamily& family, const SimplexPoint& lambda,
                               const Vec& theta0, double eps,
                               const std::vector<std::size_t>& sample_grid,
                               std::size_t trials, std::uint64_t seed,
                               std::size_t jobs = 1);

// ---------------------------------------------------------------------------
// worst-case sample-complexity comparison between the two initializations.
// The worst case over the downstream simplex is attained at a vertex, so only
// vertices are scanned.
// ---------------------------------------------------------------------------

struct ComplexityInitResult {
  std::string label;
  Vec theta0;
  double init_worst_risk = 0.0;
  std::vector<std::optional<std::size_t>> n_hat_per_vertex;
  std::optional<std::size_t> worst_n_hat;
  std::vector<std::size_t> worst_vertices;  // all vertices attaining worst_n_hat
  double bound_value = 0.0;                 // sample-complexity bound at init_worst_risk
  bool within_bound = false;
  std::vector<ComplexityCurve> curves;  // one per vertex
};

struct ComplexityComparisonReport {
  std::string family_name;
  double eps = 0.0;
  double delta = 0.0;
  Vec oracle_theta;
  double oracle_value = 0.0;
  ComplexityInitResult minimax_init;
  ComplexityInitResult average_init;
  bool direction_holds = false;  // worst N_hat(minimax) <= worst N_hat(average)

  bool pass() const {
    return direction_holds && minimax_init.within_bound && average_init.within_bound;
  }
  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

struct ComplexityComparisonOptions {
  std::size_t grid_resolution = 2001;
  std::size_t jobs = 1;
};

ComplexityComparisonReport run_worstcase_complexity_comparison(
    const TaskFamily& family, double eps, double delta,
    const std::vector<std::size_t>& sample_grid, std::size_t trials, std::uint64_t seed,
    const ComplexityComparisonOptions& opts = {});

// ---------------------------------------------------------------------------
// balancer comparison: terminal worst-case / average risk per balancing rule.
// ---------------------------------------------------------------------------

struct BalancerRow {
  std::string method;
  double worst_risk = 0.0;
  double avg_risk = 0.0;
  std::size_t grad_evaluations = 0;
};

struct BalancerComparisonReport {
  std::string family_name;
  std::vector<BalancerRow> rows;
  bool minimax_weakly_best = false;

  bool pass() const { return minimax_weakly_best; }
  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

struct BalancerComparisonOptions {
  double minimax_alpha = 40.0;  // constant softmax hyperparameter for the minimax row
};

BalancerComparisonReport run_balancer_comparison(const TaskFamily& family,
                                                 const ParamVector& theta0, double eta,
                                                 std::size_t iterations,
                                                 const std::vector<std::string>& methods,
                                                 const BalancerComparisonOptions& opts = {});

// ---------------------------------------------------------------------------
// gap construction check: measured worst-case risk ratio between the two
// initializations on gap_family(T) against (1 + sqrt(T-1))^2 / 4.
// ---------------------------------------------------------------------------

struct GapReport {
  std::size_t num_tasks = 0;
  double measured_ratio = 0.0;
  double expected_ratio = 0.0;
  double worst_max = 0.0;
  double worst_avg = 0.0;
  Vec oracle_theta;
  bool within_one_percent = false;

  bool pass() const { return within_one_percent; }
  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

double gap_expected_ratio(std::size_t num_tasks);

GapReport run_gap_study(std::size_t num_tasks, std::size_t grid_resolution = 4001,
                        std::size_t jobs = 1);

}  // namespace minimax_lab
