#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "minimax_lab/vec.hpp"

namespace minimax_lab {

/// Normalized per-task weights: entries in [0,1], summing to 1 within 1e-12.
using WeightVector = std::vector<double>;

/// w_t = exp(alpha * r_t) / sum_t' exp(alpha * r_t'), computed shift-invariantly
/// (the max of alpha*r is subtracted before exponentiation). alpha = 0 yields
/// uniform weights.
WeightVector softmax_weights(const Vec& risks, double alpha);

/// Right-hand side of the schedule condition
///   alpha_k >= (4*sqrt(k+1) / (R0*L')) * log(4*T*B*sqrt(k+1) / (R0*L')),
/// clamped below by 1e-3 (the condition is vacuous when the log is
/// nonpositive, but the weights need a positive alpha).
double theoretical_alpha(std::size_t k, double r0, double lipschitz,
                         std::size_t num_tasks, double bound);

/// sum_t w_t * r_t with w = softmax_weights(risks, alpha). Approximates
/// max(r) from below within 2*eps once alpha >= (1/eps) * log(T*B/eps).
double softmax_surrogate_value(const Vec& risks, double alpha);

/// Softmax hyperparameter schedule: fixed alpha, or the growing schedule
/// needed for the 1/sqrt(K) convergence guarantee.
struct AlphaSchedule {
  enum class Mode { Constant, Theoretical };

  Mode mode = Mode::Constant;
  double value = 1.0;  // constant mode
  double r0 = 1.0;     // theoretical mode parameters
  double lipschitz = 1.0;
  std::size_t num_tasks = 1;
  double bound = 1.0;

  static AlphaSchedule constant(double alpha);
  static AlphaSchedule theoretical(double r0, double lipschitz, std::size_t num_tasks,
                                   double bound);

  double at(std::size_t k) const;
};

enum class BalanceMethod { Uniform, Uncertainty, GradNormLite, Dwa };

BalanceMethod parse_balance_method(const std::string& key);
std::string balance_method_name(BalanceMethod method);

/// Per-run mutable state for the baseline balancing rules. Owned by a single
/// optimizer run; never shared.
struct BalancerState {
  BalanceMethod method = BalanceMethod::Uniform;
  std::size_t iteration = 0;
  Vec prev_risks;        // r^(k-1)
  Vec prev_prev_risks;   // r^(k-2)
  Vec log_variance;      // Uncertainty: s_t
  Vec weights;           // GradNormLite: current weights
  double dwa_temperature = 2.0;
  double uncertainty_step = 0.1;
  double gradnorm_rate = 0.5;

  static BalancerState make(BalanceMethod method, std::size_t num_tasks);
};

/// Weights for the comparison baselines. Uniform returns 1/T. Uncertainty
/// maintains log-variances s_t by gradient steps on
/// sum_t exp(-2 s_t) r_t + s_t and returns weights proportional to
/// exp(-2 s_t). DWA returns weights proportional to
/// exp((r^(k-1)_t / r^(k-2)_t) / tau), uniform before two risk histories
/// exist. GradNormLite multiplies weights by (mean ||g|| / ||g_t||)^gamma and
/// renormalizes.
WeightVector baseline_weights(BalancerState& state, const Vec& risks,
                              const std::vector<Vec>& gradients);

}  // namespace minimax_lab
