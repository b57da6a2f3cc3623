#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>

#include "minimax_lab/tasks.hpp"
#include "minimax_lab/weighting.hpp"

namespace minimax_lab {

/// Step-size and softmax schedules for one run of K iterations.
/// The theoretical step mode fixes eta = R0 / (L' * sqrt(K)).
struct Schedule {
  enum class StepMode { Constant, Theoretical };

  StepMode step_mode = StepMode::Constant;
  double eta = 0.0;
  AlphaSchedule alpha;
  std::size_t iterations = 1;  // K

  static Schedule constant(double eta, AlphaSchedule alpha, std::size_t iterations);
  static Schedule theoretical(double r0, double lipschitz, AlphaSchedule alpha,
                              std::size_t iterations);

  double step(std::size_t /*k*/) const { return eta; }
};

struct TraceRow {
  std::size_t k = 0;
  Vec theta;
  Vec risks;             // as seen by the algorithm (exact or minibatch means)
  WeightVector weights;  // used for the step leaving this iterate
  double worst_risk = 0.0;
  double avg_risk = 0.0;
  double grad_norm = 0.0;  // norm of the weighted gradient
};

enum class RunStatus { Ok, Diverged, NonFinite };

struct StochasticOptions {
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
};

/// Full record of one optimizer run. rows may be thinned by record_every, but
/// theta_bar is always the exact average of theta_0 .. theta_{K-1} and
/// theta_best / best_worst_risk always scan every iterate.
struct RunTrace {
  std::vector<TraceRow> rows;
  std::size_t iterations = 0;   // requested K
  std::size_t completed = 0;    // iterates actually produced
  std::size_t record_every = 1;
  Vec theta_bar;
  Vec theta_final;
  Vec theta_best;
  double best_worst_risk = std::numeric_limits<double>::infinity();
  RunStatus status = RunStatus::Ok;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;

  bool ok() const { return status == RunStatus::Ok; }

  /// columns: k, worst_risk, avg_risk, risk_1..risk_T, w_1..w_T, grad_norm
  void write_csv(std::ostream& out) const;
};

/// Softmax weighted gradient descent. Deterministic path uses exact risks and
/// gradients; the stochastic path estimates both from the same minibatch.
RunTrace swgd_run(const TaskFamily& family, const ParamVector& theta0,
                  const Schedule& schedule,
                  const std::optional<StochasticOptions>& stochastic = {},
                  std::size_t record_every = 1);

/// Gradient descent on the average risk (1/T) * sum_t E[l_t].
RunTrace average_gd_run(const TaskFamily& family, const ParamVector& theta0, double eta,
                        std::size_t iterations, std::size_t record_every = 1);

struct Ball {
  Vec center;
  double radius = 0.0;
};

Vec project_onto_ball(const Vec& theta, const Ball& ball);

using ObjectiveFn = std::function<double(const Vec&)>;
using ObjectiveGradFn = std::function<Vec(const Vec&)>;

/// Gradient step followed by Euclidean projection onto the ball; all iterates
/// stay inside. Trace rows carry the single objective value as risk_1.
RunTrace projected_gd_run(const ObjectiveFn& objective, const ObjectiveGradFn& gradient,
                          const Ball& ball, const ParamVector& theta0, double eta,
                          std::size_t iterations, std::size_t record_every = 1);

/// Like swgd_run but weights come from one of the baseline balancing rules.
RunTrace balanced_run(const TaskFamily& family, const ParamVector& theta0,
                      BalanceMethod method, double eta, std::size_t iterations,
                      std::size_t record_every = 1);

}  // namespace minimax_lab
