#include "minimax_lab/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "minimax_lab/rng.hpp"

namespace minimax_lab {

Schedule Schedule::constant(double eta, AlphaSchedule alpha, std::size_t iterations) {
  if (!(eta >= 0.0)) throw std::invalid_argument("Schedule: negative eta");
  if (iterations < 1) throw std::invalid_argument("Schedule: K < 1");
  Schedule s;
  s.step_mode = StepMode::Constant;
  s.eta = eta;
  s.alpha = alpha;
  s.iterations = iterations;
  return s;
}

Schedule Schedule::theoretical(double r0, double lipschitz, AlphaSchedule alpha,
                               std::size_t iterations) {
  if (!(r0 >= 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument("Schedule: bad theoretical constants");
  }
  if (iterations < 1) throw std::invalid_argument("Schedule: K < 1");
  Schedule s;
  s.step_mode = StepMode::Theoretical;
  s.eta = r0 / (lipschitz * std::sqrt(static_cast<double>(iterations)));
  s.alpha = alpha;
  s.iterations = iterations;
  return s;
}

namespace {

void write_float(std::ostream& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out << buf;
}

// Weight provider: given (k, risks at theta_k, per-task gradients at theta_k),
// return the weights used for the step leaving theta_k.
using WeightProvider =
    std::function<WeightVector(std::size_t, const Vec&, const std::vector<Vec>&)>;

// Risk/gradient provider: exact on the deterministic path, minibatch means on
// the stochastic path (both from the same batch).
struct Estimates {
  Vec risks;
  std::vector<Vec> gradients;
};

RunTrace run_weighted_descent(const TaskFamily& family, const ParamVector& theta0,
                              const Schedule& schedule, const WeightProvider& weights_at,
                              const std::optional<StochasticOptions>& stochastic,
                              std::size_t record_every) {
  if (record_every == 0) throw std::invalid_argument("record_every must be >= 1");
  family.check_theta(theta0.coords());
  if (norm(theta0.coords()) > family.domain_radius * (1.0 + 1e-12)) {
    throw std::invalid_argument("run: theta0 outside the domain ball");
  }

  const auto t_start = std::chrono::steady_clock::now();
  const std::size_t T = family.size();
  const std::size_t K = schedule.iterations;
  const double guard = 1e3 * family.domain_radius;

  RunTrace trace;
  trace.iterations = K;
  trace.record_every = record_every;
  trace.seed = stochastic ? stochastic->seed : 0;
  trace.rows.reserve(K / record_every + 1);

  Vec theta = theta0.coords();
  Vec theta_sum(family.dim, 0.0);

  auto estimate = [&](std::size_t k) {
    Estimates est;
    if (!stochastic) {
      est.risks = family.risks(theta);
      est.gradients.resize(T);
      for (std::size_t t = 0; t < T; ++t) est.gradients[t] = family.tasks[t].gradient(theta);
      return est;
    }
    if (!family.has_samplers()) {
      throw std::invalid_argument("swgd_run: stochastic path needs samplers");
    }
    const std::size_t batch = std::max<std::size_t>(stochastic->batch_size, 1);
    est.risks.assign(T, 0.0);
    est.gradients.assign(T, Vec(family.dim, 0.0));
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t b = 0; b < batch; ++b) {
        const std::uint64_t s = mix_seed(stochastic->seed, k, t, b);
        const TaskSample sample = family.tasks[t].sample(s, theta);
        est.risks[t] += sample.loss;
        axpy(est.gradients[t], 1.0, sample.grad);
      }
      est.risks[t] /= static_cast<double>(batch);
      for (double& x : est.gradients[t]) x /= static_cast<double>(batch);
    }
    return est;
  };

  for (std::size_t k = 0; k < K; ++k) {
    const Estimates est = estimate(k);
    const WeightVector w = weights_at(k, est.risks, est.gradients);

    Vec step_dir(family.dim, 0.0);
    for (std::size_t t = 0; t < T; ++t) axpy(step_dir, w[t], est.gradients[t]);

    TraceRow row;
    row.k = k;
    row.theta = theta;
    row.risks = est.risks;
    row.weights = w;
    row.worst_risk = *std::max_element(est.risks.begin(), est.risks.end());
    double sum_r = 0.0;
    for (double r : est.risks) sum_r += r;
    row.avg_risk = sum_r / static_cast<double>(T);
    row.grad_norm = norm(step_dir);
    if (k % record_every == 0) trace.rows.push_back(row);

    axpy(theta_sum, 1.0, theta);
    trace.completed = k + 1;
    trace.theta_final = theta;
    if (row.worst_risk < trace.best_worst_risk) {
      trace.best_worst_risk = row.worst_risk;
      trace.theta_best = theta;
    }

    if (k + 1 < K) {
      axpy(theta, -schedule.step(k), step_dir);
      if (!all_finite(theta)) {
        trace.status = RunStatus::NonFinite;
        break;
      }
      if (norm(theta) > guard) {
        trace.status = RunStatus::Diverged;
        break;
      }
    }
  }

  trace.theta_bar = theta_sum;
  for (double& x : trace.theta_bar) x /= static_cast<double>(trace.completed);
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

}  // namespace

void RunTrace::write_csv(std::ostream& out) const {
  const std::size_t T = rows.empty() ? 0 : rows.front().risks.size();
  out << "k,worst_risk,avg_risk";
  for (std::size_t t = 1; t <= T; ++t) out << ",risk_" << t;
  for (std::size_t t = 1; t <= T; ++t) out << ",w_" << t;
  out << ",grad_norm\n";
  for (const TraceRow& row : rows) {
    out << row.k << ',';
    write_float(out, row.worst_risk);
    out << ',';
    write_float(out, row.avg_risk);
    for (double r : row.risks) {
      out << ',';
      write_float(out, r);
    }
    for (double w : row.weights) {
      out << ',';
      write_float(out, w);
    }
    out << ',';
    write_float(out, row.grad_norm);
    out << '\n';
  }
}

RunTrace swgd_run(const TaskFamily& family, const ParamVector& theta0,
                  const Schedule& schedule,
                  const std::optional<StochasticOptions>& stochastic,
                  std::size_t record_every) {
  const AlphaSchedule alpha = schedule.alpha;
  WeightProvider provider = [alpha](std::size_t k, const Vec& risks,
                                    const std::vector<Vec>&) {
    return softmax_weights(risks, alpha.at(k));
  };
  return run_weighted_descent(family, theta0, schedule, provider, stochastic,
                              record_every);
}

RunTrace average_gd_run(const TaskFamily& family, const ParamVector& theta0, double eta,
                        std::size_t iterations, std::size_t record_every) {
  // smoothness of the average risk, bounded by the average of smoothnesses
  double l_avg = 0.0;
  for (const Task& t : family.tasks) l_avg += t.smoothness;
  l_avg /= static_cast<double>(family.size());
  if (eta > 1.0 / l_avg) {
    throw std::invalid_argument("average_gd_run: eta > 1/L of the average risk");
  }
  const std::size_t T = family.size();
  WeightProvider provider = [T](std::size_t, const Vec&, const std::vector<Vec>&) {
    return WeightVector(T, 1.0 / static_cast<double>(T));
  };
  const Schedule schedule =
      Schedule::constant(eta, AlphaSchedule::constant(0.0), iterations);
  return run_weighted_descent(family, theta0, schedule, provider, {}, record_every);
}

RunTrace balanced_run(const TaskFamily& family, const ParamVector& theta0,
                      BalanceMethod method, double eta, std::size_t iterations,
                      std::size_t record_every) {
  auto state = std::make_shared<BalancerState>(BalancerState::make(method, family.size()));
  WeightProvider provider = [state](std::size_t, const Vec& risks,
                                    const std::vector<Vec>& gradients) {
    return baseline_weights(*state, risks, gradients);
  };
  const Schedule schedule =
      Schedule::constant(eta, AlphaSchedule::constant(0.0), iterations);
  return run_weighted_descent(family, theta0, schedule, provider, {}, record_every);
}

Vec project_onto_ball(const Vec& theta, const Ball& ball) {
  check_dim(theta.size(), ball.center.size(), "project_onto_ball");
  const double d = dist(theta, ball.center);
  if (d <= ball.radius) return theta;
  Vec out = ball.center;
  if (d > 0.0) {
    const double scale = ball.radius / d;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += scale * (theta[i] - ball.center[i]);
    }
  }
  return out;
}

RunTrace projected_gd_run(const ObjectiveFn& objective, const ObjectiveGradFn& gradient,
                          const Ball& ball, const ParamVector& theta0, double eta,
                          std::size_t iterations, std::size_t record_every) {
  if (record_every == 0) throw std::invalid_argument("record_every must be >= 1");
  if (iterations < 1) throw std::invalid_argument("projected_gd_run: K < 1");
  if (dist(theta0.coords(), ball.center) > ball.radius * (1.0 + 1e-12) + 1e-15) {
    throw std::invalid_argument("projected_gd_run: theta0 outside ball");
  }
  const auto t_start = std::chrono::steady_clock::now();

  RunTrace trace;
  trace.iterations = iterations;
  trace.record_every = record_every;
  trace.rows.reserve(iterations / record_every + 1);

  Vec theta = theta0.coords();
  Vec theta_sum(theta.size(), 0.0);

  for (std::size_t k = 0; k < iterations; ++k) {
    const double value = objective(theta);
    const Vec grad = gradient(theta);

    TraceRow row;
    row.k = k;
    row.theta = theta;
    row.risks = {value};
    row.weights = {1.0};
    row.worst_risk = value;
    row.avg_risk = value;
    row.grad_norm = norm(grad);
    if (k % record_every == 0) trace.rows.push_back(row);

    axpy(theta_sum, 1.0, theta);
    trace.completed = k + 1;
    trace.theta_final = theta;
    if (value < trace.best_worst_risk) {
      trace.best_worst_risk = value;
      trace.theta_best = theta;
    }

    if (k + 1 < iterations) {
      axpy(theta, -eta, grad);
      theta = project_onto_ball(theta, ball);
      if (!all_finite(theta)) {
        trace.status = RunStatus::NonFinite;
        break;
      }
    }
  }

  trace.theta_bar = theta_sum;
  for (double& x : trace.theta_bar) x /= static_cast<double>(trace.completed);
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

}  // namespace minimax_lab
