#include "minimax_lab/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace minimax_lab {

WeightVector softmax_weights(const Vec& risks, double alpha) {
  if (risks.empty()) throw std::invalid_argument("softmax_weights: empty risks");
  if (!(alpha >= 0.0)) throw std::invalid_argument("softmax_weights: negative alpha");
  if (!all_finite(risks)) throw std::invalid_argument("softmax_weights: non-finite risk");

  const std::size_t n = risks.size();
  WeightVector w(n);
  double max_r = risks[0];
  for (double r : risks) max_r = std::max(max_r, r);
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    w[t] = std::exp(alpha * (risks[t] - max_r));
    sum += w[t];
  }
  for (double& x : w) x /= sum;
  return w;
}

double theoretical_alpha(std::size_t k, double r0, double lipschitz,
                         std::size_t num_tasks, double bound) {
  if (!(r0 > 0.0) || !(lipschitz > 0.0) || !(bound > 0.0) || num_tasks == 0) {
    throw std::invalid_argument("theoretical_alpha: nonpositive constant");
  }
  constexpr double kAlphaFloor = 1e-3;
  const double rl = r0 * lipschitz;
  const double root = std::sqrt(static_cast<double>(k) + 1.0);
  const double value =
      (4.0 * root / rl) * std::log(4.0 * static_cast<double>(num_tasks) * bound * root / rl);
  return std::max(value, kAlphaFloor);
}

double softmax_surrogate_value(const Vec& risks, double alpha) {
  const WeightVector w = softmax_weights(risks, alpha);
  double s = 0.0;
  for (std::size_t t = 0; t < risks.size(); ++t) s += w[t] * risks[t];
  return s;
}

AlphaSchedule AlphaSchedule::constant(double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("AlphaSchedule: negative alpha");
  AlphaSchedule s;
  s.mode = Mode::Constant;
  s.value = alpha;
  return s;
}

AlphaSchedule AlphaSchedule::theoretical(double r0, double lipschitz,
                                         std::size_t num_tasks, double bound) {
  AlphaSchedule s;
  s.mode = Mode::Theoretical;
  s.r0 = r0;
  s.lipschitz = lipschitz;
  s.num_tasks = num_tasks;
  s.bound = bound;
  // validate eagerly
  theoretical_alpha(0, r0, lipschitz, num_tasks, bound);
  return s;
}

double AlphaSchedule::at(std::size_t k) const {
  if (mode == Mode::Constant) return value;
  return theoretical_alpha(k, r0, lipschitz, num_tasks, bound);
}

BalanceMethod parse_balance_method(const std::string& key) {
  if (key == "none" || key == "uniform") return BalanceMethod::Uniform;
  if (key == "uncertainty") return BalanceMethod::Uncertainty;
  if (key == "gradnorm") return BalanceMethod::GradNormLite;
  if (key == "dwa") return BalanceMethod::Dwa;
  throw std::invalid_argument("unknown balance method: " + key);
}

std::string balance_method_name(BalanceMethod method) {
  switch (method) {
    case BalanceMethod::Uniform: return "none";
    case BalanceMethod::Uncertainty: return "uncertainty";
    case BalanceMethod::GradNormLite: return "gradnorm";
    case BalanceMethod::Dwa: return "dwa";
  }
  return "?";
}

BalancerState BalancerState::make(BalanceMethod method, std::size_t num_tasks) {
  BalancerState s;
  s.method = method;
  s.log_variance.assign(num_tasks, 0.0);
  s.weights.assign(num_tasks, 1.0 / static_cast<double>(num_tasks));
  return s;
}

namespace {

void normalize(WeightVector& w) {
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
}

WeightVector uniform_weights(std::size_t n) {
  WeightVector w(n, 1.0 / static_cast<double>(n));
  return w;
}

}  // namespace

WeightVector baseline_weights(BalancerState& state, const Vec& risks,
                              const std::vector<Vec>& gradients) {
  const std::size_t n = risks.size();
  if (n == 0) throw std::invalid_argument("baseline_weights: empty risks");
  WeightVector w;

  switch (state.method) {
    case BalanceMethod::Uniform: {
      w = uniform_weights(n);
      break;
    }
    case BalanceMethod::Uncertainty: {
      check_dim(state.log_variance.size(), n, "baseline_weights uncertainty state");
      // one gradient step on sum_t exp(-2 s_t) r_t + s_t
      for (std::size_t t = 0; t < n; ++t) {
        const double g = 1.0 - 2.0 * std::exp(-2.0 * state.log_variance[t]) * risks[t];
        state.log_variance[t] -= state.uncertainty_step * g;
      }
      w.resize(n);
      for (std::size_t t = 0; t < n; ++t) w[t] = std::exp(-2.0 * state.log_variance[t]);
      normalize(w);
      break;
    }
    case BalanceMethod::Dwa: {
      if (state.prev_risks.size() != n || state.prev_prev_risks.size() != n) {
        w = uniform_weights(n);  // no history before iteration 2
      } else {
        w.resize(n);
        double max_e = -1e300;
        for (std::size_t t = 0; t < n; ++t) {
          const double denom = std::max(state.prev_prev_risks[t], 1e-300);
          w[t] = (state.prev_risks[t] / denom) / state.dwa_temperature;
          max_e = std::max(max_e, w[t]);
        }
        for (double& x : w) x = std::exp(x - max_e);
        normalize(w);
      }
      break;
    }
    case BalanceMethod::GradNormLite: {
      check_dim(gradients.size(), n, "baseline_weights gradients");
      check_dim(state.weights.size(), n, "baseline_weights gradnorm state");
      Vec norms(n);
      double mean_norm = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        norms[t] = norm(gradients[t]);
        mean_norm += norms[t];
      }
      mean_norm /= static_cast<double>(n);
      w = state.weights;
      constexpr double kEps = 1e-12;
      for (std::size_t t = 0; t < n; ++t) {
        w[t] *= std::pow((mean_norm + kEps) / (norms[t] + kEps), state.gradnorm_rate);
      }
      normalize(w);
      state.weights = w;
      break;
    }
  }

  state.prev_prev_risks = state.prev_risks;
  state.prev_risks = risks;
  state.iteration += 1;
  return w;
}

}  // namespace minimax_lab
