#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "minimax_lab/vec.hpp"

namespace minimax_lab {

/// Point in parameter space. Entries are validated finite on construction;
/// dimension checks happen at every family-level operation.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(Vec coords);

  const Vec& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }

 private:
  Vec coords_;
};

/// Metadata attached to tasks of the form c * ||theta - m||^2. Lets the
/// oracle module compute closed-form minimizers.
struct QuadraticSpec {
  Vec center;
  double curvature = 0.0;
  double noise_sigma = 0.0;
};

/// One sampled data point together with its loss and gradient at a given theta.
struct TaskSample {
  Vec z;
  double loss = 0.0;
  Vec grad;
};

/// One upstream task: expected risk with analytic gradient, regularity
/// constants certified on the family's domain ball, and an optional
/// stochastic sampler (pure given the seed).
struct Task {
  using RiskFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using DrawFn = std::function<Vec(std::uint64_t)>;          // seed -> z
  using PointLossFn = std::function<double(const Vec&, const Vec&)>;  // (theta, z)
  using PointGradFn = std::function<Vec(const Vec&, const Vec&)>;
  using DataWeightFn = std::function<double(const Vec&)>;    // importance weight on z

  RiskFn expected_risk;
  GradFn gradient;
  DrawFn draw;                 // null when the task has no sampler
  PointLossFn point_loss;      // loss of a held sample, weight already applied
  PointGradFn point_grad;
  DataWeightFn data_weight;    // optional, already folded into point_loss/grad

  double mu = 0.0;         // strong convexity
  double smoothness = 0.0; // L
  double lipschitz = 0.0;  // L' on the domain ball
  double bound = 0.0;      // B on the domain ball

  std::optional<QuadraticSpec> quadratic;

  bool has_sampler() const { return static_cast<bool>(draw); }

  // Draw one sample and evaluate loss/gradient at theta.
  TaskSample sample(std::uint64_t seed, const Vec& theta) const;
};

/// T upstream tasks sharing dimension d. Immutable after construction.
struct TaskFamily {
  std::string name;
  std::size_t dim = 0;
  double domain_radius = 1.0;
  std::vector<Task> tasks;

  std::size_t size() const { return tasks.size(); }

  // family constants: mu is the min over tasks, the rest are maxima
  double mu() const;
  double smoothness() const;
  double lipschitz() const;
  double bound() const;

  bool has_samplers() const;

  void check_theta(const Vec& theta) const;

  double risk(std::size_t t, const Vec& theta) const;
  Vec risks(const Vec& theta) const;
  Vec task_gradient(std::size_t t, const Vec& theta) const;
};

/// Downstream task index: a point of the probability simplex over tasks.
class SimplexPoint {
 public:
  explicit SimplexPoint(Vec weights);

  static SimplexPoint vertex(std::size_t num_tasks, std::size_t t);
  static SimplexPoint uniform(std::size_t num_tasks);

  const Vec& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }

 private:
  Vec weights_;
};

struct WorstCase {
  double value = 0.0;
  std::vector<std::size_t> argmax;  // every index within 1e-12 of the max
};

/// Family of tasks c_t * ||theta - m_t||^2 with Gaussian samplers.
/// The sampled loss subtracts c*sigma^2*d so it is unbiased for the expected
/// risk. domain_radius <= 0 selects the default 10 * max center norm + 1.
TaskFamily quadratic_family(const std::vector<Vec>& centers,
                            const std::vector<double>& curvatures,
                            double noise_sigma, double domain_radius = -1.0);

/// 1-D family f_1 = theta^2, f_t = (theta-1)^2/(T-1) for t >= 2, whose
/// average and minimax initializations have worst-case risks a factor
/// (1+sqrt(T-1))^2/4 apart. Declared on the ball of radius 1.
TaskFamily gap_family(std::size_t num_tasks, double noise_sigma = 0.0,
                      double domain_radius = 1.0);

/// Attach an importance sampler to task t: samples are drawn from a Gaussian
/// centered at sample_center instead of the task center and reweighted by the
/// density ratio, leaving the sampled loss unbiased for the expected risk.
void set_importance_sampling(TaskFamily& family, std::size_t t, const Vec& sample_center);

double downstream_risk(const TaskFamily& family, const SimplexPoint& lambda,
                       const Vec& theta);
Vec downstream_gradient(const TaskFamily& family, const SimplexPoint& lambda,
                        const Vec& theta);

WorstCase worst_case_risk(const TaskFamily& family, const Vec& theta);

/// One draw of the shared data distribution: one point per task, streams
/// derived from (seed, task index).
std::vector<Vec> draw_family_sample(const TaskFamily& family, std::uint64_t seed);

}  // namespace minimax_lab
