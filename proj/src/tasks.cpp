#include "minimax_lab/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "minimax_lab/rng.hpp"

namespace minimax_lab {

ParamVector::ParamVector(Vec coords) : coords_(std::move(coords)) {
  if (!all_finite(coords_)) {
    throw std::invalid_argument("ParamVector: non-finite entry");
  }
}

TaskSample Task::sample(std::uint64_t seed, const Vec& theta) const {
  if (!has_sampler()) {
    throw std::logic_error("Task::sample: task has no sampler");
  }
  TaskSample s;
  s.z = draw(seed);
  s.loss = point_loss(theta, s.z);
  s.grad = point_grad(theta, s.z);
  return s;
}

double TaskFamily::mu() const {
  double m = tasks.front().mu;
  for (const Task& t : tasks) m = std::min(m, t.mu);
  return m;
}

double TaskFamily::smoothness() const {
  double m = 0.0;
  for (const Task& t : tasks) m = std::max(m, t.smoothness);
  return m;
}

double TaskFamily::lipschitz() const {
  double m = 0.0;
  for (const Task& t : tasks) m = std::max(m, t.lipschitz);
  return m;
}

double TaskFamily::bound() const {
  double m = 0.0;
  for (const Task& t : tasks) m = std::max(m, t.bound);
  return m;
}

bool TaskFamily::has_samplers() const {
  for (const Task& t : tasks) {
    if (!t.has_sampler()) return false;
  }
  return !tasks.empty();
}

void TaskFamily::check_theta(const Vec& theta) const {
  check_dim(theta.size(), dim, "TaskFamily");
  if (!all_finite(theta)) {
    throw std::invalid_argument("TaskFamily: non-finite theta");
  }
}

double TaskFamily::risk(std::size_t t, const Vec& theta) const {
  check_theta(theta);
  return tasks.at(t).expected_risk(theta);
}

Vec TaskFamily::risks(const Vec& theta) const {
  check_theta(theta);
  Vec out(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) out[t] = tasks[t].expected_risk(theta);
  return out;
}

Vec TaskFamily::task_gradient(std::size_t t, const Vec& theta) const {
  check_theta(theta);
  return tasks.at(t).gradient(theta);
}

SimplexPoint::SimplexPoint(Vec weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("SimplexPoint: empty");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("SimplexPoint: negative entry");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("SimplexPoint: entries sum to " + std::to_string(sum));
  }
}

SimplexPoint SimplexPoint::vertex(std::size_t num_tasks, std::size_t t) {
  if (t >= num_tasks) throw std::invalid_argument("SimplexPoint::vertex: index out of range");
  Vec w(num_tasks, 0.0);
  w[t] = 1.0;
  return SimplexPoint(std::move(w));
}

SimplexPoint SimplexPoint::uniform(std::size_t num_tasks) {
  if (num_tasks == 0) throw std::invalid_argument("SimplexPoint::uniform: empty");
  Vec w(num_tasks, 1.0 / static_cast<double>(num_tasks));
  // repair rounding so the sum-to-one invariant holds exactly
  double sum = 0.0;
  for (double x : w) sum += x;
  w.back() += 1.0 - sum;
  return SimplexPoint(std::move(w));
}

namespace {

Vec gaussian_draw(const Vec& mean, double sigma, std::uint64_t seed) {
  Vec z(mean);
  if (sigma > 0.0) {
    SplitMix64Engine eng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (double& x : z) x += normal(eng);
  }
  return z;
}

Task make_quadratic_task(const Vec& center, double curvature, double noise_sigma,
                         double domain_radius, double max_center_norm) {
  const std::size_t d = center.size();
  Task task;
  task.quadratic = QuadraticSpec{center, curvature, noise_sigma};
  task.expected_risk = [center, curvature](const Vec& theta) {
    return curvature * dist_sq(theta, center);
  };
  task.gradient = [center, curvature](const Vec& theta) {
    Vec g = sub(theta, center);
    for (double& x : g) x *= 2.0 * curvature;
    return g;
  };
  // constants certified on the ball ||theta|| <= domain_radius
  task.mu = 2.0 * curvature;
  task.smoothness = 2.0 * curvature;
  task.lipschitz = 2.0 * curvature * (domain_radius + max_center_norm);
  const double reach = domain_radius + norm(center);
  task.bound = curvature * reach * reach;

  const double bias = curvature * noise_sigma * noise_sigma * static_cast<double>(d);
  task.draw = [center, noise_sigma](std::uint64_t seed) {
    return gaussian_draw(center, noise_sigma, seed);
  };
  task.point_loss = [curvature, bias](const Vec& theta, const Vec& z) {
    return curvature * dist_sq(theta, z) - bias;
  };
  task.point_grad = [curvature](const Vec& theta, const Vec& z) {
    Vec g = sub(theta, z);
    for (double& x : g) x *= 2.0 * curvature;
    return g;
  };
  return task;
}

}  // namespace

TaskFamily quadratic_family(const std::vector<Vec>& centers,
                            const std::vector<double>& curvatures,
                            double noise_sigma, double domain_radius) {
  if (centers.empty() || centers.size() != curvatures.size()) {
    throw std::invalid_argument("quadratic_family: centers/curvatures length mismatch");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("quadratic_family: negative noise_sigma");
  }
  const std::size_t d = centers.front().size();
  double max_center_norm = 0.0;
  for (const Vec& c : centers) {
    check_dim(c.size(), d, "quadratic_family centers");
    max_center_norm = std::max(max_center_norm, norm(c));
  }
  for (double c : curvatures) {
    if (!(c > 0.0)) throw std::invalid_argument("quadratic_family: nonpositive curvature");
  }
  if (domain_radius <= 0.0) domain_radius = 10.0 * max_center_norm + 1.0;

  TaskFamily family;
  family.name = "quadratic";
  family.dim = d;
  family.domain_radius = domain_radius;
  family.tasks.reserve(centers.size());
  for (std::size_t t = 0; t < centers.size(); ++t) {
    family.tasks.push_back(make_quadratic_task(centers[t], curvatures[t], noise_sigma,
                                               domain_radius, max_center_norm));
  }
  return family;
}

TaskFamily gap_family(std::size_t num_tasks, double noise_sigma, double domain_radius) {
  if (num_tasks < 2) throw std::invalid_argument("gap_family: T < 2");
  std::vector<Vec> centers;
  std::vector<double> curvatures;
  centers.push_back({0.0});
  curvatures.push_back(1.0);
  const double c = 1.0 / static_cast<double>(num_tasks - 1);
  for (std::size_t t = 1; t < num_tasks; ++t) {
    centers.push_back({1.0});
    curvatures.push_back(c);
  }
  TaskFamily family = quadratic_family(centers, curvatures, noise_sigma, domain_radius);
  family.name = "gap" + std::to_string(num_tasks);
  return family;
}

void set_importance_sampling(TaskFamily& family, std::size_t t, const Vec& sample_center) {
  Task& task = family.tasks.at(t);
  if (!task.quadratic) {
    throw std::invalid_argument("set_importance_sampling: task is not quadratic");
  }
  check_dim(sample_center.size(), family.dim, "set_importance_sampling");
  const Vec target_center = task.quadratic->center;
  const double curvature = task.quadratic->curvature;
  const double sigma = task.quadratic->noise_sigma;
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("set_importance_sampling: requires noise_sigma > 0");
  }
  const double bias =
      curvature * sigma * sigma * static_cast<double>(family.dim);

  // density ratio N(target, sigma^2 I) / N(sample_center, sigma^2 I)
  auto weight = [target_center, sample_center, sigma](const Vec& z) {
    const double a = dist_sq(z, target_center);
    const double b = dist_sq(z, sample_center);
    return std::exp(-(a - b) / (2.0 * sigma * sigma));
  };
  task.data_weight = weight;
  task.draw = [sample_center, sigma](std::uint64_t seed) {
    return gaussian_draw(sample_center, sigma, seed);
  };
  task.point_loss = [curvature, weight, bias](const Vec& theta, const Vec& z) {
    return weight(z) * curvature * dist_sq(theta, z) - bias;
  };
  task.point_grad = [curvature, weight](const Vec& theta, const Vec& z) {
    Vec g = sub(theta, z);
    const double w = weight(z);
    for (double& x : g) x *= 2.0 * curvature * w;
    return g;
  };
}

double downstream_risk(const TaskFamily& family, const SimplexPoint& lambda,
                       const Vec& theta) {
  check_dim(lambda.size(), family.size(), "downstream_risk lambda");
  family.check_theta(theta);
  double s = 0.0;
  for (std::size_t t = 0; t < family.size(); ++t) {
    if (lambda.weights()[t] != 0.0) s += lambda.weights()[t] * family.tasks[t].expected_risk(theta);
  }
  return s;
}

Vec downstream_gradient(const TaskFamily& family, const SimplexPoint& lambda,
                        const Vec& theta) {
  check_dim(lambda.size(), family.size(), "downstream_gradient lambda");
  family.check_theta(theta);
  Vec g(family.dim, 0.0);
  for (std::size_t t = 0; t < family.size(); ++t) {
    const double w = lambda.weights()[t];
    if (w != 0.0) axpy(g, w, family.tasks[t].gradient(theta));
  }
  return g;
}

WorstCase worst_case_risk(const TaskFamily& family, const Vec& theta) {
  const Vec r = family.risks(theta);
  WorstCase out;
  out.value = *std::max_element(r.begin(), r.end());
  constexpr double kTieTol = 1e-12;
  for (std::size_t t = 0; t < r.size(); ++t) {
    if (out.value - r[t] <= kTieTol) out.argmax.push_back(t);
  }
  return out;
}

std::vector<Vec> draw_family_sample(const TaskFamily& family, std::uint64_t seed) {
  if (!family.has_samplers()) {
    throw std::logic_error("draw_family_sample: family lacks samplers");
  }
  std::vector<Vec> zs(family.size());
  for (std::size_t t = 0; t < family.size(); ++t) {
    zs[t] = family.tasks[t].draw(mix_seed(seed, t));
  }
  return zs;
}

}  // namespace minimax_lab
