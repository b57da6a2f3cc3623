#include "minimax_lab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace minimax_lab {

double downstream_mu(const TaskFamily& family, const SimplexPoint& lambda) {
  check_dim(lambda.size(), family.size(), "downstream_mu");
  double mu = 0.0;
  for (std::size_t t = 0; t < family.size(); ++t) {
    mu += lambda.weights()[t] * family.tasks[t].mu;
  }
  return mu;
}

double downstream_smoothness(const TaskFamily& family, const SimplexPoint& lambda) {
  check_dim(lambda.size(), family.size(), "downstream_smoothness");
  double l = 0.0;
  for (std::size_t t = 0; t < family.size(); ++t) {
    l += lambda.weights()[t] * family.tasks[t].smoothness;
  }
  return l;
}

Vec analytic_downstream_minimizer(const TaskFamily& family, const SimplexPoint& lambda) {
  check_dim(lambda.size(), family.size(), "analytic_downstream_minimizer");
  Vec num(family.dim, 0.0);
  double den = 0.0;
  for (std::size_t t = 0; t < family.size(); ++t) {
    const double w = lambda.weights()[t];
    if (w == 0.0) continue;
    const Task& task = family.tasks[t];
    if (!task.quadratic) {
      throw std::invalid_argument("analytic_downstream_minimizer: non-quadratic task");
    }
    axpy(num, w * task.quadratic->curvature, task.quadratic->center);
    den += w * task.quadratic->curvature;
  }
  for (double& x : num) x /= den;
  return num;
}

Vec analytic_average_minimizer(const TaskFamily& family) {
  return analytic_downstream_minimizer(family, SimplexPoint::uniform(family.size()));
}

BasinSpec basin_from_initial_risk(const TaskFamily& family, const SimplexPoint& lambda,
                                  const Vec& theta0) {
  BasinSpec basin;
  basin.center = analytic_downstream_minimizer(family, lambda);
  basin.radius_sq = (2.0 / downstream_mu(family, lambda)) *
                    downstream_risk(family, lambda, theta0);
  return basin;
}

GridBox default_grid_box(const TaskFamily& family, double pad) {
  GridBox box;
  box.lo.assign(family.dim, 0.0);
  box.hi.assign(family.dim, 0.0);
  bool first = true;
  for (const Task& task : family.tasks) {
    if (!task.quadratic) {
      // fall back to the domain ball
      box.lo.assign(family.dim, -family.domain_radius);
      box.hi.assign(family.dim, family.domain_radius);
      return box;
    }
    const Vec& m = task.quadratic->center;
    for (std::size_t i = 0; i < family.dim; ++i) {
      if (first) {
        box.lo[i] = box.hi[i] = m[i];
      } else {
        box.lo[i] = std::min(box.lo[i], m[i]);
        box.hi[i] = std::max(box.hi[i], m[i]);
      }
    }
    first = false;
  }
  // the minimax point of quadratics lies in the convex hull of the centers;
  // pad to keep it strictly interior to the grid
  for (std::size_t i = 0; i < family.dim; ++i) {
    box.lo[i] -= pad;
    box.hi[i] += pad;
  }
  return box;
}

namespace {

double max_risk_at(const TaskFamily& family, const Vec& theta) {
  double m = family.tasks.front().expected_risk(theta);
  for (std::size_t t = 1; t < family.size(); ++t) {
    m = std::max(m, family.tasks[t].expected_risk(theta));
  }
  return m;
}

// golden-section minimization of f over [a, b]
template <typename F>
double golden_section(F&& f, double a, double b, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

GridMinimaxResult grid_minimax(const TaskFamily& family, const GridBox& box,
                               std::size_t resolution, const std::vector<Vec>& seeds,
                               std::size_t jobs) {
  const std::size_t d = family.dim;
  if (d > 3) throw std::invalid_argument("grid_minimax: d > 3");
  if (resolution < 101) throw std::invalid_argument("grid_minimax: resolution < 101");
  check_dim(box.lo.size(), d, "grid_minimax box");
  check_dim(box.hi.size(), d, "grid_minimax box");

  Vec step(d);
  double max_spacing = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!(box.hi[i] > box.lo[i])) throw std::invalid_argument("grid_minimax: empty box");
    step[i] = (box.hi[i] - box.lo[i]) / static_cast<double>(resolution - 1);
    max_spacing = std::max(max_spacing, step[i]);
  }

  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= resolution;

  auto point_at = [&](std::size_t flat) {
    Vec theta(d);
    for (std::size_t i = 0; i < d; ++i) {
      theta[i] = box.lo[i] + step[i] * static_cast<double>(flat % resolution);
      flat /= resolution;
    }
    return theta;
  };

  // partitioned scan with index-ordered argmin reduction (lowest index wins)
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, total));
  std::vector<double> best_value(workers, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_index(workers, 0);
  auto scan = [&](std::size_t w) {
    const std::size_t chunk = (total + workers - 1) / workers;
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(total, begin + chunk);
    for (std::size_t flat = begin; flat < end; ++flat) {
      const double v = max_risk_at(family, point_at(flat));
      if (v < best_value[w]) {
        best_value[w] = v;
        best_index[w] = flat;
      }
    }
  };
  if (workers == 1) {
    scan(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(scan, w);
    for (std::thread& th : pool) th.join();
  }
  std::size_t best = 0;
  for (std::size_t w = 1; w < workers; ++w) {
    if (best_value[w] < best_value[best] ||
        (best_value[w] == best_value[best] && best_index[w] < best_index[best])) {
      best = w;
    }
  }

  Vec theta = point_at(best_index[best]);
  double value = best_value[best];

  // one golden-section sweep along the axes, each within +/- one grid spacing
  for (std::size_t i = 0; i < d; ++i) {
    const double lo = std::max(box.lo[i], theta[i] - step[i]);
    const double hi = std::min(box.hi[i], theta[i] + step[i]);
    Vec probe = theta;
    auto line = [&](double x) {
      probe[i] = x;
      return max_risk_at(family, probe);
    };
    const double x = golden_section(line, lo, hi, 1e-12 + 1e-10 * step[i]);
    probe[i] = x;
    const double v = max_risk_at(family, probe);
    if (v < value) {
      value = v;
      theta = probe;
    }
  }

  for (const Vec& seed : seeds) {
    check_dim(seed.size(), d, "grid_minimax seed");
    const double v = max_risk_at(family, seed);
    if (v < value) {
      value = v;
      theta = seed;
    }
  }

  GridMinimaxResult out;
  out.theta = theta;
  out.value = value;
  out.spacing = max_spacing;
  out.error_bound = family.lipschitz() * max_spacing * std::sqrt(static_cast<double>(d));
  return out;
}

BasinCheckReport basin_check(const RunTrace& trace, const BasinSpec& basin, double eta,
                             double smoothness) {
  BasinCheckReport report;
  if (!(smoothness > 0.0) || eta > 1.0 / smoothness) {
    report.precondition_met = false;
    report.passed = false;
    return report;
  }
  // exact equality holds at k = 0, so allow rounding slack
  const double limit = basin.radius_sq * (1.0 + 1e-9) + 1e-15;
  for (const TraceRow& row : trace.rows) {
    const double d2 = dist_sq(row.theta, basin.center);
    if (basin.radius_sq > 0.0) {
      report.worst_ratio = std::max(report.worst_ratio, d2 / basin.radius_sq);
    }
    if (d2 > limit && !report.first_violation) {
      report.first_violation = row.k;
      report.passed = false;
    }
  }
  return report;
}

double sample_complexity_bound(double eps, double delta, std::size_t d, double bound,
                               double lipschitz, double mu, double init_risk) {
  if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("sample_complexity_bound: eps/delta out of (0,1)");
  }
  if (d == 0 || !(bound > 0.0) || !(lipschitz > 0.0) || !(mu > 0.0) || init_risk < 0.0) {
    throw std::invalid_argument("sample_complexity_bound: nonpositive parameter");
  }
  const double b2e2 = 8.0 * bound * bound / (eps * eps);
  const double inner = 1.0 + (16.0 * lipschitz / eps) * std::sqrt(2.0 / mu * init_risk);
  return static_cast<double>(d) * b2e2 * std::log(inner) + b2e2 * std::log(2.0 / delta);
}

double covering_number_bound(double radius, double eps, std::size_t d) {
  if (!(radius > 0.0) || !(eps > 0.0) || d == 0) {
    throw std::invalid_argument("covering_number_bound: nonpositive input");
  }
  return std::pow(2.0 * radius / eps + 1.0, static_cast<double>(d));
}

}  // namespace minimax_lab
