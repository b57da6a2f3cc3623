#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "minimax_lab/optimizer.hpp"
#include "minimax_lab/tasks.hpp"

namespace minimax_lab {

/// Ball that gradient descent on a mu-strongly-convex objective never leaves:
/// center theta*_lambda, squared radius (2/mu) * f_lambda(theta_0).
struct BasinSpec {
  Vec center;
  double radius_sq = 0.0;
};

/// Strong-convexity constant of the downstream task sum_t lambda_t * l_t
/// (exact for quadratic families, a valid lower bound in general).
double downstream_mu(const TaskFamily& family, const SimplexPoint& lambda);

/// Smoothness constant of the downstream task.
double downstream_smoothness(const TaskFamily& family, const SimplexPoint& lambda);

/// Closed-form minimizer of sum_t lambda_t c_t ||theta - m_t||^2.
/// Throws if any task with positive weight is not quadratic.
Vec analytic_downstream_minimizer(const TaskFamily& family, const SimplexPoint& lambda);

/// Closed-form minimizer of the average risk: (sum_t c_t m_t) / (sum_t c_t).
Vec analytic_average_minimizer(const TaskFamily& family);

BasinSpec basin_from_initial_risk(const TaskFamily& family, const SimplexPoint& lambda,
                                  const Vec& theta0);

struct GridBox {
  Vec lo;
  Vec hi;
};

GridBox default_grid_box(const TaskFamily& family, double pad = 0.1);

struct GridMinimaxResult {
  Vec theta;
  double value = 0.0;
  double spacing = 0.0;      // largest per-axis grid spacing
  double error_bound = 0.0;  // L' * spacing * sqrt(d)
};

/// Brute-force minimax oracle for d <= 3: exhaustive max-risk evaluation over
/// the grid (lowest grid index wins ties), one golden-section refinement sweep
/// along the coordinate axes, then the best of the refined point and any
/// caller-supplied seed candidates.
GridMinimaxResult grid_minimax(const TaskFamily& family, const GridBox& box,
                               std::size_t resolution,
                               const std::vector<Vec>& seeds = {},
                               std::size_t jobs = 1);

struct BasinCheckReport {
  bool precondition_met = true;  // eta <= 1/L
  bool passed = true;
  std::optional<std::size_t> first_violation;
  double worst_ratio = 0.0;  // max over iterates of dist^2 / radius^2
};

/// Verify every recorded iterate satisfies ||theta_k - theta*||^2 <= radius^2.
/// Reports "precondition unmet" instead of a basin failure when eta > 1/L.
BasinCheckReport basin_check(const RunTrace& trace, const BasinSpec& basin, double eta,
                             double smoothness);

/// (8 d B^2 / eps^2) * log(1 + (16 L'/eps) * sqrt((2/mu) * init_risk))
///   + (8 B^2 / eps^2) * log(2/delta), natural logarithm.
double sample_complexity_bound(double eps, double delta, std::size_t d, double bound,
                               double lipschitz, double mu, double init_risk);

/// (2 * radius / eps + 1)^d
double covering_number_bound(double radius, double eps, std::size_t d);

}  // namespace minimax_lab
