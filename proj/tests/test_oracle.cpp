#include <doctest.h>

#include <cmath>
#include <random>

#include "minimax_lab/oracle.hpp"
#include "minimax_lab/rng.hpp"

using namespace minimax_lab;

namespace {

TaskFamily random_quadratic_family(std::mt19937_64& eng, std::size_t dim,
                                   std::size_t num_tasks) {
  std::uniform_real_distribution<double> center(-0.5, 0.5);
  std::uniform_real_distribution<double> curv(0.5, 2.0);
  std::vector<Vec> centers;
  std::vector<double> curvatures;
  for (std::size_t t = 0; t < num_tasks; ++t) {
    Vec m(dim);
    for (double& x : m) x = center(eng);
    centers.push_back(m);
    curvatures.push_back(curv(eng));
  }
  return quadratic_family(centers, curvatures, 0.0);
}

}  // namespace

TEST_CASE("grid minimax on 1-D pairs") {
  const TaskFamily sym = quadratic_family({{0.0}, {1.0}}, {1.0, 1.0}, 0.0);
  const GridMinimaxResult a = grid_minimax(sym, {{-1.0}, {2.0}}, 3001);
  CHECK(std::abs(a.theta[0] - 0.5) <= 1e-3);
  CHECK(std::abs(a.value - 0.25) <= 1e-3);
  CHECK(a.value >= 0.25 - 1e-12);  // never below the true optimum

  const TaskFamily skew = quadratic_family({{0.0}, {1.0}}, {1.0, 4.0}, 0.0);
  const GridMinimaxResult b = grid_minimax(skew, {{-1.0}, {2.0}}, 3001);
  CHECK(std::abs(b.theta[0] - 2.0 / 3.0) <= 1e-3);
  CHECK(std::abs(b.value - 4.0 / 9.0) <= 1e-3);

  const TaskFamily single = quadratic_family({{0.0}}, {1.0}, 0.0);
  const GridMinimaxResult c = grid_minimax(single, {{-1.0}, {1.0}}, 1001);
  CHECK(std::abs(c.theta[0]) <= 1e-3);
  CHECK(c.value <= 1e-6);
}

TEST_CASE("grid minimax input validation") {
  const TaskFamily family = quadratic_family({{0.0}}, {1.0}, 0.0);
  CHECK_THROWS_AS(grid_minimax(family, {{-1.0}, {1.0}}, 51), std::invalid_argument);
  CHECK_THROWS_AS(grid_minimax(family, {{1.0}, {-1.0}}, 1001), std::invalid_argument);
  const TaskFamily big = quadratic_family({{0.0, 0.0, 0.0, 0.0}}, {1.0}, 0.0);
  CHECK_THROWS_AS(grid_minimax(big, {{0, 0, 0, 0}, {1, 1, 1, 1}}, 101),
                  std::invalid_argument);
}

TEST_CASE("grid minimax is deterministic across worker counts") {
  std::mt19937_64 eng = make_engine(99);
  const TaskFamily family = random_quadratic_family(eng, 2, 5);
  const GridBox box = default_grid_box(family);
  const GridMinimaxResult one = grid_minimax(family, box, 201, {}, 1);
  const GridMinimaxResult four = grid_minimax(family, box, 201, {}, 4);
  CHECK(one.value == four.value);
  CHECK(one.theta[0] == four.theta[0]);
  CHECK(one.theta[1] == four.theta[1]);
}

TEST_CASE("grid value stays within the stated error bound of the truth") {
  // symmetric pair has known optimum 0.25
  const TaskFamily sym = quadratic_family({{0.0}, {1.0}}, {1.0, 1.0}, 0.0);
  const GridMinimaxResult r = grid_minimax(sym, {{-1.0}, {2.0}}, 101);
  CHECK(r.value - 0.25 <= r.error_bound);
  CHECK(r.value >= 0.25 - 1e-12);
}

TEST_CASE("analytic average minimizer") {
  const TaskFamily equal = quadratic_family({{0.0}, {1.0}}, {1.0, 1.0}, 0.0);
  CHECK(analytic_average_minimizer(equal)[0] == doctest::Approx(0.5).epsilon(1e-15));

  const TaskFamily skew = quadratic_family({{0.0}, {1.0}}, {1.0, 4.0}, 0.0);
  CHECK(analytic_average_minimizer(skew)[0] == doctest::Approx(0.8).epsilon(1e-15));

  for (std::size_t T : {std::size_t(2), std::size_t(5), std::size_t(64)}) {
    CHECK(analytic_average_minimizer(gap_family(T))[0] ==
          doctest::Approx(0.5).epsilon(1e-12));
  }

  TaskFamily broken = quadratic_family({{0.0}}, {1.0}, 0.0);
  broken.tasks[0].quadratic.reset();
  CHECK_THROWS_AS(analytic_average_minimizer(broken), std::invalid_argument);
}

TEST_CASE("minimax init never has worse worst-case risk than average init") {
  std::mt19937_64 eng = make_engine(31);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t dim = 1 + (eng() % 2);
    const std::size_t num_tasks = 2 + (eng() % 7);
    const TaskFamily family = random_quadratic_family(eng, dim, num_tasks);
    const Vec theta_avg = analytic_average_minimizer(family);
    const double worst_avg = worst_case_risk(family, theta_avg).value;
    const GridMinimaxResult oracle =
        grid_minimax(family, default_grid_box(family), 201, {theta_avg});
    CHECK(oracle.value <= worst_avg + 1e-9);
  }
}

TEST_CASE("gap ratio matches the closed form within 1 percent") {
  for (std::size_t T : {std::size_t(4), std::size_t(16), std::size_t(64)}) {
    const TaskFamily family = gap_family(T);
    const double worst_avg =
        worst_case_risk(family, analytic_average_minimizer(family)).value;
    const GridMinimaxResult oracle =
        grid_minimax(family, default_grid_box(family), 4001);
    const double ratio = worst_avg / oracle.value;
    const double expected =
        std::pow(1.0 + std::sqrt(static_cast<double>(T - 1)), 2.0) / 4.0;
    CHECK(std::abs(ratio - expected) <= 0.01 * expected);
    CHECK(ratio >= static_cast<double>(T) / 8.0);
  }
}

TEST_CASE("basin check: one-step convergence and equality at k=0") {
  // f = theta^2 (mu = L = 2), eta = 0.5 = 1/L, theta0 = 1: iterates 1, 0, 0, ...
  const auto objective = [](const Vec& x) { return x[0] * x[0]; };
  const auto gradient = [](const Vec& x) { return Vec{2.0 * x[0]}; };
  const Ball wide{{0.0}, 100.0};
  const RunTrace trace =
      projected_gd_run(objective, gradient, wide, ParamVector({1.0}), 0.5, 10);
  CHECK(trace.rows[1].theta[0] == doctest::Approx(0.0));

  const BasinSpec basin{{0.0}, 1.0};  // (2/mu)(f(1) - 0) = 1
  const BasinCheckReport report = basin_check(trace, basin, 0.5, 2.0);
  CHECK(report.precondition_met);
  CHECK(report.passed);
  CHECK(!report.first_violation.has_value());

  // eta above 1/L reports an unmet precondition, not a basin failure
  const BasinCheckReport unmet = basin_check(trace, basin, 0.6, 2.0);
  CHECK(!unmet.precondition_met);
  CHECK(!unmet.passed);
}

TEST_CASE("basin check: zero radius path passes trivially") {
  const auto objective = [](const Vec& x) { return x[0] * x[0]; };
  const auto gradient = [](const Vec& x) { return Vec{2.0 * x[0]}; };
  const Ball wide{{0.0}, 100.0};
  const RunTrace trace =
      projected_gd_run(objective, gradient, wide, ParamVector({0.0}), 0.5, 5);
  const BasinSpec basin{{0.0}, 0.0};
  CHECK(basin_check(trace, basin, 0.5, 2.0).passed);
}

TEST_CASE("basin check flags a genuine violation") {
  const auto objective = [](const Vec& x) { return x[0] * x[0]; };
  const auto gradient = [](const Vec& x) { return Vec{2.0 * x[0]}; };
  const Ball wide{{0.0}, 100.0};
  const RunTrace trace =
      projected_gd_run(objective, gradient, wide, ParamVector({1.0}), 0.4, 5);
  const BasinSpec too_small{{0.0}, 0.25};
  const BasinCheckReport report = basin_check(trace, too_small, 0.4, 2.0);
  CHECK(!report.passed);
  REQUIRE(report.first_violation.has_value());
  CHECK(*report.first_violation == 0);
}

TEST_CASE("downstream basin from initial risk contains projected-gd iterates") {
  const TaskFamily family = gap_family(4);
  const SimplexPoint lambda = SimplexPoint::vertex(4, 2);
  const Vec theta0{1.0 / (1.0 + std::sqrt(3.0))};  // minimax point
  const BasinSpec basin = basin_from_initial_risk(family, lambda, theta0);
  CHECK(basin.center[0] == doctest::Approx(1.0));

  const double mu = downstream_mu(family, lambda);
  const double smooth = downstream_smoothness(family, lambda);
  const double eta = 1.0 / smooth;
  const auto objective = [&](const Vec& x) { return downstream_risk(family, lambda, x); };
  const auto gradient = [&](const Vec& x) {
    return downstream_gradient(family, lambda, x);
  };
  const Ball ball{basin.center, std::sqrt(basin.radius_sq)};
  const RunTrace trace =
      projected_gd_run(objective, gradient, ball, ParamVector(theta0), eta, 100);
  const BasinCheckReport report = basin_check(trace, basin, eta, smooth);
  CHECK(report.precondition_met);
  CHECK(report.passed);
  CHECK(mu == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("sample complexity bound: frozen value and edge cases") {
  // d=1, B=1, L'=1, mu=1, eps=0.5, delta=0.1, init risk 0.5:
  // 32 ln 33 + 32 ln 20
  CHECK(sample_complexity_bound(0.5, 0.1, 1, 1.0, 1.0, 1.0, 0.5) ==
        doctest::Approx(207.75167472065507).epsilon(1e-9));

  // zero initial risk leaves only the Hoeffding term
  CHECK(sample_complexity_bound(0.5, 0.1, 1, 1.0, 1.0, 1.0, 0.0) ==
        doctest::Approx(32.0 * std::log(20.0)).epsilon(1e-12));

  CHECK(sample_complexity_bound(0.5, 0.1, 1, 1.0, 1.0, 1.0, 1.0) >
        sample_complexity_bound(0.5, 0.1, 1, 1.0, 1.0, 1.0, 0.5));

  CHECK_THROWS_AS(sample_complexity_bound(0.0, 0.1, 1, 1, 1, 1, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_complexity_bound(0.5, 1.0, 1, 1, 1, 1, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_complexity_bound(0.5, 0.1, 0, 1, 1, 1, 0.5),
                  std::invalid_argument);
}

TEST_CASE("sample complexity bound is monotone in its partial order") {
  std::mt19937_64 eng = make_engine(41);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_real_distribution<double> pos(0.5, 4.0);
  for (int i = 0; i < 200; ++i) {
    const double eps = u(eng);
    const double delta = u(eng);
    const std::size_t d = 1 + (eng() % 3);
    const double bound = pos(eng);
    const double lp = pos(eng);
    const double mu = pos(eng);
    const double risk = pos(eng);
    const double base = sample_complexity_bound(eps, delta, d, bound, lp, mu, risk);
    CHECK(sample_complexity_bound(eps, delta, d, bound, lp, mu, 2.0 * risk) >= base);
    CHECK(sample_complexity_bound(eps, delta, d + 1, bound, lp, mu, risk) >= base);
    CHECK(sample_complexity_bound(eps, delta, d, 1.5 * bound, lp, mu, risk) >= base);
    CHECK(sample_complexity_bound(std::min(0.95, 1.2 * eps), delta, d, bound, lp, mu,
                                  risk) <= base + 1e-12);
    CHECK(sample_complexity_bound(eps, std::min(0.95, 1.2 * delta), d, bound, lp, mu,
                                  risk) <= base + 1e-12);
  }
}

TEST_CASE("covering number bound") {
  CHECK(covering_number_bound(1.0, 2.0, 1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(covering_number_bound(1.0, 2e6, 1) == doctest::Approx(1.0).epsilon(1e-5));
  const double one_d = covering_number_bound(3.0, 0.5, 1);
  CHECK(covering_number_bound(3.0, 0.5, 2) == doctest::Approx(one_d * one_d));
  CHECK_THROWS_AS(covering_number_bound(-1.0, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(covering_number_bound(1.0, 0.0, 1), std::invalid_argument);
}
