#include <doctest.h>

#include <cmath>

#include "nmembrane/error.hpp"
#include "nmembrane/solver.hpp"

using namespace nmembrane;

TEST_CASE("grid factories") {
  const Grid g = Grid::interval(-1.0, 1.0, 8);
  CHECK(g.nx == 9);
  CHECK(g.count(NodeKind::Boundary) == 2);
  CHECK(g.count(NodeKind::Interior) == 7);
  const Grid r = Grid::rectangle(-1.0, 1.0, -1.0, 1.0, 1.0 / 16);
  CHECK(r.nx == 33);
  CHECK(r.ny == 33);
  CHECK(r.count(NodeKind::Interior) == 31 * 31);
  const Grid d = Grid::disk(0.0, 0.0, 1.0, 0.25);
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d.interior(n)) {
      std::size_t nb[4];
      CHECK(d.neighbours(n, nb) == 4);
      for (std::size_t k = 0; k < 4; ++k) CHECK(d.active(nb[k]));
    }
}

TEST_CASE("single membrane reproduces a quadratic exactly") {
  // The five-point Laplacian is exact on quadratics: u = (x^2 + y^2) has
  // Laplacian 4.
  const ProblemSpec s{{1.0}, {4.0}};
  SolverOptions o;
  o.tol = 1e-14;
  const auto sol = solve(s, Grid::rectangle(-1.0, 1.0, -1.0, 1.0, 0.125),
                         [](double x, double y, std::span<double> out) { out[0] = x * x + y * y; }, o);
  double err = 0.0;
  for (std::size_t j = 0; j < sol.grid.ny; ++j)
    for (std::size_t i = 0; i < sol.grid.nx; ++i) {
      const double x = sol.grid.x(i), y = sol.grid.y(j);
      err = std::max(err, std::abs(sol.at(sol.grid.index(i, j), 0) - (x * x + y * y)));
    }
  CHECK(err < 1e-11);
}

TEST_CASE("two membranes without contact solve independently") {
  const ProblemSpec s{{1.0, 2.0}, {2.0, -1.0}};
  SolverOptions o;
  o.tol = 1e-14;
  const auto sol = solve(s, Grid::interval(-1.0, 1.0, 16),
                         [](double x, double, std::span<double> out) {
                           out[0] = x * x + 5.0;
                           out[1] = -0.5 * x * x - 5.0;
                         },
                         o);
  for (std::size_t i = 0; i < sol.grid.nx; ++i) {
    const double x = sol.grid.x(i);
    CHECK(sol.at(i, 0) == doctest::Approx(x * x + 5.0).epsilon(1e-11));
    CHECK(sol.at(i, 1) == doctest::Approx(-0.5 * x * x - 5.0).epsilon(1e-11));
  }
}

TEST_CASE("energy never increases and the solution satisfies the discrete system") {
  const ProblemSpec s = normalize(ProblemSpec{{1.0, 2.0, 1.5}, {1.2, 0.1, -0.9}});
  SolverOptions o;
  o.track_energy = true;
  o.tol = 1e-12;
  const auto data = [](double x, double y, std::span<double> out) {
    out[0] = 0.3 * x + 0.6;
    out[1] = 0.2 * y;
    out[2] = -0.5 - 0.1 * x * y;
  };
  const auto sol = solve(s, Grid::disk(0.0, 0.0, 1.0, 1.0 / 16), data, o);
  REQUIRE(sol.stats.energy.size() > 2);
  for (std::size_t i = 1; i < sol.stats.energy.size(); ++i)
    CHECK(sol.stats.energy[i] <= sol.stats.energy[i - 1] + 1e-12 * std::abs(sol.stats.energy[i - 1]));
  const auto rep = residual(sol, default_coincidence_tol(sol));
  CHECK(rep.ordering_ok);
  CHECK(rep.kkt_residual < 1e-9);
  CHECK(rep.weighted_laplacian_sum < 1e-7);
  CHECK(rep.laplacian_bound_ratio <= 1.0 + 1e-6);
}

TEST_CASE("unordered boundary data is rejected") {
  const ProblemSpec s{{1.0, 1.0}, {1.0, -1.0}};
  try {
    make_problem(s, Grid::interval(0.0, 1.0, 4), [](double, double, std::span<double> out) {
      out[0] = 0.0;
      out[1] = 1.0;
    });
    FAIL("accepted unordered data");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnorderedBoundary);
  }
}

TEST_CASE("not converged is reported") {
  const ProblemSpec s{{1.0, 1.0}, {1.0, -1.0}};
  SolverOptions o;
  o.max_sweeps = 2;
  o.tol = 1e-15;
  const auto data = [](double x, double, std::span<double> out) {
    out[0] = x;
    out[1] = x - 1.0;
  };
  try {
    solve(s, Grid::disk(0.0, 0.0, 1.0, 1.0 / 16), data, o);
    FAIL("no NotConverged");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotConverged);
  }
  const auto best = solve_nothrow(s, Grid::disk(0.0, 0.0, 1.0, 1.0 / 16), data, o);
  CHECK_FALSE(best.stats.converged);
  CHECK(best.stats.sweeps == 2);
}

TEST_CASE("threads do not change the result") {
  const ProblemSpec s{{1.0, 1.0}, {1.0, -1.0}};
  const auto data = [](double x, double y, std::span<double> out) {
    out[0] = 0.5 * x * x;
    out[1] = -0.5 * y * y;
  };
  SolverOptions a, b;
  b.threads = 3;
  const auto u1 = solve(s, Grid::disk(0.0, 0.0, 1.0, 1.0 / 48), data, a);
  const auto u2 = solve(s, Grid::disk(0.0, 0.0, 1.0, 1.0 / 48), data, b);
  CHECK(u1.u == u2.u);
}

TEST_CASE("maximum principle verdict") {
  const ProblemSpec s{{1.0, 1.0}, {1.0, -1.0}};
  SolverOptions o;
  o.tol = 1e-13;
  const Grid g = Grid::disk(0.0, 0.0, 1.0, 1.0 / 16);
  const auto lo = solve(s, g, [](double x, double, std::span<double> out) { out[0] = 1.0 + x, out[1] = -x * x; }, o);
  const auto hi = solve(s, g, [](double x, double, std::span<double> out) { out[0] = 1.5 + x, out[1] = 0.1 - x * x; }, o);
  CHECK(check_max_principle(hi, lo, 1e-10).holds);
  CHECK_FALSE(check_max_principle(lo, hi, 1e-10).holds);
  CHECK_THROWS_AS(check_max_principle(lo, solve(s, Grid::disk(0.0, 0.0, 1.0, 1.0 / 8),
                                                [](double, double, std::span<double> out) { out[0] = 0, out[1] = 0; }),
                                      1e-10),
                  Error);
}

TEST_CASE("sampling") {
  const ProblemSpec s{{1.0}, {0.0}};
  const auto sol = make_problem(s, Grid::rectangle(0.0, 1.0, 0.0, 1.0, 0.25),
                                [](double x, double y, std::span<double> out) { out[0] = 2.0 * x + y; });
  CHECK(sol.sample(0, 0.3, 0.6) == doctest::Approx(1.2));
  CHECK_THROWS_AS(sol.sample(0, 1.5, 0.5), Error);
}
