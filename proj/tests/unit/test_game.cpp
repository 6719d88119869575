#include <doctest.h>

#include <cmath>

#include "nmembrane/error.hpp"
#include "nmembrane/game.hpp"
#include "oracles.hpp"

using namespace nmembrane;

TEST_CASE("Philox known answers") {
  for (const auto& kat : oracles::kPhilox) CHECK(Philox4x32::generate(kat.ctr, kat.key) == kat.out);
}

TEST_CASE("one-ticket game on an interval is the discrete Poisson problem") {
  // v(x) = mean v(x +- h) - f h^2 / 2 is solved exactly by x^2 when f = 2.
  const GameSpec g = make_game({2.0}, Grid::interval(-1.0, 1.0, 8), [](double x, double, std::span<double> out) {
    out[0] = x * x;
  });
  CHECK(g.round_cost(0) == doctest::Approx(2.0 * 0.25 * 0.25 / 2.0));
  const ValueTable t = bellman_solve(g);
  for (std::size_t i = 0; i < 9; ++i) {
    const double x = g.lattice.x(i);
    CHECK(t.at(i, 0) == doctest::Approx(x * x).epsilon(1e-11));
  }
}

TEST_CASE("values are ordered and Monte Carlo matches them") {
  const GameSpec g = make_game({1.0, 0.0, -1.0}, Grid::rectangle(-1.0, 1.0, -1.0, 1.0, 0.25),
                               [](double x, double y, std::span<double> out) {
                                 out[0] = 0.5 + 0.2 * x;
                                 out[1] = 0.1 * y;
                                 out[2] = -0.5 + 0.1 * x * y;
                               });
  const ValueTable t = bellman_solve(g);
  for (std::size_t n = 0; n < g.lattice.size(); ++n)
    for (std::size_t k = 0; k + 1 < 3; ++k) CHECK(t.at(n, k) >= t.at(n, k + 1) - 1e-12);
  const std::size_t node = g.lattice.index(4, 4);
  const auto order = exchange_order(g, t, node);
  CHECK(order.size() == 3);
  const auto mc = monte_carlo_eval(g, t, node, 2, 20000, 99);
  CHECK(std::abs(mc.mean - t.at(node, 1)) < 4.0 * mc.se);
  const auto again = monte_carlo_eval(g, t, node, 2, 20000, 99, 4);
  CHECK(again.mean == mc.mean);
  CHECK(again.se == mc.se);
  CHECK(monte_carlo_eval(g, t, node, 2, 20000, 100).mean != mc.mean);
}

TEST_CASE("raising an exit payoff never lowers a value") {
  const Grid lattice = Grid::rectangle(0.0, 1.0, 0.0, 1.0, 0.125);
  const auto phi = [](double x, double y, std::span<double> out) {
    out[0] = x + y;
    out[1] = x - y;
    std::sort(out.begin(), out.end(), std::greater<double>());
  };
  const auto raised = [&](double x, double y, std::span<double> out) {
    phi(x, y, out);
    out[0] += 0.3 * x;
  };
  const auto a = bellman_solve(make_game({0.5, -0.5}, lattice, phi));
  const auto b = bellman_solve(make_game({0.5, -0.5}, lattice, raised));
  for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(b.v[i] >= a.v[i] - 1e-12);
}

TEST_CASE("argument checks") {
  const Grid lattice = Grid::interval(0.0, 1.0, 4);
  CHECK_THROWS_AS(make_game({}, lattice, [](double, double, std::span<double>) {}), Error);
  const auto g = make_game({1.0}, lattice, [](double, double, std::span<double> out) { out[0] = 0.0; });
  const auto t = bellman_solve(g);
  CHECK_THROWS_AS(monte_carlo_eval(g, t, 2, 2, 100, 1), Error);
  CHECK_THROWS_AS(monte_carlo_eval(g, t, 99, 1, 100, 1), Error);
}
