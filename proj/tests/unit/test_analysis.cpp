#include <doctest.h>

#include <cmath>

#include "nmembrane/analysis.hpp"
#include "nmembrane/error.hpp"
#include "oracles.hpp"

using namespace nmembrane;

namespace {
const ProblemSpec kUnit2{{1.0, 1.0}, {1.0, -1.0}};
const ProblemSpec kUnit3{{1.0, 1.0, 1.0}, {1.0, 0.0, -1.0}};

FieldFunction cone_data(const Cone1D& c, double angle) {
  auto ev = std::make_shared<ProfileEvaluator>(
      ApproximateProfile2D{c, BranchVector::zero(c.size()), BranchVector::zero(c.size()), angle});
  return [ev](double x, double y, std::span<double> out) { ev->eval(x, y, out); };
}
}  // namespace

TEST_CASE("analytic Weiss values") {
  CHECK(weiss_of_cone(least_energy_cone(kUnit2)) == doctest::Approx(oracles::kP0Weiss).epsilon(1e-15));
  CHECK(weiss_of_cone(make_cone(kUnit3, "R.L")) == doctest::Approx(oracles::kRLWeiss).epsilon(1e-15));
}

TEST_CASE("numerical Weiss value of a sampled cone") {
  const auto sol = make_problem(kUnit2, Grid::disk(0.0, 0.0, 1.0, 1.0 / 64), cone_data(least_energy_cone(kUnit2), 0.0));
  const std::vector<double> radii{0.3, 0.6, 0.9};
  const auto w = weiss(sol, {0.0, 0.0}, radii);
  for (double v : w.W) CHECK(std::abs(v - oracles::kP0Weiss) < 5e-3);
  CHECK_THROWS_AS(weiss(sol, {0.5, 0.0}, radii), Error);
}

TEST_CASE("monotonicity check needs three radii") {
  WeissProfile p;
  p.h = 0.1;
  p.radii = {0.1, 0.2};
  p.W = {0.0, 1.0};
  CHECK_THROWS_AS(monotonicity_check(p, 1.0), Error);
  p.radii = {0.1, 0.2, 0.3};
  p.W = {0.0, 1.0, 0.5};
  CHECK_FALSE(monotonicity_check(p, 0.0).monotone);
  CHECK(monotonicity_check(p, 2.0).monotone);
}

TEST_CASE("contour of a linear field is a straight line") {
  const Grid g = Grid::rectangle(-1.0, 1.0, -1.0, 1.0, 0.1);
  std::vector<double> f(g.size());
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) f[g.index(i, j)] = g.x(i) + 0.5 * g.y(j);
  const auto lines = contour(g, f, 0.13);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].size() > 10);
  for (const auto& p : lines[0]) CHECK(p[0] + 0.5 * p[1] == doctest::Approx(0.13).epsilon(1e-12));
}

TEST_CASE("free boundary of a rotated cone is a line") {
  const double a = 0.3;
  const auto sol = make_problem(kUnit2, Grid::disk(0.0, 0.0, 1.0, 1.0 / 32), cone_data(least_energy_cone(kUnit2), a));
  const auto fb = contact_boundary(sol, 1, 1e-6);
  REQUIRE(fb.vertex_count() > 10);
  for (const auto& p : fb.vertices()) CHECK(std::abs(-std::sin(a) * p[0] + std::cos(a) * p[1]) < 1.0 / 32);  // located to within one cell
}

TEST_CASE("fit recovers a rotated cone") {
  const auto sol = make_problem(kUnit2, Grid::disk(0.0, 0.0, 1.0, 1.0 / 32), cone_data(least_energy_cone(kUnit2), -0.7));
  const auto cat = enumerate_cones(kUnit2);
  const auto fit = fit_cone(sol, {0.0, 0.0}, 0.9, cat);
  CHECK(fit.cone_id == "L");
  CHECK(std::abs(std::remainder(fit.theta + 0.7, M_PI)) < 1e-3);
  CHECK(fit.epsilon < 1e-6);
  CHECK(fit_basis(least_energy_cone(kUnit3)).size() == 1);
}

TEST_CASE("blow-up of a homogeneous profile is itself") {
  const auto sol = make_problem(kUnit2, Grid::disk(0.0, 0.0, 1.0, 1.0 / 32), cone_data(least_energy_cone(kUnit2), 0.2));
  const Grid target = Grid::disk(0.0, 0.0, 1.0, 1.0 / 8);
  const auto v = blowup_rescale(sol, {0.0, 0.0}, 0.5, target);
  const auto f = cone_data(least_energy_cone(kUnit2), 0.2);
  std::vector<double> e(2);
  for (std::size_t n = 0; n < target.size(); ++n) {
    if (!target.active(n)) continue;
    f(target.x(n % target.nx), target.y(n / target.nx), e);
    CHECK(v.at(n, 0) == doctest::Approx(e[0]).epsilon(0.02).scale(1.0));
  }
}

TEST_CASE("rate models") {
  std::vector<double> r, log_eps, pow_eps;
  for (int k = 1; k <= 6; ++k) {
    r.push_back(std::pow(10.0, -0.5 * k));
    log_eps.push_back(0.2 / -std::log(r.back()));
    pow_eps.push_back(2.0 * std::pow(r.back(), 0.5));
  }
  const auto a = rate_fit(r, log_eps);
  CHECK(a.preferred == RateModel::Log);
  CHECK(a.log_constant == doctest::Approx(0.2));
  const auto b = rate_fit(r, pow_eps);
  CHECK(b.preferred == RateModel::Power);
  CHECK(b.power_exponent == doctest::Approx(0.5));
  CHECK(b.power_constant == doctest::Approx(2.0));
  CHECK_THROWS_AS(rate_fit(std::vector<double>{0.1, 0.05, 0.02, 0.01, 0.005}, std::vector<double>(5, 0.1)), Error);
}

TEST_CASE("regular point probe accepts p0") {
  const auto sol = make_problem(kUnit2, Grid::disk(0.0, 0.0, 1.0, 1.0 / 32), cone_data(least_energy_cone(kUnit2), 0.5));
  const auto rep = regular_point_probe(sol, {0.0, 0.0}, 0.9);
  CHECK(rep.fit.epsilon <= rep.epsilon0);
  REQUIRE(rep.curves.size() == 1);
  CHECK(rep.curves[0].oscillation < 0.05);
}

TEST_CASE("quadratic growth of a sampled cone") {
  const auto sol = make_problem(kUnit2, Grid::disk(0.0, 0.0, 1.0, 1.0 / 64), cone_data(least_energy_cone(kUnit2), 0.0));
  const std::vector<double> radii{0.1, 0.2};
  const auto rep = quadratic_growth_probe(sol, 1, radii);
  CHECK(rep.min_ratio > 0.9);
  CHECK(rep.max_ratio < 1.1);
}
