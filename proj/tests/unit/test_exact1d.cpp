#include <doctest.h>

#include <random>

#include "nmembrane/error.hpp"
#include "nmembrane/exact1d.hpp"
#include "oracles.hpp"

using namespace nmembrane;

namespace {
const ProblemSpec kUnit2{{1.0, 1.0}, {1.0, -1.0}};
const ProblemSpec kUnit3{{1.0, 1.0, 1.0}, {1.0, 0.0, -1.0}};
const ProblemSpec kGraded3 = normalize(ProblemSpec{{1.0, 2.0, 1.5}, {1.2, 0.1, -0.9}});
}  // namespace

TEST_CASE("tau of R.L") {
  const BranchVector t = tau(make_cone(kUnit3, "R.L"));
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(t.plus[k] == doctest::Approx(oracles::kRLTauPlus[k]));
    CHECK(t.minus[k] == doctest::Approx(oracles::kRLTauMinus[k]));
  }
  CHECK(in_branch_space(make_cone(kUnit3, "R.L"), t));
}

TEST_CASE("translation moves the free boundary") {
  const Cone1D c = make_cone(kUnit2, "L");
  const auto g = b_to_gamma(c, 0.3 * tau(c));
  REQUIRE(g.size() == 1);
  CHECK(g[0] == doctest::Approx(-0.3).epsilon(1e-12));
  const auto v = h_eval(c, 0.3 * tau(c), 1.0);
  CHECK(v[0] == doctest::Approx(0.5 * 1.3 * 1.3));
}

TEST_CASE("zero free boundaries give the cone") {
  for (const Cone1D& c : enumerate_cones(kGraded3)) {
    if (!c.connected()) continue;
    const auto sol = gamma_to_solution(c, std::vector<double>{0.0, 0.0});
    for (double x : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
      const auto a = sol.evaluate(x);
      const auto b = cone_eval(c, x);
      for (std::size_t k = 0; k < 3; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    }
    CHECK(norm(solution_to_b(c, sol)) < 1e-12);
  }
}

TEST_CASE("h(., b) is C^1,1, ordered and has the prescribed asymptotes") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (const Cone1D& c : enumerate_cones(kGraded3)) {
    if (!c.connected()) continue;
    const auto basis = branch_space_basis(c);
    CHECK(basis.size() == 2);
    for (int t = 0; t < 20; ++t) {
      const BranchVector b = combine(basis, std::vector<double>{nd(rng), nd(rng)});
      const auto sol = h_solution(c, b);
      CHECK(sol.continuity_defect() < 1e-10);
      for (double x = -8.0; x <= 8.0; x += 0.05) {
        const auto v = sol.evaluate(x);
        CHECK(v[0] >= v[1] - 1e-10);
        CHECK(v[1] >= v[2] - 1e-10);
      }
      CHECK(norm(solution_to_b(c, sol) - b) < 1e-10);
    }
  }
}

TEST_CASE("region search strategies agree") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  const ProblemSpec s = normalize(ProblemSpec{{1.0, 0.5, 2.0, 1.0}, {3.0, 1.0, 0.5, -2.0}});
  for (const Cone1D& c : enumerate_cones(s)) {
    if (!c.connected()) continue;
    const auto basis = branch_space_basis(c);
    for (int t = 0; t < 10; ++t) {
      const BranchVector b = combine(basis, std::vector<double>{nd(rng), nd(rng), nd(rng)});
      const auto a = b_to_gamma(c, b, RegionSearch::Enumerate);
      const auto d = b_to_gamma(c, b, RegionSearch::Continuation);
      for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(d[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("error function: homogeneous, symmetric along tau") {
  const Cone1D c = make_cone(kGraded3, "R.L");
  const auto basis = branch_space_basis(c);
  const BranchVector b = combine(basis, std::vector<double>{0.4, -1.1});
  const ErrorVector e = error_function(c, b);
  CHECK(norm(error_function(c, 3.0 * b) - 9.0 * e) < 1e-10);
  CHECK(asymmetry(c, 1.7 * tau(c)) < 1e-12);
  CHECK(tau_line_distance(c, -2.0 * tau(c)) < 1e-12);
  CHECK_THROWS_AS(asymmetry(c, BranchVector::zero(3)), Error);
}

TEST_CASE("asymptote mismatch is reported") {
  const Cone1D c = make_cone(kUnit2, "L");
  BranchVector b = BranchVector::zero(2);
  b.plus = {1.0, 1.0};  // not zero weighted sum
  CHECK_FALSE(in_branch_space(c, b));
}

TEST_CASE("rotated profile evaluation") {
  const Cone1D p0 = least_energy_cone(kUnit2);
  const double a = 0.6;
  ProfileEvaluator ev({p0, BranchVector::zero(2), BranchVector::zero(2), a});
  // The point at distance 2 along the rotated normal direction.
  const double x1 = -2.0 * std::sin(a);
  const double x2 = 2.0 * std::cos(a);
  const auto v = ev(x1, x2);
  CHECK(v[0] == doctest::Approx(2.0));
  CHECK(v[1] == doctest::Approx(-2.0));
  const auto w = ev(-x1, -x2);
  CHECK(w[0] == doctest::Approx(0.0));
}

TEST_CASE("degenerate profile with a point contact") {
  const auto d = decompose_degenerate(make_cone(kUnit3, "0.L"));
  const std::vector<double> angles{0.0, M_PI / 2.0};
  const std::vector<GroupQuadratic> q{{0.5, 0.0, 0.0}, {-0.25, 0.0, 0.0}};
  const auto prof = build_degenerate_profile(d, angles, q);
  REQUIRE(prof.coincidence_angles.size() == 1);
  CHECK(prof.coincidence_angles[0].size() == 2);
  for (double t = 0.0; t < 2.0 * M_PI; t += 0.1) {
    const auto v = prof(std::cos(t), std::sin(t));
    CHECK(v[0] >= v[1] - 1e-12);
    CHECK(v[1] >= v[2] - 1e-12);
  }
}
