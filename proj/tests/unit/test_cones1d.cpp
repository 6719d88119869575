#include <doctest.h>

#include <cmath>

#include "nmembrane/cones1d.hpp"
#include "nmembrane/error.hpp"
#include "oracles.hpp"

using namespace nmembrane;

namespace {
const ProblemSpec kUnit3{{1.0, 1.0, 1.0}, {1.0, 0.0, -1.0}};
}

TEST_CASE("catalogue sizes") {
  for (std::size_t n = 1; n <= 6; ++n) {
    ProblemSpec s;
    for (std::size_t i = 0; i < n; ++i) {
      s.weights.push_back(1.0);
      s.forces.push_back(static_cast<double>(n - i));
    }
    const auto cones = enumerate_cones(normalize(s));
    std::size_t connected = 0;
    for (const auto& c : cones) connected += c.connected() ? 1 : 0;
    CHECK(cones.size() == static_cast<std::size_t>(std::pow(3, n - 1)));
    CHECK(connected == (std::size_t{1} << (n - 1)));
  }
}

TEST_CASE("R.L coefficients match the hand computation") {
  const Cone1D c = make_cone(kUnit3, "R.L");
  const ConeCoefficients a = cone_coefficients(c);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.plus[k] == doctest::Approx(oracles::kRLPlus[k]));
    CHECK(a.minus[k] == doctest::Approx(oracles::kRLMinus[k]));
  }
  const auto v = cone_eval(c, 2.0);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[2] == doctest::Approx(-2.0));
}

TEST_CASE("least-energy cone and reflection") {
  const Cone1D p0 = least_energy_cone(kUnit3);
  CHECK(p0.id() == "L.L");
  CHECK(p0.reflected().id() == "R.R");
  const auto a = cone_coefficients(p0);
  CHECK(a.plus[0] == doctest::Approx(0.5));
  CHECK(a.minus[0] == doctest::Approx(0.0));
}

TEST_CASE("branch layout counts branches") {
  const auto layout = branch_layout(make_cone(kUnit3, "R.L"));
  CHECK(layout.right_groups.size() == 2);
  CHECK(layout.left_groups.size() == 2);
  CHECK_THROWS_AS(branch_layout(make_cone(kUnit3, "0.L")), Error);
}

TEST_CASE("degenerate decomposition reassembles the cone") {
  const Cone1D c = make_cone(normalize(ProblemSpec{{1.0, 2.0, 1.0, 3.0}, {2.0, 1.0, -0.5, -1.0}}), "R.0.L");
  const auto d = decompose_degenerate(c);
  REQUIRE(d.cut_indices.size() == 1);
  CHECK(d.cut_indices[0] == 2);
  REQUIRE(d.groups.size() == 2);
  for (double x : {-1.7, -0.2, 0.0, 0.4, 3.1}) {
    const auto a = cone_eval(c, x);
    const auto b = reassemble(d, x);
    for (std::size_t k = 0; k < 4; ++k) CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-13));
  }
}

TEST_CASE("pattern parsing errors") {
  CHECK_THROWS_AS(parse_pattern("R.X", 3), Error);
  CHECK_THROWS_AS(parse_pattern("R", 3), Error);
  CHECK(make_cone(ProblemSpec{{1.0}, {0.0}}, "-").id() == "-");
}
