#include <doctest.h>

#include "nmembrane/error.hpp"
#include "nmembrane/problem.hpp"
#include "oracles.hpp"

using namespace nmembrane;

TEST_CASE("normalize shifts forces to zero weighted sum") {
  const ProblemSpec s = normalize(ProblemSpec{{1.0, 2.0, 1.5}, {1.2, 0.1, -0.9}});
  for (std::size_t k = 0; k < 3; ++k) CHECK(s.forces[k] == doctest::Approx(oracles::kNormalizedForces[k]).epsilon(1e-15));
  CHECK(is_normalized(s));
  CHECK(normalize(s).forces == s.forces);
}

TEST_CASE("validation rejects bad specs") {
  CHECK_THROWS_AS(validate(ProblemSpec{{1.0, 1.0}, {1.0, 1.0}}), Error);
  try {
    validate(ProblemSpec{{1.0, 1.0}, {-1.0, 1.0}});
    FAIL("accepted increasing forces");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NondegeneracyViolation);
  }
  try {
    validate(ProblemSpec{{1.0, 0.0}, {1.0, -1.0}});
    FAIL("accepted zero weight");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidWeight);
  }
  CHECK_THROWS_AS(validate(ProblemSpec{{1.0}, {1.0, -1.0}}), Error);
}

TEST_CASE("group force and average subtraction") {
  const ProblemSpec s{{1.0, 3.0, 2.0}, {2.0, 1.0, -2.5}};
  CHECK(group_force(s, {1, 2}) == doctest::Approx((2.0 + 3.0) / 4.0));
  CHECK(group_force(s, {3, 3}) == doctest::Approx(-2.5));
  const std::vector<double> v{1.0, 2.0, 3.0, 0.0, 0.0, 6.0};
  const auto out = subtract_average(v, s.weights);
  // Point 1: average (1 + 6 + 6) / 6 = 13/6; point 2: 12/6 = 2.
  CHECK(out[0] == doctest::Approx(1.0 - 13.0 / 6.0));
  CHECK(out[5] == doctest::Approx(4.0));
  double w = 0.0;
  for (std::size_t k = 0; k < 3; ++k) w += s.weights[k] * out[k];
  CHECK(std::abs(w) < 1e-14);
}

TEST_CASE("json round trip normalizes at load") {
  const auto j = nlohmann::json::parse(R"({"n": 2, "weights": [1, 1], "forces": [3, 1]})");
  const ProblemSpec s = load_problem(j);
  CHECK(s.forces[0] == doctest::Approx(1.0));
  CHECK(s.forces[1] == doctest::Approx(-1.0));
  nlohmann::json back = s;
  CHECK(back["weights"].size() == 2);
}
