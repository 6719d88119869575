#include <doctest.h>

#include "nmembrane/io.hpp"
#include "oracles.hpp"

using namespace nmembrane;

TEST_CASE("seventeen significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(dump_json(nlohmann::json{{"a", 0.1}}, -1) == "{\"a\":0.10000000000000001}\n");
  const auto j = nlohmann::json::parse(dump_json({{"x", {1.0 / 3.0, 2.5}}, {"s", "t"}}));
  CHECK(j["x"][0].get<double>() == 1.0 / 3.0);
}

TEST_CASE("fnv1a") {
  CHECK(fnv1a64("") == oracles::kFnvEmpty);
  CHECK(fnv1a64("a") == oracles::kFnvA);
  CHECK(fnv1a64("foobar") == oracles::kFnvFoobar);
}

TEST_CASE("field csv lists active nodes") {
  const ProblemSpec s{{1.0, 1.0}, {1.0, -1.0}};
  const auto sol = make_problem(s, Grid::interval(0.0, 1.0, 2), [](double x, double, std::span<double> out) {
    out[0] = x;
    out[1] = -x;
  });
  CHECK(field_csv(sol) == "node,x,y,u_1,u_2\n0,0,0,0,-0\n1,0.5,0,0.5,-0.5\n2,1,0,1,-1\n");
}
