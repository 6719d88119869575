#include <doctest.h>

#include "nmembrane/scenario.hpp"

using namespace nmembrane;

namespace {
bool has_issue(const std::vector<ValidationIssue>& v, const std::string& ptr) {
  for (const auto& i : v)
    if (i.pointer == ptr) return true;
  return false;
}
}  // namespace

TEST_CASE("schema violations carry JSON pointers") {
  const auto issues = validate_scenario(nlohmann::json::parse(R"({
    "pipeline": "solve",
    "problem": {"weights": [1, -1], "forces": [1, "x"]},
    "extra": 1
  })"));
  CHECK(has_issue(issues, "/problem/weights/1"));
  CHECK(has_issue(issues, "/problem/forces/1"));
  CHECK(has_issue(issues, "/extra"));
  CHECK(has_issue(validate_scenario(nlohmann::json::object()), "/pipeline"));
}

TEST_CASE("cross-field checks") {
  const auto issues = validate_scenario(nlohmann::json::parse(R"({
    "pipeline": "solve",
    "problem": {"weights": [1, 1, 1], "forces": [1, 0, -1]},
    "domain": {"type": "disk", "radius": 1},
    "boundary": {"type": "cone", "cone": "0.L"}
  })"));
  CHECK(has_issue(issues, "/domain/h"));
  CHECK(has_issue(issues, "/boundary/cone"));
  CHECK(has_issue(validate_scenario(nlohmann::json::parse(
                      R"({"pipeline": "cones", "problem": {"weights": [1, 1], "forces": [-1, 1]}})")),
                  "/problem/forces/1"));
}

TEST_CASE("cones pipeline") {
  const RunResult r = run_scenario(R"({"pipeline": "cones", "problem": {"weights": [1, 1, 1], "forces": [1, 0, -1]}})");
  const auto j = nlohmann::json::parse(r.files.at("cones.json"));
  CHECK(j["count"] == 9);
  CHECK(j["connected"] == 4);
  CHECK(r.manifest["pipeline"] == "cones");
  CHECK(r.manifest["outputs"].size() == 1);
}

TEST_CASE("pipeline override must match") {
  CHECK_THROWS_AS(run_scenario(R"({"pipeline": "cones", "problem": {"weights": [1], "forces": [0]}})",
                               RunOverrides{std::nullopt, std::nullopt, 1, std::string("solve")}),
                  ValidationError);
  CHECK_THROWS_AS(run_scenario("{not json"), ValidationError);
}

TEST_CASE("solve pipeline is reproducible") {
  const char* text = R"({
    "pipeline": "solve",
    "problem": {"weights": [1, 1], "forces": [1, -1]},
    "domain": {"type": "disk", "radius": 1, "h": 0.0625},
    "boundary": {"type": "random"},
    "seed": 4
  })";
  const RunResult a = run_scenario(text);
  const RunResult b = run_scenario(text, RunOverrides{std::nullopt, std::nullopt, 2, std::nullopt});
  CHECK(a.files.at("field.csv") == b.files.at("field.csv"));
  const RunResult c = run_scenario(text, RunOverrides{std::uint64_t{5}, std::nullopt, 1, std::nullopt});
  CHECK(a.files.at("field.csv") != c.files.at("field.csv"));
  CHECK(a.manifest["input_fnv1a64"] == b.manifest["input_fnv1a64"]);
  CHECK(a.manifest["tolerances"].contains("solver_tol"));
}
