#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nmembrane {

struct ValidationIssue {
  std::string pointer;  // JSON pointer into the scenario, "" for the root
  std::string message;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// The scenario JSON schema shipped with the library.
const nlohmann::json& scenario_schema();

/// Checks a JSON document against the subset of JSON Schema used by the
/// scenario schema (type, enum, required, properties, additionalProperties,
/// items, min/max, min/maxItems, local $ref).
std::vector<ValidationIssue> validate_against(const nlohmann::json& schema, const nlohmann::json& doc);

/// Schema validation plus cross-field checks (lengths, ordering, cone ids).
std::vector<ValidationIssue> validate_scenario(const nlohmann::json& scenario);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  unsigned threads = 1;
  /// When set, the scenario pipeline must match (or is filled in if absent).
  std::optional<std::string> pipeline;
};

struct RunResult {
  /// Output file name -> contents. Nothing is written by run_scenario.
  std::map<std::string, std::string> files;
  nlohmann::json manifest;
  /// Short human summary.
  std::string summary;
};

/// Parses `text`, validates it and executes its pipeline. Throws
/// ValidationError for bad input and nmembrane::Error from the library.
RunResult run_scenario(std::string_view text, const RunOverrides& overrides = {});

}  // namespace nmembrane
