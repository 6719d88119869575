#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace nmembrane {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  /// Measured quantities and the thresholds they were compared against.
  nlohmann::json metrics = nlohmann::json::object();
};

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  unsigned threads = 1;
};

/// Suites: cones, exact1d, projection, solver, weiss, game, analysis, all.
/// Throws InvalidArgument for an unknown suite.
std::vector<CheckResult> run_suite(const std::string& suite, const VerifyOptions& options = {});
std::vector<std::string> suite_names();

/// Individual acceptance checks, numbered as in the suite tables.
CheckResult check_catalogue_counts(const VerifyOptions& o);
CheckResult check_shift_identity(const VerifyOptions& o);
CheckResult check_gamma_round_trip(const VerifyOptions& o);
CheckResult check_error_structure(const VerifyOptions& o);
CheckResult check_projection_oracle(const VerifyOptions& o);
CheckResult check_convergence_order(const VerifyOptions& o);
CheckResult check_euler_lagrange(const VerifyOptions& o);
CheckResult check_weiss_value(const VerifyOptions& o);
CheckResult check_weiss_monotonicity(const VerifyOptions& o);
CheckResult check_max_principle_suite(const VerifyOptions& o);
CheckResult check_cone_fitting(const VerifyOptions& o);
CheckResult check_quadratic_growth(const VerifyOptions& o);
CheckResult check_game_equivalence(const VerifyOptions& o);
CheckResult check_rate_diagnostic(const VerifyOptions& o);

/// "PASS  3  name  detail" lines plus a summary line.
std::string format_table(const std::vector<CheckResult>& results);

}  // namespace nmembrane
