// End-to-end acceptance checks: one PASS/FAIL line per criterion.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "nmembrane/verify.hpp"

using namespace nmembrane;

int main(int argc, char** argv) {
  VerifyOptions opt;
  if (argc > 1) opt.seed = std::strtoull(argv[1], nullptr, 10);
  using Check = CheckResult (*)(const VerifyOptions&);
  const Check checks[] = {check_catalogue_counts,   check_shift_identity,      check_gamma_round_trip,
                          check_error_structure,    check_projection_oracle,   check_convergence_order,
                          check_euler_lagrange,     check_weiss_value,         check_weiss_monotonicity,
                          check_max_principle_suite, check_cone_fitting,       check_quadratic_growth,
                          check_game_equivalence,   check_rate_diagnostic};
  int failed = 0;
  for (Check c : checks) {
    const CheckResult r = c(opt);
    std::printf("%s criterion %2d: %s (%.2f s) %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d of %zu criteria failed\n", failed, std::size(checks));
  return failed == 0 ? 0 : 1;
}
