#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace nmembrane {

/// Physical setup of the N-membrane problem: N membranes with weights and
/// constant forces. Forces must be strictly decreasing (nondegeneracy).
struct ProblemSpec {
  std::vector<double> weights;
  std::vector<double> forces;

  std::size_t size() const noexcept { return forces.size(); }
  double total_weight() const;
  double max_abs_force() const;
};

/// Inclusive, 1-based membrane index range {lo, ..., hi}.
struct GroupIndex {
  std::size_t lo = 1;
  std::size_t hi = 1;

  std::size_t size() const noexcept { return hi - lo + 1; }
};

/// Throws InvalidWeight / NondegeneracyViolation / InvalidArgument.
void validate(const ProblemSpec& spec);

/// Shifts forces so that the weighted force sum is zero.
ProblemSpec normalize(const ProblemSpec& spec);

bool is_normalized(const ProblemSpec& spec, double tol = 1e-12);

/// Weighted average force over the group I.
double group_force(const ProblemSpec& spec, GroupIndex group);

/// Weighted average of `values` (length N) restricted to `group`.
double group_average(std::span<const double> values, std::span<const double> weights,
                     GroupIndex group);

/// Removes the weighted average from each point's N-vector. `values` is laid
/// out point-major: point p occupies [p*N, (p+1)*N).
std::vector<double> subtract_average(std::span<const double> values,
                                     std::span<const double> weights);

void to_json(nlohmann::json& j, const ProblemSpec& spec);
/// Parses {"n", "weights", "forces"}; does not normalize.
void from_json(const nlohmann::json& j, ProblemSpec& spec);

/// Parses, validates and normalizes (normalization is eager at load).
ProblemSpec load_problem(const nlohmann::json& j);

}  // namespace nmembrane
