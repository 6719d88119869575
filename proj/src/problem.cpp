#include "nmembrane/problem.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "nmembrane/error.hpp"

namespace nmembrane {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NondegeneracyViolation: return "NondegeneracyViolation";
    case ErrorKind::InvalidWeight: return "InvalidWeight";
    case ErrorKind::InvalidRange: return "InvalidRange";
    case ErrorKind::NotConnected: return "NotConnected";
    case ErrorKind::AsymptoticMismatch: return "AsymptoticMismatch";
    case ErrorKind::NoRegionFound: return "NoRegionFound";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::OrderingViolation: return "OrderingViolation";
    case ErrorKind::TwoRayViolation: return "TwoRayViolation";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::UnorderedBoundary: return "UnorderedBoundary";
    case ErrorKind::IncompatibleGrids: return "IncompatibleGrids";
    case ErrorKind::EmptyFreeBoundary: return "EmptyFreeBoundary";
    case ErrorKind::BallOutsideDomain: return "BallOutsideDomain";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NotRegular: return "NotRegular";
    case ErrorKind::InsufficientData: return "InsufficientData";
  }
  return "Unknown";
}

double ProblemSpec::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double ProblemSpec::max_abs_force() const {
  double m = 0.0;
  for (double f : forces) m = std::max(m, std::abs(f));
  return m;
}

void validate(const ProblemSpec& spec) {
  if (spec.forces.empty()) throw Error(ErrorKind::InvalidArgument, "N must be positive");
  if (spec.weights.size() != spec.forces.size())
    throw Error(ErrorKind::InvalidArgument, "weights and forces differ in length");
  for (std::size_t k = 0; k < spec.weights.size(); ++k) {
    if (!(spec.weights[k] > 0.0) || !std::isfinite(spec.weights[k]))
      throw Error(ErrorKind::InvalidWeight, "weight " + std::to_string(k + 1) + " is not positive");
  }
  for (std::size_t k = 0; k + 1 < spec.forces.size(); ++k) {
    if (!(spec.forces[k] > spec.forces[k + 1]))
      throw Error(ErrorKind::NondegeneracyViolation,
                  "forces must be strictly decreasing at index " + std::to_string(k + 1));
  }
}

ProblemSpec normalize(const ProblemSpec& spec) {
  validate(spec);
  double wf = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) wf += spec.weights[k] * spec.forces[k];
  const double mean = wf / spec.total_weight();
  ProblemSpec out = spec;
  for (double& f : out.forces) f -= mean;
  return out;
}

bool is_normalized(const ProblemSpec& spec, double tol) {
  double wf = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) wf += spec.weights[k] * spec.forces[k];
  return std::abs(wf) <= tol * std::max(1.0, spec.max_abs_force() * spec.total_weight());
}

double group_average(std::span<const double> values, std::span<const double> weights,
                     GroupIndex group) {
  if (group.lo < 1 || group.lo > group.hi || group.hi > values.size())
    throw Error(ErrorKind::InvalidRange, "invalid group index range");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = group.lo - 1; i < group.hi; ++i) {
    num += weights[i] * values[i];
    den += weights[i];
  }
  return num / den;
}

double group_force(const ProblemSpec& spec, GroupIndex group) {
  return group_average(spec.forces, spec.weights, group);
}

std::vector<double> subtract_average(std::span<const double> values,
                                     std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0 || values.size() % n != 0)
    throw Error(ErrorKind::InvalidArgument, "values not a multiple of N");
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t p = 0; p < values.size(); p += n) {
    double avg = 0.0;
    for (std::size_t k = 0; k < n; ++k) avg += weights[k] * values[p + k];
    avg /= wsum;
    for (std::size_t k = 0; k < n; ++k) out[p + k] -= avg;
  }
  return out;
}

void to_json(nlohmann::json& j, const ProblemSpec& spec) {
  j = nlohmann::json{{"n", spec.size()}, {"weights", spec.weights}, {"forces", spec.forces}};
}

void from_json(const nlohmann::json& j, ProblemSpec& spec) {
  spec.weights = j.at("weights").get<std::vector<double>>();
  spec.forces = j.at("forces").get<std::vector<double>>();
  if (j.contains("n") && j.at("n").get<std::size_t>() != spec.forces.size())
    throw Error(ErrorKind::InvalidArgument, "n does not match the length of forces");
}

ProblemSpec load_problem(const nlohmann::json& j) {
  ProblemSpec spec = j.get<ProblemSpec>();
  return normalize(spec);
}

}  // namespace nmembrane
