#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmembrane/problem.hpp"

namespace nmembrane {

/// Coincidence set {p_m = p_{m+1}} of a one-dimensional cone.
enum class Contact : char {
  LeftHalfLine = 'L',   // (-inf, 0]
  PointOnly = '0',      // {0}
  RightHalfLine = 'R',  // [0, inf)
};

/// A homogeneous degree-2 one-dimensional solution, identified by the
/// contact pattern of its N-1 consecutive pairs.
struct Cone1D {
  ProblemSpec spec;
  std::vector<Contact> pattern;

  std::size_t size() const noexcept { return spec.size(); }
  bool connected() const;
  /// Stable identifier: pattern letters joined by '.', e.g. "R.L"; "-" for N=1.
  std::string id() const;
  /// Cone with pattern mirrored (x -> -x).
  Cone1D reflected() const;
};

Cone1D make_cone(const ProblemSpec& spec, const std::string& id);
std::vector<Contact> parse_pattern(const std::string& id, std::size_t n);

/// The least-energy cone p_i = f_i/2 (x^+)^2 (all pairs coincide on the left).
Cone1D least_energy_cone(const ProblemSpec& spec);

/// p_i(x) = minus[i] (x^-)^2 + plus[i] (x^+)^2.
struct ConeCoefficients {
  std::vector<double> minus;
  std::vector<double> plus;
};

/// Contiguous 1-based groups on each side of the origin.
struct BranchLayout {
  std::vector<GroupIndex> left_groups;
  std::vector<GroupIndex> right_groups;
  std::size_t branch_count = 0;
};

struct DegenerateGroup {
  GroupIndex index;
  /// Laplacian of the group's average quadratic; equals the group force.
  double quadratic_coefficient = 0.0;
  Cone1D sub_cone;
};

struct DegenerateDecomposition {
  Cone1D cone;
  /// 1-based indices k with pattern PointOnly between k and k+1.
  std::vector<std::size_t> cut_indices;
  std::vector<DegenerateGroup> groups;
};

/// All 3^(N-1) cones in lexicographic pattern order (L < 0 < R).
std::vector<Cone1D> enumerate_cones(const ProblemSpec& spec);

ConeCoefficients cone_coefficients(const Cone1D& cone);

/// Groups of coinciding membranes on one side (right = true for x > 0).
std::vector<GroupIndex> side_groups(const Cone1D& cone, bool right);

/// Throws NotConnected.
BranchLayout branch_layout(const Cone1D& cone);

DegenerateDecomposition decompose_degenerate(const Cone1D& cone);

/// Membrane values p(x).
std::vector<double> cone_eval(const Cone1D& cone, double x);

/// Reassembles the original cone values from a decomposition at x.
std::vector<double> reassemble(const DegenerateDecomposition& decomposition, double x);

nlohmann::json cone_to_json(const Cone1D& cone);

}  // namespace nmembrane
