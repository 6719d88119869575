#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "nmembrane/cones1d.hpp"

namespace nmembrane {

/// One linear coefficient per branch: u_i ~ p_i + minus[i] x^- + plus[i] x^+.
/// Elements of B(p) have zero weighted sum on each side and equal entries
/// inside every coincidence group of the cone.
struct BranchVector {
  std::vector<double> minus;
  std::vector<double> plus;

  static BranchVector zero(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }
  std::size_t size() const noexcept { return minus.size(); }

  BranchVector& operator+=(const BranchVector& o);
  BranchVector& operator-=(const BranchVector& o);
  BranchVector& operator*=(double s);
};

BranchVector operator+(BranchVector a, const BranchVector& b);
BranchVector operator-(BranchVector a, const BranchVector& b);
BranchVector operator*(double s, BranchVector a);
BranchVector operator-(BranchVector a);
double dot(const BranchVector& a, const BranchVector& b);
double norm(const BranchVector& a);

/// The per-branch constants of h(x, b) beyond its linear asymptote.
using ErrorVector = BranchVector;

bool in_branch_space(const Cone1D& cone, const BranchVector& b, double tol = 1e-12);

/// Orthonormal (Euclidean in R^{2N}) basis of B(p); N-1 vectors.
std::vector<BranchVector> branch_space_basis(const Cone1D& cone);

/// Linear combination of `basis` with `coefficients`.
BranchVector combine(std::span<const BranchVector> basis, std::span<const double> coefficients);

/// Quadratic c2 x^2 + c1 x + c0 in the global coordinate.
struct Quadratic {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double operator()(double x) const noexcept { return (c2 * x + c1) * x + c0; }
  double slope(double x) const noexcept { return 2.0 * c2 * x + c1; }
  /// Adds s (x - x0)^2.
  void add_square(double s, double x0) noexcept;
};

/// N membranes, each a C^{1,1} piecewise quadratic over common breakpoints.
class PiecewiseQuadratic1D {
 public:
  PiecewiseQuadratic1D() = default;
  PiecewiseQuadratic1D(std::vector<double> breakpoints, std::vector<std::vector<Quadratic>> pieces);

  std::size_t membranes() const noexcept { return pieces_.size(); }
  std::size_t intervals() const noexcept { return breakpoints_.size() + 1; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const Quadratic& piece(std::size_t membrane, std::size_t interval) const { return pieces_[membrane][interval]; }

  std::size_t interval_of(double x) const;
  double value(std::size_t membrane, double x) const;
  double slope(std::size_t membrane, double x) const;
  std::vector<double> evaluate(double x) const;
  void evaluate(double x, std::span<double> out) const;

  /// Free boundary positions Gamma_k, one per consecutive pair (as built).
  std::vector<double> free_boundaries;

  /// Largest jump of value or slope across any breakpoint.
  double continuity_defect() const;

 private:
  std::vector<double> breakpoints_;
  std::vector<std::vector<Quadratic>> pieces_;
};

nlohmann::json to_json(const PiecewiseQuadratic1D& sol);

/// Branch vector generated by unit translation: h(x, s tau) = p(x + s).
/// Throws NotConnected.
BranchVector tau(const Cone1D& cone);

/// Global solution of P0 whose pair-k free boundary sits at gamma[k-1].
PiecewiseQuadratic1D gamma_to_solution(const Cone1D& cone, std::span<const double> gamma);

/// Reads b from the outermost intervals. Throws AsymptoticMismatch.
BranchVector solution_to_b(const Cone1D& cone, const PiecewiseQuadratic1D& sol);

/// Reads e from the outermost intervals.
ErrorVector solution_to_e(const Cone1D& cone, const PiecewiseQuadratic1D& sol);

enum class RegionSearch {
  Auto,          // cached seed, then ordering iteration, then enumeration / continuation
  Enumerate,     // try every ordering of the free boundaries
  Continuation,  // walk across ordering regions from a reference point
};

/// Inverse of the free-boundary-to-asymptote map. Throws NoRegionFound.
std::vector<double> b_to_gamma(const Cone1D& cone, const BranchVector& b,
                               RegionSearch method = RegionSearch::Auto);

/// h(., b) as a piecewise quadratic.
PiecewiseQuadratic1D h_solution(const Cone1D& cone, const BranchVector& b,
                                RegionSearch method = RegionSearch::Auto);

std::vector<double> h_eval(const Cone1D& cone, const BranchVector& b, double x);

ErrorVector error_function(const Cone1D& cone, const BranchVector& b);

/// |e(b) - e(-b)| / |b|^2. Throws ZeroVector.
double asymmetry(const Cone1D& cone, const BranchVector& b);

/// dist(b/|b|, {tau/|tau|, -tau/|tau|}).
double tau_line_distance(const Cone1D& cone, const BranchVector& b);

/// Local coordinates of a profile rotated by `angle`:
/// y1 = cos a x1 + sin a x2, y2 = -sin a x1 + cos a x2.
struct Rotation {
  double c = 1.0;
  double s = 0.0;

  explicit Rotation(double angle);
  void to_local(double x1, double x2, double& y1, double& y2) const noexcept {
    y1 = c * x1 + s * x2;
    y2 = -s * x1 + c * x2;
  }
};

/// p(x, b0, b1) = h(y2, b0 + y1 b1) in coordinates rotated by rotation_angle.
struct ApproximateProfile2D {
  Cone1D cone;
  BranchVector b0;
  BranchVector b1;
  double rotation_angle = 0.0;
};

/// Evaluates an approximate profile; for b0 = 0 it precomputes h(., +-b1)
/// and uses homogeneity, so each point costs O(N).
class ProfileEvaluator {
 public:
  explicit ProfileEvaluator(ApproximateProfile2D profile);

  void eval(double x1, double x2, std::span<double> out) const;
  std::vector<double> operator()(double x1, double x2) const;
  const ApproximateProfile2D& profile() const noexcept { return profile_; }

 private:
  ApproximateProfile2D profile_;
  Rotation rotation_;
  bool homogeneous_ = true;
  PiecewiseQuadratic1D base_;
  PiecewiseQuadratic1D positive_;
  PiecewiseQuadratic1D negative_;
};

std::vector<double> profile2d_eval(const ApproximateProfile2D& profile, double x1, double x2);

/// q(x) = xx x1^2 + 2 xy x1 x2 + yy x2^2.
struct GroupQuadratic {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double operator()(double x1, double x2) const noexcept { return xx * x1 * x1 + 2.0 * xy * x1 * x2 + yy * x2 * x2; }
  double laplacian() const noexcept { return 2.0 * (xx + yy); }
};

/// Two-dimensional extension of a degenerate cone: each connected group is a
/// rotated sub-cone plus a quadratic with prescribed Laplacian.
struct DegenerateProfile2D {
  DegenerateDecomposition decomposition;
  std::vector<double> angles;
  std::vector<GroupQuadratic> quadratics;
  /// Per inter-group cut: angles on the unit circle where the two adjacent
  /// membranes touch.
  std::vector<std::vector<double>> coincidence_angles;

  std::vector<double> operator()(double x1, double x2) const;
};

/// Validates ordering and the at-most-two-rays condition on a fine angular
/// grid; `tolerance` is relative to the largest gap on the unit circle.
/// Throws OrderingViolation, TwoRayViolation, InvalidArgument.
DegenerateProfile2D build_degenerate_profile(const DegenerateDecomposition& decomposition,
                                             std::span<const double> angles,
                                             std::span<const GroupQuadratic> quadratics,
                                             std::size_t angular_samples = 4096, double tolerance = 1e-12);

}  // namespace nmembrane
