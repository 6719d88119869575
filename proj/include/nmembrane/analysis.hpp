#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmembrane/exact1d.hpp"
#include "nmembrane/solver.hpp"

namespace nmembrane {

using Point2 = std::array<double, 2>;

/// Level set of u_k - u_{k+1} for the 1-based pair k. Each polyline is an
/// ordered vertex list; closed curves repeat their first vertex.
struct FreeBoundaryCurve {
  std::size_t pair = 1;
  double tol = 0.0;
  std::vector<std::vector<Point2>> polylines;

  std::size_t vertex_count() const;
  std::vector<Point2> vertices() const;
};

/// Marching squares on u_k - u_{k+1} - tol (crossings in 1D). Throws
/// EmptyFreeBoundary when the level set is empty.
FreeBoundaryCurve extract_free_boundary(const GridSolution& sol, std::size_t k, double coincidence_tol);

/// Estimate of the contact boundary itself: the tol level set of the
/// difference lies a distance ~sqrt(tol / a) off the free boundary, so the
/// vertices are moved back along the gradient of sqrt(u_k - u_{k+1}).
FreeBoundaryCurve contact_boundary(const GridSolution& sol, std::size_t k, double coincidence_tol);

/// Marching squares on an arbitrary node field; `field` has grid.size() entries.
std::vector<std::vector<Point2>> contour(const Grid& grid, std::span<const double> field, double level);

struct WeissProfile {
  Point2 center{0.0, 0.0};
  double h = 0.0;
  std::vector<double> radii;
  std::vector<double> E;
  std::vector<double> F;
  std::vector<double> W;
};

/// Quadrature of E(u,r) = r^{-(d+2)} int_{B_r} sum w (|grad u|^2 / 2 + f u) and
/// F(u,r) = r^{-(d+3)} int_{dB_r} sum w u^2. Throws BallOutsideDomain.
WeissProfile weiss(const GridSolution& sol, Point2 center, std::span<const double> radii);

/// Analytic W of the homogeneous extension of a 1D cone in the plane:
/// (pi/32) sum over both sides and coincidence groups of w_I f_I^2.
double weiss_of_cone(const Cone1D& cone);

/// Quadrature slack constant: twice the largest |W - W_exact| r / h seen on
/// sampled exact cones of `spec` at spacing h.
double calibrate_weiss_slack(const ProblemSpec& spec, double h);

struct MonotonicityVerdict {
  bool monotone = true;
  double slack_constant = 0.0;
  /// Largest W(r_i) - W(r_{i+1}) - slack_i (positive means violation).
  double worst_excess = 0.0;
  std::size_t worst_index = 0;
};

/// Requires >= 3 radii (InsufficientData otherwise).
MonotonicityVerdict monotonicity_check(const WeissProfile& profile, double slack_constant);

/// v(y) = r^{-2} u(center + r y) sampled on `target`. Throws OutOfDomain.
GridSolution blowup_rescale(const GridSolution& sol, Point2 center, double r, const Grid& target);

struct FitOptions {
  std::size_t coarse_angles = 64;
  double angle_tol = 1e-4;
  /// Subsample stride cap for the search stages; the final epsilon always
  /// uses every node in the ball.
  std::size_t max_search_points = 3000;
  /// Search theta over the full circle instead of a half circle.
  bool full_circle = false;
  bool polish = true;
};

struct FitResult {
  std::string cone_id;
  double theta = 0.0;
  BranchVector b;
  /// r^{-2} sup_{B_r} |u - p_theta(., b)| over grid nodes.
  double epsilon = 0.0;
  double radius = 0.0;
  Point2 center{0.0, 0.0};
  /// |b| / sqrt(epsilon).
  double b_ratio = 0.0;
  bool degenerate = false;
  /// Degenerate fits only: per-group sub-cone angles and quadratics.
  std::vector<double> group_angles;
  std::vector<GroupQuadratic> quadratics;
  bool degenerate_profile_valid = false;
  double best_connected_epsilon = 0.0;
  std::string best_connected_id;
};

/// Fits u on B_radius(center), after removing the weighted average at each
/// node, by the profiles h(y2, y1 b) (connected cones, b in B(p) orthogonal to
/// tau, rotated by theta) and by degenerate extensions (cones with point
/// contacts). Returns the best fit.
FitResult fit_cone(const GridSolution& sol, Point2 center, double radius, std::span<const Cone1D> catalogue,
                   const FitOptions& options = {});

/// Basis of B(p) orthogonal to tau (N-2 vectors for p0).
std::vector<BranchVector> fit_basis(const Cone1D& cone);

enum class RateModel { Log, Power };

struct RateFit {
  std::vector<double> radii;
  std::vector<double> epsilons;
  double log_constant = 0.0;
  double log_residual = 0.0;
  double power_constant = 0.0;
  double power_exponent = 0.0;
  double power_residual = 0.0;
  RateModel preferred = RateModel::Log;
};

/// Fits eps = C / (-log r) and eps = C r^alpha in log space (RMS residuals).
/// Needs >= 5 radii in (0, 1) spanning >= 2 decades; throws InsufficientData.
RateFit rate_fit(std::span<const double> radii, std::span<const double> epsilons);

struct TangentScale {
  double radius = 0.0;  // annulus [radius, 2 radius]
  double angle = 0.0;   // tangent direction in (-pi/2, pi/2]
  std::size_t vertices = 0;
};

struct CurveDiagnostic {
  std::size_t pair = 1;
  std::vector<TangentScale> scales;
  /// max |angle(r) - angle(2r)| over consecutive dyadic scales.
  double oscillation = 0.0;
};

struct RegularPointReport {
  FitResult fit;
  double epsilon0 = 0.0;
  std::vector<CurveDiagnostic> curves;
};

/// Checks |u - p0(rotated)| <= eps0 r^2 on B_radius(center); throws NotRegular
/// otherwise. eps0 <= 0 selects 0.01 (f_1 - f_N).
RegularPointReport regular_point_probe(const GridSolution& sol, Point2 center, double radius, double epsilon0 = 0.0);

}  // namespace nmembrane
