#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nmembrane/problem.hpp"

namespace nmembrane {

enum class NodeKind : std::uint8_t { Exterior = 0, Boundary = 1, Interior = 2 };

/// Uniform node grid on [x0, x0 + (nx-1)h] x [y0, y0 + (ny-1)h]. In 1D ny = 1.
struct Grid {
  int dimension = 2;
  std::size_t nx = 0;
  std::size_t ny = 1;
  double h = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  std::vector<NodeKind> kind;

  static Grid interval(double a, double b, std::size_t cells);
  static Grid rectangle(double xa, double xb, double ya, double yb, double h);
  /// Nodes strictly inside the open disk are interior; non-interior nodes with
  /// an interior 4-neighbour carry Dirichlet data.
  static Grid disk(double cx, double cy, double radius, double h);

  std::size_t size() const noexcept { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx + i; }
  double x(std::size_t i) const noexcept { return x0 + h * static_cast<double>(i); }
  double y(std::size_t j) const noexcept { return y0 + h * static_cast<double>(j); }
  bool interior(std::size_t n) const noexcept { return kind[n] == NodeKind::Interior; }
  bool active(std::size_t n) const noexcept { return kind[n] != NodeKind::Exterior; }
  std::size_t count(NodeKind k) const;
  /// Interior-node 4-neighbours (2 in 1D), valid only for interior nodes.
  std::size_t neighbours(std::size_t n, std::size_t out[4]) const noexcept;
  bool same_layout(const Grid& other) const noexcept;
};

/// N values at the point (x, y); out has length N.
using FieldFunction = std::function<void(double x, double y, std::span<double> out)>;

struct SolverOptions {
  /// Max nodal change per sweep; <= 0 selects 1e-10 |f| L^2.
  double tol = 0.0;
  std::size_t max_sweeps = 2000000;
  /// Over-relaxation factor; <= 0 selects 2 / (1 + sin(pi h / L)).
  double relaxation = 0.0;
  unsigned threads = 1;
  bool track_energy = false;
};

struct SolveStats {
  std::size_t sweeps = 0;
  double last_change = 0.0;
  double tol = 0.0;
  double relaxation = 1.0;
  bool converged = false;
  /// Energy after every sweep when track_energy is set.
  std::vector<double> energy;
};

/// N fields stored node-major: node n occupies [n*N, (n+1)*N).
struct GridSolution {
  Grid grid;
  ProblemSpec spec;
  std::vector<double> u;
  SolveStats stats;

  std::size_t membranes() const noexcept { return spec.size(); }
  double& at(std::size_t node, std::size_t k) { return u[node * spec.size() + k]; }
  double at(std::size_t node, std::size_t k) const { return u[node * spec.size() + k]; }
  std::span<const double> node(std::size_t n) const { return {u.data() + n * spec.size(), spec.size()}; }

  /// Bilinear interpolation of membrane k; throws OutOfDomain outside the
  /// active node set.
  double sample(std::size_t k, double x, double y) const;
  void sample_all(double x, double y, std::span<double> out) const;
  bool can_sample(double x, double y) const;
};

/// Energy sum_k omega_k sum_cells (1/2 |grad_h u_k|^2 + f_k u_k) h^d.
double discrete_energy(const GridSolution& sol);

/// Fills boundary (and, for convenience, all active) nodes from `data`.
/// Throws UnorderedBoundary if the data violate the ordering on the boundary.
GridSolution make_problem(const ProblemSpec& spec, const Grid& grid, const FieldFunction& data);

/// Projected SOR with the exact per-node isotonic projection, red-black order.
/// Throws NotConverged carrying no payload; use solve_nothrow to get the
/// best iterate.
GridSolution solve(const ProblemSpec& spec, const Grid& grid, const FieldFunction& data,
                   const SolverOptions& options = {});

/// Same as solve but never throws NotConverged; inspect stats.converged.
GridSolution solve_nothrow(const ProblemSpec& spec, const Grid& grid, const FieldFunction& data,
                           const SolverOptions& options = {});

/// Continues iterating on `sol` in place (its boundary values fixed).
void iterate(GridSolution& sol, const SolverOptions& options);

/// Discrete Laplacian of membrane k at an interior node.
double laplacian(const GridSolution& sol, std::size_t node, std::size_t k);

struct RegionResidual {
  GroupIndex group;
  double max_residual = 0.0;
  std::size_t nodes = 0;
};

struct ResidualReport {
  /// max over interior nodes of |u - P(u_hat)| in value units.
  double kkt_residual = 0.0;
  /// Per maximal coincidence group, max |Delta_h u_I - f_I|.
  std::vector<RegionResidual> region_residuals;
  /// max |sum omega_k Delta_h u_k| over interior nodes.
  double weighted_laplacian_sum = 0.0;
  /// max |Delta_h u_m| / max|f|.
  double laplacian_bound_ratio = 0.0;
  bool ordering_ok = true;
  double coincidence_tol = 0.0;
};

double default_coincidence_tol(const GridSolution& sol);

/// `exclude` (optional, one flag per node) removes nodes from the region
/// residuals, e.g. a neighbourhood of the free boundaries.
ResidualReport residual(const GridSolution& sol, double coincidence_tol,
                        const std::vector<bool>* exclude = nullptr);

struct MaxPrincipleVerdict {
  bool holds = true;
  /// max over nodes and membranes of (u_b - u_a), positive means violation.
  double worst_violation = 0.0;
  std::size_t worst_node = 0;
  /// max of sum omega (u_a - u_b)^2 over interior / boundary nodes.
  double interior_max_sq = 0.0;
  double boundary_max_sq = 0.0;
};

/// Checks u_a >= u_b - tol everywhere. Throws IncompatibleGrids.
MaxPrincipleVerdict check_max_principle(const GridSolution& a, const GridSolution& b, double tol);

struct GrowthSample {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  double ratio = 0.0;  // max_{B_r}(u_k - u_{k+1}) / r^2
};

struct GrowthReport {
  std::size_t pair = 1;
  std::vector<GrowthSample> samples;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

/// Samples free boundary points of pair k (1-based) and measures the
/// quadratic growth ratio over `radii`. Throws EmptyFreeBoundary.
GrowthReport quadratic_growth_probe(const GridSolution& sol, std::size_t k, std::span<const double> radii,
                                    std::size_t max_points = 16);

}  // namespace nmembrane
