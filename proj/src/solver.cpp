#include "nmembrane/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "nmembrane/error.hpp"
#include "nmembrane/projection.hpp"

namespace nmembrane {

// ---------------------------------------------------------------------------
// Grid

Grid Grid::interval(double a, double b, std::size_t cells) {
  if (!(b > a) || cells < 2) throw Error(ErrorKind::InvalidArgument, "interval needs a < b and >= 2 cells");
  Grid g;
  g.dimension = 1;
  g.nx = cells + 1;
  g.ny = 1;
  g.h = (b - a) / static_cast<double>(cells);
  g.x0 = a;
  g.y0 = 0.0;
  g.kind.assign(g.nx, NodeKind::Interior);
  g.kind.front() = NodeKind::Boundary;
  g.kind.back() = NodeKind::Boundary;
  return g;
}

Grid Grid::rectangle(double xa, double xb, double ya, double yb, double h) {
  if (!(h > 0.0) || !(xb > xa) || !(yb > ya)) throw Error(ErrorKind::InvalidArgument, "bad rectangle");
  Grid g;
  g.dimension = 2;
  g.h = h;
  g.nx = static_cast<std::size_t>(std::llround((xb - xa) / h)) + 1;
  g.ny = static_cast<std::size_t>(std::llround((yb - ya) / h)) + 1;
  if (g.nx < 3 || g.ny < 3) throw Error(ErrorKind::InvalidArgument, "rectangle too small for spacing");
  g.x0 = xa;
  g.y0 = ya;
  g.kind.assign(g.size(), NodeKind::Interior);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny) g.kind[g.index(i, j)] = NodeKind::Boundary;
  return g;
}

Grid Grid::disk(double cx, double cy, double radius, double h) {
  if (!(h > 0.0) || !(radius > 2.0 * h)) throw Error(ErrorKind::InvalidArgument, "disk radius must exceed 2h");
  Grid g;
  g.dimension = 2;
  g.h = h;
  const std::size_t m = static_cast<std::size_t>(std::ceil(radius / h)) + 1;
  g.nx = 2 * m + 1;
  g.ny = 2 * m + 1;
  g.x0 = cx - h * static_cast<double>(m);
  g.y0 = cy - h * static_cast<double>(m);
  g.kind.assign(g.size(), NodeKind::Exterior);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double dx = g.x(i) - cx;
      const double dy = g.y(j) - cy;
      if (dx * dx + dy * dy < radius * radius) g.kind[g.index(i, j)] = NodeKind::Interior;
    }
  for (std::size_t j = 1; j + 1 < g.ny; ++j)
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      const std::size_t n = g.index(i, j);
      if (g.kind[n] != NodeKind::Exterior) continue;
      if (g.kind[n - 1] == NodeKind::Interior || g.kind[n + 1] == NodeKind::Interior ||
          g.kind[n - g.nx] == NodeKind::Interior || g.kind[n + g.nx] == NodeKind::Interior)
        g.kind[n] = NodeKind::Boundary;
    }
  return g;
}

std::size_t Grid::count(NodeKind k) const { return static_cast<std::size_t>(std::count(kind.begin(), kind.end(), k)); }

std::size_t Grid::neighbours(std::size_t n, std::size_t out[4]) const noexcept {
  out[0] = n - 1;
  out[1] = n + 1;
  if (dimension == 1) return 2;
  out[2] = n - nx;
  out[3] = n + nx;
  return 4;
}

bool Grid::same_layout(const Grid& o) const noexcept {
  return dimension == o.dimension && nx == o.nx && ny == o.ny && h == o.h && x0 == o.x0 && y0 == o.y0 &&
         kind == o.kind;
}

// ---------------------------------------------------------------------------
// Sampling

bool GridSolution::can_sample(double x, double y) const {
  const double fx = (x - grid.x0) / grid.h;
  if (fx < -1e-9 || fx > static_cast<double>(grid.nx - 1) + 1e-9) return false;
  const std::size_t i = std::min(static_cast<std::size_t>(std::max(fx, 0.0)), grid.nx - 2);
  if (grid.dimension == 1) return grid.active(i) && grid.active(i + 1);
  const double fy = (y - grid.y0) / grid.h;
  if (fy < -1e-9 || fy > static_cast<double>(grid.ny - 1) + 1e-9) return false;
  const std::size_t j = std::min(static_cast<std::size_t>(std::max(fy, 0.0)), grid.ny - 2);
  const std::size_t n = grid.index(i, j);
  return grid.active(n) && grid.active(n + 1) && grid.active(n + grid.nx) && grid.active(n + grid.nx + 1);
}

void GridSolution::sample_all(double x, double y, std::span<double> out) const {
  if (!can_sample(x, y)) throw Error(ErrorKind::OutOfDomain, "sample point outside the active grid");
  const std::size_t nm = spec.size();
  const double fx = std::clamp((x - grid.x0) / grid.h, 0.0, static_cast<double>(grid.nx - 1));
  const std::size_t i = std::min(static_cast<std::size_t>(fx), grid.nx - 2);
  const double tx = fx - static_cast<double>(i);
  if (grid.dimension == 1) {
    for (std::size_t k = 0; k < nm; ++k) out[k] = (1.0 - tx) * at(i, k) + tx * at(i + 1, k);
    return;
  }
  const double fy = std::clamp((y - grid.y0) / grid.h, 0.0, static_cast<double>(grid.ny - 1));
  const std::size_t j = std::min(static_cast<std::size_t>(fy), grid.ny - 2);
  const double ty = fy - static_cast<double>(j);
  const std::size_t n = grid.index(i, j);
  for (std::size_t k = 0; k < nm; ++k) {
    const double lower = (1.0 - tx) * at(n, k) + tx * at(n + 1, k);
    const double upper = (1.0 - tx) * at(n + grid.nx, k) + tx * at(n + grid.nx + 1, k);
    out[k] = (1.0 - ty) * lower + ty * upper;
  }
}

double GridSolution::sample(std::size_t k, double x, double y) const {
  std::vector<double> v(spec.size());
  sample_all(x, y, v);
  return v[k];
}

double discrete_energy(const GridSolution& sol) {
  const Grid& g = sol.grid;
  const std::size_t nm = sol.membranes();
  const double hd = g.dimension == 1 ? g.h : g.h * g.h;
  double e = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!g.active(n)) continue;
    // Each edge counted once from its lower-index endpoint.
    std::size_t fwd[2] = {n + 1, n + g.nx};
    const std::size_t edges = g.dimension == 1 ? 1 : 2;
    for (std::size_t a = 0; a < edges; ++a) {
      const std::size_t m = fwd[a];
      if (a == 0 && (n % g.nx) + 1 >= g.nx) continue;
      if (m >= g.size() || !g.active(m)) continue;
      if (!g.interior(n) && !g.interior(m)) continue;
      for (std::size_t k = 0; k < nm; ++k) {
        const double d = (sol.at(m, k) - sol.at(n, k)) / g.h;
        e += sol.spec.weights[k] * 0.5 * d * d * hd;
      }
    }
    if (g.interior(n))
      for (std::size_t k = 0; k < nm; ++k) e += sol.spec.weights[k] * sol.spec.forces[k] * sol.at(n, k) * hd;
  }
  return e;
}

// ---------------------------------------------------------------------------
// Problem setup

GridSolution make_problem(const ProblemSpec& spec, const Grid& grid, const FieldFunction& data) {
  validate(spec);
  if (grid.kind.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "grid masks inconsistent");
  GridSolution sol;
  sol.grid = grid;
  sol.spec = spec;
  const std::size_t nm = spec.size();
  sol.u.assign(grid.size() * nm, 0.0);
  for (std::size_t j = 0; j < grid.ny; ++j)
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const std::size_t n = grid.index(i, j);
      if (!grid.active(n)) continue;
      data(grid.x(i), grid.dimension == 1 ? 0.0 : grid.y(j), std::span<double>(sol.u.data() + n * nm, nm));
    }
  double scale = 0.0;
  for (double v : sol.u) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1.0);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (grid.kind[n] != NodeKind::Boundary) continue;
    for (std::size_t k = 0; k + 1 < nm; ++k)
      if (sol.at(n, k) < sol.at(n, k + 1) - tol)
        throw Error(ErrorKind::UnorderedBoundary, "boundary data violate u_" + std::to_string(k + 1) +
                                                      " >= u_" + std::to_string(k + 2) + " at node " +
                                                      std::to_string(n));
  }
  return sol;
}

double laplacian(const GridSolution& sol, std::size_t node, std::size_t k) {
  std::size_t nb[4];
  const std::size_t c = sol.grid.neighbours(node, nb);
  double s = 0.0;
  for (std::size_t a = 0; a < c; ++a) s += sol.at(nb[a], k);
  return (s - static_cast<double>(c) * sol.at(node, k)) / (sol.grid.h * sol.grid.h);
}

namespace {

double domain_extent(const Grid& g) {
  const double lx = g.h * static_cast<double>(g.nx - 1);
  const double ly = g.dimension == 1 ? 0.0 : g.h * static_cast<double>(g.ny - 1);
  return std::max(lx, ly);
}

double domain_diameter(const Grid& g) {
  const double lx = g.h * static_cast<double>(g.nx - 1);
  const double ly = g.dimension == 1 ? 0.0 : g.h * static_cast<double>(g.ny - 1);
  return std::hypot(lx, ly);
}

/// Interior nodes split by colour, (i + j) mod 2.
struct Schedule {
  std::vector<std::size_t> colour[2];
};

Schedule make_schedule(const Grid& g) {
  Schedule s;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t n = g.index(i, j);
      if (g.interior(n)) s.colour[(i + j) % 2].push_back(n);
    }
  return s;
}

/// Runs body(begin, end, slot) over [0, count) in `threads` contiguous chunks.
/// Chunks write disjoint nodes of one colour, so the result does not depend
/// on the thread count.
template <class Body>
void parallel_chunks(std::size_t count, unsigned threads, Body&& body) {
  if (threads <= 1 || count < 4096) {
    body(std::size_t{0}, count, 0U);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t b = std::min(count, chunk * t);
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e, t] { body(b, e, t); });
  }
  for (auto& th : pool) th.join();
}

/// Plain SOR for Delta_h v = 0 on every membrane, started from the boundary
/// mean so that adding c*1 to the data shifts every iterate by c.
void harmonic_extension(GridSolution& sol, const Schedule& sched, double relaxation) {
  const Grid& g = sol.grid;
  const std::size_t nm = sol.membranes();
  const double inv = 1.0 / static_cast<double>(2 * g.dimension);
  for (std::size_t k = 0; k < nm; ++k) {
    double mean = 0.0;
    double scale = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < g.size(); ++n)
      if (g.kind[n] == NodeKind::Boundary) {
        mean += sol.at(n, k);
        scale = std::max(scale, std::abs(sol.at(n, k)));
        ++count;
      }
    mean /= static_cast<double>(std::max<std::size_t>(count, 1));
    for (std::size_t n = 0; n < g.size(); ++n)
      if (g.interior(n)) sol.at(n, k) = mean;
    // Iterate to roundoff: stop once the change stalls at the noise floor.
    const double floor = 1e-11 * std::max(scale, 1e-300);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_sweep = 0;
    std::size_t nb[4];
    for (std::size_t sweep = 0; sweep < 200000; ++sweep) {
      double change = 0.0;
      for (const auto& nodes : sched.colour) {
        for (std::size_t n : nodes) {
          const std::size_t c = g.neighbours(n, nb);
          double s = 0.0;
          for (std::size_t a = 0; a < c; ++a) s += sol.at(nb[a], k);
          double& v = sol.at(n, k);
          const double next = v + relaxation * (s * inv - v);
          change = std::max(change, std::abs(next - v));
          v = next;
        }
      }
      if (change == 0.0) break;
      if (change < best) {
        best = change;
        best_sweep = sweep;
      } else if (best < floor && sweep - best_sweep > 50) {
        break;
      }
    }
  }
}

}  // namespace

void iterate(GridSolution& sol, const SolverOptions& options) {
  const Grid& g = sol.grid;
  const std::size_t nm = sol.membranes();
  const ProblemSpec& spec = sol.spec;
  const double diam = domain_diameter(g);
  double tol = options.tol;
  if (!(tol > 0.0)) {
    double scale = spec.max_abs_force() * diam * diam;
    if (!(scale > 0.0)) {
      for (double v : sol.u) scale = std::max(scale, std::abs(v));
      scale = std::max(scale, 1.0);
    }
    tol = 1e-10 * scale;
  }
  double relaxation = options.relaxation;
  if (!(relaxation > 0.0)) relaxation = 2.0 / (1.0 + std::sin(M_PI * g.h / domain_extent(g)));
  sol.stats.tol = tol;
  sol.stats.relaxation = relaxation;
  sol.stats.converged = false;

  const Schedule sched = make_schedule(g);
  const unsigned threads = std::max(1U, options.threads);
  const double inv = 1.0 / static_cast<double>(2 * g.dimension);
  const double h2 = g.h * g.h;
  std::vector<double> forcing(nm);
  for (std::size_t k = 0; k < nm; ++k) forcing[k] = h2 * spec.forces[k];

  struct Workspace {
    IsotonicProjector projector;
    std::vector<double> target, relaxed, candidate;
    double change = 0.0;
  };
  std::vector<Workspace> ws(threads);
  for (auto& w : ws) {
    w.projector.reserve(nm);
    w.target.resize(nm);
    w.relaxed.resize(nm);
    w.candidate.resize(nm);
  }

  auto update = [&](const std::vector<std::size_t>& nodes, std::size_t b, std::size_t e, unsigned slot) {
    Workspace& w = ws[slot];
    std::size_t nb[4];
    for (std::size_t idx = b; idx < e; ++idx) {
      const std::size_t n = nodes[idx];
      const std::size_t c = g.neighbours(n, nb);
      double* un = sol.u.data() + n * nm;
      double before = 0.0;
      double after = 0.0;
      for (std::size_t k = 0; k < nm; ++k) {
        double s = 0.0;
        for (std::size_t a = 0; a < c; ++a) s += sol.u[nb[a] * nm + k];
        w.target[k] = (s - forcing[k]) * inv;
        w.relaxed[k] = un[k] + relaxation * (w.target[k] - un[k]);
        const double d = un[k] - w.target[k];
        before += spec.weights[k] * d * d;
      }
      w.projector.project(w.relaxed, spec.weights, w.candidate);
      for (std::size_t k = 0; k < nm; ++k) {
        const double d = w.candidate[k] - w.target[k];
        after += spec.weights[k] * d * d;
      }
      // Over-relaxation may overshoot through the constraint; fall back to
      // the exact local minimizer so the energy never increases.
      if (after > before) w.projector.project(w.target, spec.weights, w.candidate);
      for (std::size_t k = 0; k < nm; ++k) {
        w.change = std::max(w.change, std::abs(w.candidate[k] - un[k]));
        un[k] = w.candidate[k];
      }
    }
  };

  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (auto& w : ws) w.change = 0.0;
    for (const auto& nodes : sched.colour)
      parallel_chunks(nodes.size(), threads,
                      [&](std::size_t b, std::size_t e, unsigned slot) { update(nodes, b, e, slot); });
    double change = 0.0;
    for (const auto& w : ws) change = std::max(change, w.change);
    ++sol.stats.sweeps;
    sol.stats.last_change = change;
    if (options.track_energy) sol.stats.energy.push_back(discrete_energy(sol));
    if (change <= tol) {
      sol.stats.converged = true;
      return;
    }
  }
}

GridSolution solve_nothrow(const ProblemSpec& spec, const Grid& grid, const FieldFunction& data,
                           const SolverOptions& options) {
  GridSolution sol = make_problem(spec, grid, data);
  const Schedule sched = make_schedule(sol.grid);
  double relaxation = options.relaxation;
  if (!(relaxation > 0.0)) relaxation = 2.0 / (1.0 + std::sin(M_PI * grid.h / domain_extent(grid)));
  harmonic_extension(sol, sched, relaxation);
  IsotonicProjector projector(spec.size());
  const std::size_t nm = spec.size();
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!grid.interior(n)) continue;
    std::span<double> v(sol.u.data() + n * nm, nm);
    projector.project(v, spec.weights, v);
  }
  if (options.track_energy) sol.stats.energy.push_back(discrete_energy(sol));
  iterate(sol, options);
  return sol;
}

GridSolution solve(const ProblemSpec& spec, const Grid& grid, const FieldFunction& data,
                   const SolverOptions& options) {
  GridSolution sol = solve_nothrow(spec, grid, data, options);
  if (!sol.stats.converged)
    throw Error(ErrorKind::NotConverged, "max nodal change " + std::to_string(sol.stats.last_change) +
                                             " after " + std::to_string(sol.stats.sweeps) + " sweeps");
  return sol;
}

// ---------------------------------------------------------------------------
// Residuals

double default_coincidence_tol(const GridSolution& sol) {
  return 4.0 * sol.grid.h * sol.grid.h * sol.spec.max_abs_force();
}

ResidualReport residual(const GridSolution& sol, double coincidence_tol, const std::vector<bool>* exclude) {
  const Grid& g = sol.grid;
  const ProblemSpec& spec = sol.spec;
  const std::size_t nm = sol.membranes();
  ResidualReport rep;
  rep.coincidence_tol = coincidence_tol;
  const double inv = 1.0 / static_cast<double>(2 * g.dimension);
  const double h2 = g.h * g.h;
  const double fmax = std::max(spec.max_abs_force(), 1e-300);
  IsotonicProjector projector(nm);
  std::vector<double> target(nm), projected(nm), lap(nm);
  std::size_t nb[4];

  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!g.active(n)) continue;
    for (std::size_t k = 0; k + 1 < nm; ++k)
      if (sol.at(n, k) < sol.at(n, k + 1)) rep.ordering_ok = false;
    if (!g.interior(n)) continue;
    const std::size_t c = g.neighbours(n, nb);
    double wsum = 0.0;
    for (std::size_t k = 0; k < nm; ++k) {
      double s = 0.0;
      for (std::size_t a = 0; a < c; ++a) s += sol.at(nb[a], k);
      target[k] = (s - h2 * spec.forces[k]) * inv;
      lap[k] = (s - static_cast<double>(c) * sol.at(n, k)) / h2;
      wsum += spec.weights[k] * lap[k];
      rep.laplacian_bound_ratio = std::max(rep.laplacian_bound_ratio, std::abs(lap[k]) / fmax);
    }
    rep.weighted_laplacian_sum = std::max(rep.weighted_laplacian_sum, std::abs(wsum));
    projector.project(target, spec.weights, projected);
    for (std::size_t k = 0; k < nm; ++k)
      rep.kkt_residual = std::max(rep.kkt_residual, std::abs(sol.at(n, k) - projected[k]));

    if (exclude && (*exclude)[n]) continue;
    // Maximal groups of consecutive membranes within coincidence_tol.
    std::size_t lo = 0;
    for (std::size_t k = 0; k < nm; ++k) {
      const bool ends = k + 1 == nm || sol.at(n, k) - sol.at(n, k + 1) >= coincidence_tol;
      if (!ends) continue;
      const GroupIndex group{lo + 1, k + 1};
      double wl = 0.0;
      double w = 0.0;
      for (std::size_t i = lo; i <= k; ++i) {
        wl += spec.weights[i] * lap[i];
        w += spec.weights[i];
      }
      const double r = std::abs(wl / w - group_force(spec, group));
      auto it = std::find_if(rep.region_residuals.begin(), rep.region_residuals.end(), [&](const RegionResidual& rr) {
        return rr.group.lo == group.lo && rr.group.hi == group.hi;
      });
      if (it == rep.region_residuals.end()) {
        rep.region_residuals.push_back({group, r, 1});
      } else {
        it->max_residual = std::max(it->max_residual, r);
        ++it->nodes;
      }
      lo = k + 1;
    }
  }
  std::sort(rep.region_residuals.begin(), rep.region_residuals.end(), [](const auto& a, const auto& b) {
    return a.group.lo != b.group.lo ? a.group.lo < b.group.lo : a.group.hi < b.group.hi;
  });
  return rep;
}

MaxPrincipleVerdict check_max_principle(const GridSolution& a, const GridSolution& b, double tol) {
  if (!a.grid.same_layout(b.grid) || a.membranes() != b.membranes())
    throw Error(ErrorKind::IncompatibleGrids, "solutions live on different grids");
  MaxPrincipleVerdict v;
  v.worst_violation = -std::numeric_limits<double>::infinity();
  const std::size_t nm = a.membranes();
  for (std::size_t n = 0; n < a.grid.size(); ++n) {
    if (!a.grid.active(n)) continue;
    double sq = 0.0;
    for (std::size_t k = 0; k < nm; ++k) {
      const double d = a.at(n, k) - b.at(n, k);
      sq += a.spec.weights[k] * d * d;
      if (-d > v.worst_violation) {
        v.worst_violation = -d;
        v.worst_node = n;
      }
    }
    if (a.grid.interior(n))
      v.interior_max_sq = std::max(v.interior_max_sq, sq);
    else
      v.boundary_max_sq = std::max(v.boundary_max_sq, sq);
  }
  v.holds = v.worst_violation <= tol;
  return v;
}

}  // namespace nmembrane
