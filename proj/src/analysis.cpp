#include "nmembrane/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_map>

#include <Eigen/Dense>

#include "nmembrane/error.hpp"

namespace nmembrane {

// ---------------------------------------------------------------------------
// Contours

std::size_t FreeBoundaryCurve::vertex_count() const {
  std::size_t c = 0;
  for (const auto& p : polylines) c += p.size();
  return c;
}

std::vector<Point2> FreeBoundaryCurve::vertices() const {
  std::vector<Point2> out;
  for (const auto& p : polylines) out.insert(out.end(), p.begin(), p.end());
  return out;
}

namespace {

struct Segment {
  std::size_t a;
  std::size_t b;
};

}  // namespace

std::vector<std::vector<Point2>> contour(const Grid& g, std::span<const double> field, double level) {
  std::vector<std::vector<Point2>> lines;
  if (g.dimension == 1) {
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      if (!g.active(i) || !g.active(i + 1)) continue;
      const double a = field[i] - level;
      const double b = field[i + 1] - level;
      if ((a > 0.0) == (b > 0.0)) continue;
      const double t = a / (a - b);
      lines.push_back({Point2{g.x(i) + t * g.h, 0.0}});
    }
    return lines;
  }

  // Edge ids: 2n is the edge (i,j)-(i+1,j), 2n+1 the edge (i,j)-(i,j+1).
  auto edge_point = [&](std::size_t e) {
    const std::size_t n = e / 2;
    const std::size_t m = (e % 2 == 0) ? n + 1 : n + g.nx;
    const double a = field[n] - level;
    const double b = field[m] - level;
    const double t = a / (a - b);
    const std::size_t i = n % g.nx;
    const std::size_t j = n / g.nx;
    if (e % 2 == 0) return Point2{g.x(i) + t * g.h, g.y(j)};
    return Point2{g.x(i), g.y(j) + t * g.h};
  };

  std::vector<Segment> segs;
  for (std::size_t j = 0; j + 1 < g.ny; ++j)
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      const std::size_t n00 = g.index(i, j);
      const std::size_t n10 = n00 + 1;
      const std::size_t n01 = n00 + g.nx;
      const std::size_t n11 = n01 + 1;
      if (!g.active(n00) || !g.active(n10) || !g.active(n01) || !g.active(n11)) continue;
      const bool s0 = field[n00] > level;
      const bool s1 = field[n10] > level;
      const bool s2 = field[n11] > level;
      const bool s3 = field[n01] > level;
      const std::size_t e0 = 2 * n00;      // bottom
      const std::size_t e1 = 2 * n10 + 1;  // right
      const std::size_t e2 = 2 * n01;      // top
      const std::size_t e3 = 2 * n00 + 1;  // left
      std::size_t crossed[4];
      std::size_t c = 0;
      if (s0 != s1) crossed[c++] = e0;
      if (s1 != s2) crossed[c++] = e1;
      if (s2 != s3) crossed[c++] = e2;
      if (s3 != s0) crossed[c++] = e3;
      if (c == 2) {
        segs.push_back({crossed[0], crossed[1]});
      } else if (c == 4) {
        const double centre = 0.25 * (field[n00] + field[n10] + field[n01] + field[n11]) - level;
        // Saddle: the centre decides which diagonal is connected.
        if ((centre > 0.0) == s0) {
          segs.push_back({e0, e1});
          segs.push_back({e2, e3});
        } else {
          segs.push_back({e3, e0});
          segs.push_back({e1, e2});
        }
      }
    }

  std::unordered_map<std::size_t, std::vector<std::size_t>> by_edge;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_edge[segs[s].a].push_back(s);
    by_edge[segs[s].b].push_back(s);
  }
  std::vector<bool> used(segs.size(), false);

  auto walk = [&](std::size_t s, std::size_t start_edge) {
    std::vector<Point2> line{edge_point(start_edge)};
    std::size_t edge = start_edge;
    while (true) {
      used[s] = true;
      const std::size_t next_edge = segs[s].a == edge ? segs[s].b : segs[s].a;
      line.push_back(edge_point(next_edge));
      edge = next_edge;
      std::size_t next = segs.size();
      for (std::size_t t : by_edge[edge])
        if (!used[t]) {
          next = t;
          break;
        }
      if (next == segs.size()) break;
      s = next;
    }
    return line;
  };

  // Open curves first, starting at edges used by a single segment.
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    if (by_edge[segs[s].a].size() == 1)
      lines.push_back(walk(s, segs[s].a));
    else if (by_edge[segs[s].b].size() == 1)
      lines.push_back(walk(s, segs[s].b));
  }
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s]) lines.push_back(walk(s, segs[s].a));
  return lines;
}

namespace {

std::vector<double> pair_difference(const GridSolution& sol, std::size_t k) {
  if (k < 1 || k >= sol.membranes())
    throw Error(ErrorKind::EmptyFreeBoundary, "pair " + std::to_string(k) + " does not exist for N=" +
                                                  std::to_string(sol.membranes()));
  std::vector<double> d(sol.grid.size(), 0.0);
  for (std::size_t n = 0; n < d.size(); ++n)
    if (sol.grid.active(n)) d[n] = sol.at(n, k - 1) - sol.at(n, k);
  return d;
}

}  // namespace

FreeBoundaryCurve extract_free_boundary(const GridSolution& sol, std::size_t k, double tol) {
  const std::vector<double> d = pair_difference(sol, k);
  FreeBoundaryCurve curve;
  curve.pair = k;
  curve.tol = tol;
  curve.polylines = contour(sol.grid, d, tol);
  if (curve.polylines.empty())
    throw Error(ErrorKind::EmptyFreeBoundary, "no free boundary for pair " + std::to_string(k));
  return curve;
}

FreeBoundaryCurve contact_boundary(const GridSolution& sol, std::size_t k, double tol) {
  std::vector<double> g = pair_difference(sol, k);
  for (double& v : g) v = std::sqrt(std::max(v, 0.0));
  const double level = std::sqrt(tol);
  FreeBoundaryCurve curve;
  curve.pair = k;
  curve.tol = tol;
  curve.polylines = contour(sol.grid, g, level);
  if (curve.polylines.empty())
    throw Error(ErrorKind::EmptyFreeBoundary, "no free boundary for pair " + std::to_string(k));

  const Grid& grid = sol.grid;
  for (auto& line : curve.polylines)
    for (Point2& p : line) {
      const double fx = (p[0] - grid.x0) / grid.h;
      std::size_t i = std::min(static_cast<std::size_t>(std::max(std::floor(fx), 0.0)), grid.nx - 2);
      double gx = 0.0;
      double gy = 0.0;
      if (grid.dimension == 1) {
        gx = (g[i + 1] - g[i]) / grid.h;
      } else {
        const double fy = (p[1] - grid.y0) / grid.h;
        std::size_t j = std::min(static_cast<std::size_t>(std::max(std::floor(fy), 0.0)), grid.ny - 2);
        // A vertex on a cell edge belongs to two cells; use one fully active.
        auto cell_ok = [&](std::size_t ci, std::size_t cj) {
          const std::size_t n = grid.index(ci, cj);
          return grid.active(n) && grid.active(n + 1) && grid.active(n + grid.nx) && grid.active(n + grid.nx + 1);
        };
        if (!cell_ok(i, j)) {
          if (i > 0 && std::abs(fx - std::round(fx)) < 1e-9 && cell_ok(i - 1, j))
            --i;
          else if (j > 0 && std::abs(fy - std::round(fy)) < 1e-9 && cell_ok(i, j - 1))
            --j;
          else
            continue;
        }
        const double tx = std::clamp(fx - static_cast<double>(i), 0.0, 1.0);
        const double ty = std::clamp(fy - static_cast<double>(j), 0.0, 1.0);
        const std::size_t n = grid.index(i, j);
        const double g00 = g[n], g10 = g[n + 1], g01 = g[n + grid.nx], g11 = g[n + grid.nx + 1];
        gx = ((1.0 - ty) * (g10 - g00) + ty * (g11 - g01)) / grid.h;
        gy = ((1.0 - tx) * (g01 - g00) + tx * (g11 - g10)) / grid.h;
      }
      const double norm2 = gx * gx + gy * gy;
      if (!(norm2 > 0.0)) continue;
      const double step = level / norm2;
      p[0] -= step * gx;
      p[1] -= step * gy;
    }
  return curve;
}

// ---------------------------------------------------------------------------
// Weiss energy

namespace {

constexpr int kSubsample = 8;

void require_ball(const GridSolution& sol, Point2 c, double r) {
  const Grid& g = sol.grid;
  if (!(r > 0.0)) throw Error(ErrorKind::BallOutsideDomain, "radius must be positive");
  if (g.dimension == 1) {
    if (!sol.can_sample(c[0] - r, 0.0) || !sol.can_sample(c[0] + r, 0.0))
      throw Error(ErrorKind::BallOutsideDomain, "ball of radius " + std::to_string(r) + " leaves the domain");
    return;
  }
  const double reach = r + 1.5 * g.h;
  const double lo_x = (c[0] - reach - g.x0) / g.h;
  const double hi_x = (c[0] + reach - g.x0) / g.h;
  const double lo_y = (c[1] - reach - g.y0) / g.h;
  const double hi_y = (c[1] + reach - g.y0) / g.h;
  const long i0 = std::max(0L, static_cast<long>(std::floor(lo_x)));
  const long i1 = std::min(static_cast<long>(g.nx) - 2, static_cast<long>(std::floor(hi_x)));
  const long j0 = std::max(0L, static_cast<long>(std::floor(lo_y)));
  const long j1 = std::min(static_cast<long>(g.ny) - 2, static_cast<long>(std::floor(hi_y)));
  const double half_diag = g.h * M_SQRT1_2;
  for (long j = j0; j <= j1; ++j)
    for (long i = i0; i <= i1; ++i) {
      const double xc = g.x(static_cast<std::size_t>(i)) + 0.5 * g.h;
      const double yc = g.y(static_cast<std::size_t>(j)) + 0.5 * g.h;
      if (std::hypot(xc - c[0], yc - c[1]) - half_diag >= r) continue;
      const std::size_t n = g.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (!g.active(n) || !g.active(n + 1) || !g.active(n + g.nx) || !g.active(n + g.nx + 1))
        throw Error(ErrorKind::BallOutsideDomain, "ball of radius " + std::to_string(r) + " leaves the domain");
    }
  if (c[0] - r < g.x0 || c[0] + r > g.x(g.nx - 1) || c[1] - r < g.y0 || c[1] + r > g.y(g.ny - 1))
    throw Error(ErrorKind::BallOutsideDomain, "ball of radius " + std::to_string(r) + " leaves the grid");
}

double weiss_e(const GridSolution& sol, Point2 c, double r) {
  const Grid& g = sol.grid;
  const ProblemSpec& spec = sol.spec;
  const std::size_t nm = sol.membranes();
  double sum = 0.0;
  if (g.dimension == 1) {
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      const double a = std::max(g.x(i), c[0] - r);
      const double b = std::min(g.x(i + 1), c[0] + r);
      if (b <= a) continue;
      double cell = 0.0;
      for (std::size_t k = 0; k < nm; ++k) {
        const double d = (sol.at(i + 1, k) - sol.at(i, k)) / g.h;
        const double mid = 0.5 * (sol.at(i, k) + sol.at(i + 1, k));
        cell += spec.weights[k] * (0.5 * d * d + spec.forces[k] * mid);
      }
      sum += cell * (b - a);
    }
    return sum / (r * r * r);
  }
  const long i0 = std::max(0L, static_cast<long>(std::floor((c[0] - r - g.x0) / g.h)) - 1);
  const long i1 = std::min(static_cast<long>(g.nx) - 2, static_cast<long>(std::floor((c[0] + r - g.x0) / g.h)) + 1);
  const long j0 = std::max(0L, static_cast<long>(std::floor((c[1] - r - g.y0) / g.h)) - 1);
  const long j1 = std::min(static_cast<long>(g.ny) - 2, static_cast<long>(std::floor((c[1] + r - g.y0) / g.h)) + 1);
  const double half_diag = g.h * M_SQRT1_2;
  const double area = g.h * g.h;
  for (long j = j0; j <= j1; ++j)
    for (long i = i0; i <= i1; ++i) {
      const double x = g.x(static_cast<std::size_t>(i));
      const double y = g.y(static_cast<std::size_t>(j));
      const double dist = std::hypot(x + 0.5 * g.h - c[0], y + 0.5 * g.h - c[1]);
      double frac = 1.0;
      if (dist - half_diag >= r) continue;
      if (dist + half_diag > r) {
        int inside = 0;
        for (int sj = 0; sj < kSubsample; ++sj)
          for (int si = 0; si < kSubsample; ++si) {
            const double px = x + (si + 0.5) * g.h / kSubsample - c[0];
            const double py = y + (sj + 0.5) * g.h / kSubsample - c[1];
            if (px * px + py * py < r * r) ++inside;
          }
        if (inside == 0) continue;
        frac = static_cast<double>(inside) / (kSubsample * kSubsample);
      }
      const std::size_t n = g.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      double cell = 0.0;
      for (std::size_t k = 0; k < nm; ++k) {
        const double u00 = sol.at(n, k), u10 = sol.at(n + 1, k);
        const double u01 = sol.at(n + g.nx, k), u11 = sol.at(n + g.nx + 1, k);
        const double gx = (u10 + u11 - u00 - u01) / (2.0 * g.h);
        const double gy = (u01 + u11 - u00 - u10) / (2.0 * g.h);
        const double mid = 0.25 * (u00 + u10 + u01 + u11);
        cell += spec.weights[k] * (0.5 * (gx * gx + gy * gy) + spec.forces[k] * mid);
      }
      sum += frac * area * cell;
    }
  return sum / (r * r * r * r);
}

double weiss_f(const GridSolution& sol, Point2 c, double r) {
  const std::size_t nm = sol.membranes();
  std::vector<double> v(nm);
  auto sq = [&](double x, double y) {
    sol.sample_all(x, y, v);
    double s = 0.0;
    for (std::size_t k = 0; k < nm; ++k) s += sol.spec.weights[k] * v[k] * v[k];
    return s;
  };
  if (sol.grid.dimension == 1) {
    const double r4 = r * r * r * r;
    return (sq(c[0] - r, 0.0) + sq(c[0] + r, 0.0)) / r4;
  }
  const std::size_t m = 8 * static_cast<std::size_t>(std::ceil(r / sol.grid.h));
  double s = 0.0;
  for (std::size_t q = 0; q < m; ++q) {
    const double phi = 2.0 * M_PI * static_cast<double>(q) / static_cast<double>(m);
    s += sq(c[0] + r * std::cos(phi), c[1] + r * std::sin(phi));
  }
  const double arc = 2.0 * M_PI * r / static_cast<double>(m);
  return s * arc / std::pow(r, 5);
}

}  // namespace

WeissProfile weiss(const GridSolution& sol, Point2 center, std::span<const double> radii) {
  WeissProfile p;
  p.center = center;
  p.h = sol.grid.h;
  p.radii.assign(radii.begin(), radii.end());
  std::sort(p.radii.begin(), p.radii.end());
  for (double r : p.radii) {
    require_ball(sol, center, r);
    const double e = weiss_e(sol, center, r);
    const double f = weiss_f(sol, center, r);
    p.E.push_back(e);
    p.F.push_back(f);
    p.W.push_back(e - f);
  }
  return p;
}

double weiss_of_cone(const Cone1D& cone) {
  double s = 0.0;
  for (bool right : {false, true})
    for (GroupIndex g : side_groups(cone, right)) {
      double w = 0.0;
      for (std::size_t i = g.lo; i <= g.hi; ++i) w += cone.spec.weights[i - 1];
      const double f = group_force(cone.spec, g);
      s += w * f * f;
    }
  return M_PI / 32.0 * s;
}

double calibrate_weiss_slack(const ProblemSpec& spec, double h) {
  const Grid grid = Grid::disk(0.0, 0.0, 1.0, h);
  const std::vector<double> radii = {0.25, 0.4, 0.55, 0.7, 0.85};
  double worst = 0.0;
  std::size_t used = 0;
  for (const Cone1D& cone : enumerate_cones(spec)) {
    if (!cone.connected()) continue;
    if (++used > 8) break;
    const double exact = weiss_of_cone(cone);
    const ConeCoefficients a = cone_coefficients(cone);
    for (double angle : {0.0, 0.37, 1.1}) {
      const Rotation rot(angle);
      auto data = [&](double x, double y, std::span<double> out) {
        double y1 = 0.0;
        double y2 = 0.0;
        rot.to_local(x, y, y1, y2);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = y2 >= 0.0 ? a.plus[k] * y2 * y2 : a.minus[k] * y2 * y2;
      };
      const GridSolution sampled = make_problem(spec, grid, data);
      const WeissProfile p = weiss(sampled, {0.0, 0.0}, radii);
      for (std::size_t i = 0; i < radii.size(); ++i)
        worst = std::max(worst, std::abs(p.W[i] - exact) * radii[i] / h);
    }
  }
  return 2.0 * worst;
}

MonotonicityVerdict monotonicity_check(const WeissProfile& profile, double slack_constant) {
  if (profile.radii.size() < 3) throw Error(ErrorKind::InsufficientData, "monotonicity check needs >= 3 radii");
  MonotonicityVerdict v;
  v.slack_constant = slack_constant;
  v.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < profile.radii.size(); ++i) {
    const double slack = slack_constant * profile.h / profile.radii[i];
    const double excess = profile.W[i] - profile.W[i + 1] - slack;
    if (excess > v.worst_excess) {
      v.worst_excess = excess;
      v.worst_index = i;
    }
  }
  v.monotone = v.worst_excess <= 0.0;
  return v;
}

GridSolution blowup_rescale(const GridSolution& sol, Point2 center, double r, const Grid& target) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "rescaling radius must be positive");
  GridSolution out;
  out.grid = target;
  out.spec = sol.spec;
  const std::size_t nm = sol.membranes();
  out.u.assign(target.size() * nm, 0.0);
  const double inv = 1.0 / (r * r);
  for (std::size_t j = 0; j < target.ny; ++j)
    for (std::size_t i = 0; i < target.nx; ++i) {
      const std::size_t n = target.index(i, j);
      if (!target.active(n)) continue;
      const double x = center[0] + r * target.x(i);
      const double y = target.dimension == 1 ? 0.0 : center[1] + r * target.y(j);
      if (!sol.can_sample(x, y))
        throw Error(ErrorKind::OutOfDomain, "rescaled grid reaches outside the solution domain");
      std::span<double> v(out.u.data() + n * nm, nm);
      sol.sample_all(x, y, v);
      for (double& value : v) value *= inv;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Cone fitting

std::vector<BranchVector> fit_basis(const Cone1D& cone) {
  const std::vector<BranchVector> full = branch_space_basis(cone);
  const BranchVector t = tau(cone);
  const double nt = norm(t);
  std::vector<BranchVector> out;
  for (BranchVector v : full) {
    if (nt > 0.0) v -= (dot(v, t) / (nt * nt)) * t;
    for (const BranchVector& q : out) v -= dot(v, q) * q;
    const double nv = norm(v);
    if (nv > 1e-8) out.push_back((1.0 / nv) * v);
  }
  return out;
}

namespace {

struct Samples {
  std::vector<double> y1;
  std::vector<double> y2;
  std::vector<double> v;  // point-major, N per sample
  std::size_t n = 0;

  std::size_t size() const { return y1.size(); }
};

Samples ball_samples(const GridSolution& sol, Point2 c, double radius) {
  const Grid& g = sol.grid;
  const ProblemSpec& spec = sol.spec;
  Samples s;
  s.n = spec.size();
  const double wsum = spec.total_weight();
  const double inv = 1.0 / (radius * radius);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t n = g.index(i, j);
      if (!g.active(n)) continue;
      const double x = g.x(i) - c[0];
      const double y = g.dimension == 1 ? 0.0 : g.y(j) - c[1];
      if (x * x + y * y > radius * radius * (1.0 + 1e-12)) continue;
      double avg = 0.0;
      for (std::size_t k = 0; k < s.n; ++k) avg += spec.weights[k] * sol.at(n, k);
      avg /= wsum;
      s.y1.push_back(x / radius);
      s.y2.push_back(y / radius);
      for (std::size_t k = 0; k < s.n; ++k) s.v.push_back((sol.at(n, k) - avg) * inv);
    }
  return s;
}

Samples thin(const Samples& s, std::size_t cap) {
  if (s.size() <= cap || cap == 0) return s;
  const std::size_t stride = (s.size() + cap - 1) / cap;
  Samples out;
  out.n = s.n;
  for (std::size_t p = 0; p < s.size(); p += stride) {
    out.y1.push_back(s.y1[p]);
    out.y2.push_back(s.y2[p]);
    for (std::size_t k = 0; k < s.n; ++k) out.v.push_back(s.v[p * s.n + k]);
  }
  return out;
}

/// Golden-section minimization of a unimodal function on [a, b].
double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Nelder-Mead on R^n with standard coefficients.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                const std::vector<double>& step, std::size_t max_evals, double ftol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);
  std::size_t evals = n + 1;
  std::vector<std::size_t> order(n + 1);
  while (evals < max_evals) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[n];
    const std::size_t second = order[n - 1];
    if (std::abs(fv[worst] - fv[best]) <= ftol * (std::abs(fv[best]) + 1e-300)) break;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
      return p;
    };
    std::vector<double> xr = along(-1.0);
    const double fr = f(xr);
    ++evals;
    if (fr < fv[best]) {
      std::vector<double> xe = along(-2.0);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
    } else {
      std::vector<double> xc = fr < fv[worst] ? along(-0.5) : along(0.5);
      const double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d) simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
          fv[i] = f(simplex[i]);
          ++evals;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  return simplex[best];
}

struct ConnectedFitter {
  const Cone1D& cone;
  const ProblemSpec& spec;
  std::vector<BranchVector> basis;
  ConeCoefficients a;

  ConnectedFitter(const Cone1D& c) : cone(c), spec(c.spec), basis(fit_basis(c)), a(cone_coefficients(c)) {}

  BranchVector branch(std::span<const double> coeffs) const {
    if (basis.empty()) return BranchVector::zero(cone.size());
    return combine(basis, coeffs);
  }

  /// Weighted L2 misfit of the linearized model at angle theta, with the
  /// optimal coefficients written to `coeffs`.
  double linear_misfit(const Samples& s, double theta, std::vector<double>* coeffs) const {
    const std::size_t n = cone.size();
    const std::size_t m = basis.size();
    const Rotation rot(theta);
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    double rr = 0.0;
    std::vector<double> col(m);
    for (std::size_t p = 0; p < s.size(); ++p) {
      double y1 = 0.0;
      double y2 = 0.0;
      rot.to_local(s.y1[p], s.y2[p], y1, y2);
      const double pos = std::max(y2, 0.0);
      const double neg = std::max(-y2, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        const double base = y2 >= 0.0 ? a.plus[k] * y2 * y2 : a.minus[k] * y2 * y2;
        const double r = s.v[p * n + k] - base;
        const double w = spec.weights[k];
        rr += w * r * r;
        for (std::size_t j = 0; j < m; ++j) col[j] = y1 * (basis[j].plus[k] * pos + basis[j].minus[k] * neg);
        for (std::size_t j = 0; j < m; ++j) {
          rhs[static_cast<Eigen::Index>(j)] += w * col[j] * r;
          for (std::size_t l = 0; l < m; ++l)
            normal(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) += w * col[j] * col[l];
        }
      }
    }
    if (m == 0) {
      if (coeffs) coeffs->clear();
      return rr;
    }
    const Eigen::VectorXd c = normal.ldlt().solve(rhs);
    if (coeffs) coeffs->assign(c.data(), c.data() + c.size());
    return std::max(rr - rhs.dot(c), 0.0);
  }

  /// Exact model misfits: returns {weighted L2, sup}.
  std::pair<double, double> misfit(const Samples& s, double theta, std::span<const double> coeffs) const {
    const std::size_t n = cone.size();
    ProfileEvaluator eval(ApproximateProfile2D{cone, BranchVector::zero(n), branch(coeffs), theta});
    std::vector<double> model(n);
    double l2 = 0.0;
    double sup = 0.0;
    for (std::size_t p = 0; p < s.size(); ++p) {
      eval.eval(s.y1[p], s.y2[p], model);
      for (std::size_t k = 0; k < n; ++k) {
        const double r = s.v[p * n + k] - model[k];
        l2 += spec.weights[k] * r * r;
        sup = std::max(sup, std::abs(r));
      }
    }
    return {l2, sup};
  }
};

double wrap_angle(double t, bool full_circle) {
  const double period = full_circle ? 2.0 * M_PI : M_PI;
  const double lo = full_circle ? -M_PI : -0.5 * M_PI;
  t = std::fmod(t - lo, period);
  if (t < 0.0) t += period;
  return t + lo;
}

FitResult fit_connected(const Cone1D& cone, const Samples& all, const Samples& search, const FitOptions& opt) {
  const ConnectedFitter fitter(cone);
  const std::size_t m = fitter.basis.size();
  const double lo = opt.full_circle ? -M_PI : -0.5 * M_PI;
  const double span = opt.full_circle ? 2.0 * M_PI : M_PI;
  const std::size_t coarse = std::max<std::size_t>(opt.coarse_angles, 8);
  const double dtheta = span / static_cast<double>(coarse);

  std::size_t best_idx = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < coarse; ++q) {
    const double val = fitter.linear_misfit(search, lo + dtheta * static_cast<double>(q), nullptr);
    if (val < best_val) {
      best_val = val;
      best_idx = q;
    }
  }
  const double centre = lo + dtheta * static_cast<double>(best_idx);
  double theta = golden_min([&](double t) { return fitter.linear_misfit(search, t, nullptr); }, centre - dtheta,
                            centre + dtheta, opt.angle_tol);
  std::vector<double> coeffs;
  fitter.linear_misfit(search, theta, &coeffs);

  if (opt.polish) {
    std::vector<double> x0{theta};
    x0.insert(x0.end(), coeffs.begin(), coeffs.end());
    std::vector<double> step{2.0 * opt.angle_tol + 1e-3};
    for (double c : coeffs) step.push_back(0.05 * std::max(std::abs(c), 0.01));
    const std::size_t budget = 150 * (m + 1);
    auto l2 = [&](const std::vector<double>& x) {
      return fitter.misfit(search, x[0], std::span<const double>(x.data() + 1, m)).first;
    };
    std::vector<double> x = nelder_mead(l2, x0, step, budget, 1e-12);
    auto sup = [&](const std::vector<double>& p) {
      return fitter.misfit(search, p[0], std::span<const double>(p.data() + 1, m)).second;
    };
    for (double& s : step) s *= 0.25;
    std::vector<double> y = nelder_mead(sup, x, step, budget, 1e-10);
    if (sup(y) <= sup(x)) x = y;
    theta = x[0];
    coeffs.assign(x.begin() + 1, x.end());
  }

  FitResult r;
  r.cone_id = cone.id();
  r.theta = wrap_angle(theta, opt.full_circle);
  r.b = fitter.branch(coeffs);
  r.epsilon = fitter.misfit(all, theta, coeffs).second;
  r.b_ratio = r.epsilon > 0.0 ? norm(r.b) / std::sqrt(r.epsilon) : 0.0;
  return r;
}

FitResult fit_degenerate(const Cone1D& cone, const Samples& all, const Samples& search, const FitOptions& opt) {
  const DegenerateDecomposition dec = decompose_degenerate(cone);
  const ProblemSpec& spec = cone.spec;
  const std::size_t n = cone.size();
  const std::size_t groups = dec.groups.size();

  auto group_mean = [&](const Samples& s, std::size_t p, const DegenerateGroup& g) {
    double ws = 0.0;
    double w = 0.0;
    for (std::size_t i = g.index.lo; i <= g.index.hi; ++i) {
      ws += spec.weights[i - 1] * s.v[p * n + i - 1];
      w += spec.weights[i - 1];
    }
    return ws / w;
  };

  // Group averages are f_I |y|^2 / 4 plus a trace-free quadratic; the fitted
  // trace-free parts balance automatically because the data are average-free.
  std::vector<GroupQuadratic> quads(groups);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const DegenerateGroup& g = dec.groups[gi];
    const double fg = g.quadratic_coefficient;
    Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (std::size_t p = 0; p < search.size(); ++p) {
      const double y1 = search.y1[p];
      const double y2 = search.y2[p];
      const Eigen::Vector2d col(y1 * y1 - y2 * y2, 2.0 * y1 * y2);
      const double r = group_mean(search, p, g) - 0.25 * fg * (y1 * y1 + y2 * y2);
      normal += col * col.transpose();
      rhs += col * r;
    }
    const Eigen::Vector2d c = normal.ldlt().solve(rhs);
    quads[gi] = GroupQuadratic{0.25 * fg + c[0], c[1], 0.25 * fg - c[0]};
  }

  std::vector<double> angles(groups, 0.0);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const DegenerateGroup& g = dec.groups[gi];
    if (g.index.size() < 2) continue;
    const ConeCoefficients a = cone_coefficients(g.sub_cone);
    auto misfit = [&](double theta) {
      const Rotation rot(theta);
      double s2 = 0.0;
      for (std::size_t p = 0; p < search.size(); ++p) {
        double y1 = 0.0;
        double y2 = 0.0;
        rot.to_local(search.y1[p], search.y2[p], y1, y2);
        const double mean = group_mean(search, p, g);
        for (std::size_t i = g.index.lo; i <= g.index.hi; ++i) {
          const std::size_t k = i - g.index.lo;
          const double model = y2 >= 0.0 ? a.plus[k] * y2 * y2 : a.minus[k] * y2 * y2;
          const double r = search.v[p * n + i - 1] - mean - model;
          s2 += spec.weights[i - 1] * r * r;
        }
      }
      return s2;
    };
    const std::size_t coarse = std::max<std::size_t>(opt.coarse_angles, 8);
    const double dtheta = 2.0 * M_PI / static_cast<double>(coarse);
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < coarse; ++q) {
      const double v = misfit(-M_PI + dtheta * static_cast<double>(q));
      if (v < best_val) {
        best_val = v;
        best = q;
      }
    }
    const double centre = -M_PI + dtheta * static_cast<double>(best);
    angles[gi] = wrap_angle(golden_min(misfit, centre - dtheta, centre + dtheta, opt.angle_tol), true);
  }

  FitResult r;
  r.cone_id = cone.id();
  r.degenerate = true;
  r.group_angles = angles;
  r.quadratics = quads;
  DegenerateProfile2D profile;
  try {
    profile = build_degenerate_profile(dec, angles, quads, 4096, 1e-4);
    r.degenerate_profile_valid = true;
  } catch (const Error&) {
    profile.decomposition = dec;
    profile.angles = angles;
    profile.quadratics = quads;
  }
  double sup = 0.0;
  for (std::size_t p = 0; p < all.size(); ++p) {
    const std::vector<double> model = profile(all.y1[p], all.y2[p]);
    for (std::size_t k = 0; k < n; ++k) sup = std::max(sup, std::abs(all.v[p * n + k] - model[k]));
  }
  r.epsilon = sup;
  return r;
}

}  // namespace

FitResult fit_cone(const GridSolution& sol, Point2 center, double radius, std::span<const Cone1D> catalogue,
                   const FitOptions& options) {
  if (sol.grid.dimension != 2) throw Error(ErrorKind::InvalidArgument, "cone fitting needs a 2D solution");
  const Samples all = ball_samples(sol, center, radius);
  if (all.size() < 16) throw Error(ErrorKind::InsufficientData, "too few grid nodes in the fitting ball");
  const Samples search = thin(all, options.max_search_points);

  FitResult best;
  best.epsilon = std::numeric_limits<double>::infinity();
  double best_connected = std::numeric_limits<double>::infinity();
  std::string best_connected_id;
  for (const Cone1D& cone : catalogue) {
    if (cone.size() != sol.membranes() || cone.size() < 2) continue;
    FitResult r = cone.connected() ? fit_connected(cone, all, search, options) : fit_degenerate(cone, all, search, options);
    if (cone.connected() && r.epsilon < best_connected) {
      best_connected = r.epsilon;
      best_connected_id = r.cone_id;
    }
    if (r.epsilon < best.epsilon) best = std::move(r);
  }
  if (!std::isfinite(best.epsilon)) throw Error(ErrorKind::InvalidArgument, "catalogue has no cone of matching size");
  best.radius = radius;
  best.center = center;
  best.best_connected_epsilon = best_connected;
  best.best_connected_id = best_connected_id;
  return best;
}

// ---------------------------------------------------------------------------
// Rates

RateFit rate_fit(std::span<const double> radii, std::span<const double> epsilons) {
  if (radii.size() != epsilons.size()) throw Error(ErrorKind::InvalidArgument, "radii and epsilons differ in length");
  if (radii.size() < 5) throw Error(ErrorKind::InsufficientData, "rate fit needs at least 5 radii");
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0 && radii[i] < 1.0)) throw Error(ErrorKind::InvalidArgument, "radii must lie in (0, 1)");
    if (!(epsilons[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilons must be positive");
    rmin = std::min(rmin, radii[i]);
    rmax = std::max(rmax, radii[i]);
  }
  if (rmax / rmin < 100.0 * (1.0 - 1e-12)) throw Error(ErrorKind::InsufficientData, "radii span less than 2 decades");

  RateFit fit;
  fit.radii.assign(radii.begin(), radii.end());
  fit.epsilons.assign(epsilons.begin(), epsilons.end());
  const std::size_t n = radii.size();
  const double dn = static_cast<double>(n);

  double logc = 0.0;
  for (std::size_t i = 0; i < n; ++i) logc += std::log(epsilons[i]) + std::log(-std::log(radii[i]));
  logc /= dn;
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::log(epsilons[i]) - (logc - std::log(-std::log(radii[i])));
    res += d * d;
  }
  fit.log_constant = std::exp(logc);
  fit.log_residual = std::sqrt(res / dn);

  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(radii[i]);
    my += std::log(epsilons[i]);
  }
  mx /= dn;
  my /= dn;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(radii[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(epsilons[i]) - my);
  }
  const double alpha = sxy / sxx;
  const double logcp = my - alpha * mx;
  res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::log(epsilons[i]) - (logcp + alpha * std::log(radii[i]));
    res += d * d;
  }
  fit.power_constant = std::exp(logcp);
  fit.power_exponent = alpha;
  fit.power_residual = std::sqrt(res / dn);
  fit.preferred = fit.log_residual <= fit.power_residual ? RateModel::Log : RateModel::Power;
  return fit;
}

// ---------------------------------------------------------------------------
// Regular points and growth

RegularPointReport regular_point_probe(const GridSolution& sol, Point2 center, double radius, double epsilon0) {
  const ProblemSpec& spec = sol.spec;
  if (spec.size() < 2) throw Error(ErrorKind::InvalidArgument, "regular point probe needs N >= 2");
  RegularPointReport rep;
  rep.epsilon0 = epsilon0 > 0.0 ? epsilon0 : 0.01 * (spec.forces.front() - spec.forces.back());
  const std::vector<Cone1D> p0{least_energy_cone(spec)};
  FitOptions opt;
  opt.full_circle = true;
  rep.fit = fit_cone(sol, center, radius, p0, opt);
  if (rep.fit.epsilon > rep.epsilon0)
    throw Error(ErrorKind::NotRegular, "misfit to p0 is " + std::to_string(rep.fit.epsilon) + " > eps0 = " +
                                           std::to_string(rep.epsilon0));

  const double tol = default_coincidence_tol(sol);
  for (std::size_t k = 1; k < spec.size(); ++k) {
    CurveDiagnostic diag;
    diag.pair = k;
    std::vector<Point2> pts;
    try {
      pts = contact_boundary(sol, k, tol).vertices();
    } catch (const Error&) {
      rep.curves.push_back(diag);
      continue;
    }
    for (double r = 0.5 * radius; r >= 4.0 * sol.grid.h; r *= 0.5) {
      double cx = 0.0;
      double cy = 0.0;
      std::size_t count = 0;
      for (const Point2& p : pts) {
        const double d = std::hypot(p[0] - center[0], p[1] - center[1]);
        if (d < r || d > 2.0 * r) continue;
        cx += p[0];
        cy += p[1];
        ++count;
      }
      if (count < 2) continue;
      cx /= static_cast<double>(count);
      cy /= static_cast<double>(count);
      double sxx = 0.0;
      double sxy = 0.0;
      double syy = 0.0;
      for (const Point2& p : pts) {
        const double d = std::hypot(p[0] - center[0], p[1] - center[1]);
        if (d < r || d > 2.0 * r) continue;
        sxx += (p[0] - cx) * (p[0] - cx);
        sxy += (p[0] - cx) * (p[1] - cy);
        syy += (p[1] - cy) * (p[1] - cy);
      }
      // Total least squares: principal axis of the scatter matrix.
      const double angle = wrap_angle(0.5 * std::atan2(2.0 * sxy, sxx - syy), false);
      diag.scales.push_back({r, angle, count});
    }
    for (std::size_t i = 0; i + 1 < diag.scales.size(); ++i) {
      double d = std::abs(diag.scales[i].angle - diag.scales[i + 1].angle);
      d = std::min(d, M_PI - d);
      diag.oscillation = std::max(diag.oscillation, d);
    }
    rep.curves.push_back(std::move(diag));
  }
  return rep;
}

GrowthReport quadratic_growth_probe(const GridSolution& sol, std::size_t k, std::span<const double> radii,
                                    std::size_t max_points) {
  if (sol.grid.dimension != 2) throw Error(ErrorKind::InvalidArgument, "growth probe needs a 2D solution");
  const FreeBoundaryCurve curve = contact_boundary(sol, k, default_coincidence_tol(sol));
  const std::vector<Point2> pts = curve.vertices();
  const Grid& g = sol.grid;
  const double rmax = radii.empty() ? 0.0 : *std::max_element(radii.begin(), radii.end());

  auto ball_fits = [&](const Point2& c, double r) {
    const std::size_t m = 8 * static_cast<std::size_t>(std::ceil(r / g.h));
    for (std::size_t q = 0; q < m; ++q) {
      const double phi = 2.0 * M_PI * static_cast<double>(q) / static_cast<double>(m);
      if (!sol.can_sample(c[0] + r * std::cos(phi), c[1] + r * std::sin(phi))) return false;
    }
    return true;
  };
  std::vector<Point2> eligible;
  for (const Point2& p : pts)
    if (ball_fits(p, rmax)) eligible.push_back(p);
  if (eligible.empty()) throw Error(ErrorKind::EmptyFreeBoundary, "no free boundary point with room for the probe balls");

  GrowthReport rep;
  rep.pair = k;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = -std::numeric_limits<double>::infinity();
  const std::size_t count = std::min(max_points, eligible.size());
  std::vector<double> v(sol.membranes());
  for (std::size_t s = 0; s < count; ++s) {
    const Point2 c = eligible[(s * eligible.size()) / count];
    for (double r : radii) {
      double best = -std::numeric_limits<double>::infinity();
      const long i0 = static_cast<long>(std::ceil((c[0] - r - g.x0) / g.h));
      const long i1 = static_cast<long>(std::floor((c[0] + r - g.x0) / g.h));
      const long j0 = static_cast<long>(std::ceil((c[1] - r - g.y0) / g.h));
      const long j1 = static_cast<long>(std::floor((c[1] + r - g.y0) / g.h));
      for (long j = std::max(0L, j0); j <= std::min(j1, static_cast<long>(g.ny) - 1); ++j)
        for (long i = std::max(0L, i0); i <= std::min(i1, static_cast<long>(g.nx) - 1); ++i) {
          const std::size_t n = g.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
          if (!g.active(n)) continue;
          const double dx = g.x(static_cast<std::size_t>(i)) - c[0];
          const double dy = g.y(static_cast<std::size_t>(j)) - c[1];
          if (dx * dx + dy * dy > r * r) continue;
          best = std::max(best, sol.at(n, k - 1) - sol.at(n, k));
        }
      const std::size_t m = 8 * static_cast<std::size_t>(std::ceil(r / g.h));
      for (std::size_t q = 0; q < m; ++q) {
        const double phi = 2.0 * M_PI * static_cast<double>(q) / static_cast<double>(m);
        sol.sample_all(c[0] + r * std::cos(phi), c[1] + r * std::sin(phi), v);
        best = std::max(best, v[k - 1] - v[k]);
      }
      const double ratio = best / (r * r);
      rep.samples.push_back({c[0], c[1], r, ratio});
      rep.min_ratio = std::min(rep.min_ratio, ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
  }
  return rep;
}

}  // namespace nmembrane
