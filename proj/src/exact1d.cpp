#include "nmembrane/exact1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "nmembrane/error.hpp"

namespace nmembrane {

// ---------------------------------------------------------------------------
// BranchVector algebra

BranchVector& BranchVector::operator+=(const BranchVector& o) {
  for (std::size_t i = 0; i < minus.size(); ++i) {
    minus[i] += o.minus[i];
    plus[i] += o.plus[i];
  }
  return *this;
}

BranchVector& BranchVector::operator-=(const BranchVector& o) {
  for (std::size_t i = 0; i < minus.size(); ++i) {
    minus[i] -= o.minus[i];
    plus[i] -= o.plus[i];
  }
  return *this;
}

BranchVector& BranchVector::operator*=(double s) {
  for (std::size_t i = 0; i < minus.size(); ++i) {
    minus[i] *= s;
    plus[i] *= s;
  }
  return *this;
}

BranchVector operator+(BranchVector a, const BranchVector& b) { return a += b; }
BranchVector operator-(BranchVector a, const BranchVector& b) { return a -= b; }
BranchVector operator*(double s, BranchVector a) { return a *= s; }
BranchVector operator-(BranchVector a) { return a *= -1.0; }

double dot(const BranchVector& a, const BranchVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.minus[i] * b.minus[i] + a.plus[i] * b.plus[i];
  return s;
}

double norm(const BranchVector& a) { return std::sqrt(dot(a, a)); }

bool in_branch_space(const Cone1D& cone, const BranchVector& b, double tol) {
  if (b.size() != cone.size() || b.plus.size() != cone.size()) return false;
  const double scale = std::max(1.0, norm(b));
  for (bool right : {false, true}) {
    const auto& v = right ? b.plus : b.minus;
    double ws = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) ws += cone.spec.weights[i] * v[i];
    if (std::abs(ws) > tol * scale * cone.spec.total_weight()) return false;
    for (GroupIndex g : side_groups(cone, right))
      for (std::size_t i = g.lo; i < g.hi; ++i)
        if (std::abs(v[i - 1] - v[i]) > tol * scale) return false;
  }
  return true;
}

std::vector<BranchVector> branch_space_basis(const Cone1D& cone) {
  const std::size_t n = cone.size();
  std::vector<Eigen::VectorXd> raw;
  for (bool right : {false, true}) {
    const auto groups = side_groups(cone, right);
    for (std::size_t j = 0; j + 1 < groups.size(); ++j) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * n));
      const std::size_t offset = right ? n : 0;
      double w0 = 0.0;
      double w1 = 0.0;
      for (std::size_t i = groups[j].lo; i <= groups[j].hi; ++i) w0 += cone.spec.weights[i - 1];
      for (std::size_t i = groups[j + 1].lo; i <= groups[j + 1].hi; ++i) w1 += cone.spec.weights[i - 1];
      for (std::size_t i = groups[j].lo; i <= groups[j].hi; ++i) v[static_cast<Eigen::Index>(offset + i - 1)] = 1.0 / w0;
      for (std::size_t i = groups[j + 1].lo; i <= groups[j + 1].hi; ++i)
        v[static_cast<Eigen::Index>(offset + i - 1)] = -1.0 / w1;
      raw.push_back(v);
    }
  }
  // Modified Gram-Schmidt; the raw vectors are linearly independent.
  std::vector<BranchVector> basis;
  std::vector<Eigen::VectorXd> ortho;
  for (Eigen::VectorXd v : raw) {
    for (const auto& q : ortho) v -= q.dot(v) * q;
    v.normalize();
    ortho.push_back(v);
    BranchVector bv = BranchVector::zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      bv.minus[i] = v[static_cast<Eigen::Index>(i)];
      bv.plus[i] = v[static_cast<Eigen::Index>(n + i)];
    }
    basis.push_back(std::move(bv));
  }
  return basis;
}

BranchVector combine(std::span<const BranchVector> basis, std::span<const double> coefficients) {
  if (basis.empty()) return {};
  BranchVector out = BranchVector::zero(basis.front().size());
  for (std::size_t j = 0; j < basis.size(); ++j) out += coefficients[j] * basis[j];
  return out;
}

// ---------------------------------------------------------------------------
// Piecewise quadratics

void Quadratic::add_square(double s, double x0) noexcept {
  c2 += s;
  c1 -= 2.0 * s * x0;
  c0 += s * x0 * x0;
}

PiecewiseQuadratic1D::PiecewiseQuadratic1D(std::vector<double> breakpoints,
                                           std::vector<std::vector<Quadratic>> pieces)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {}

std::size_t PiecewiseQuadratic1D::interval_of(double x) const {
  return static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) -
                                  breakpoints_.begin());
}

double PiecewiseQuadratic1D::value(std::size_t membrane, double x) const {
  return pieces_[membrane][interval_of(x)](x);
}

double PiecewiseQuadratic1D::slope(std::size_t membrane, double x) const {
  return pieces_[membrane][interval_of(x)].slope(x);
}

void PiecewiseQuadratic1D::evaluate(double x, std::span<double> out) const {
  const std::size_t j = interval_of(x);
  for (std::size_t i = 0; i < pieces_.size(); ++i) out[i] = pieces_[i][j](x);
}

std::vector<double> PiecewiseQuadratic1D::evaluate(double x) const {
  std::vector<double> out(pieces_.size());
  evaluate(x, out);
  return out;
}

double PiecewiseQuadratic1D::continuity_defect() const {
  double defect = 0.0;
  for (const auto& membrane : pieces_) {
    for (std::size_t j = 0; j < breakpoints_.size(); ++j) {
      const double x = breakpoints_[j];
      const double scale = 1.0 + std::abs(x);
      defect = std::max(defect, std::abs(membrane[j](x) - membrane[j + 1](x)) / (scale * scale));
      defect = std::max(defect, std::abs(membrane[j].slope(x) - membrane[j + 1].slope(x)) / scale);
    }
  }
  return defect;
}

nlohmann::json to_json(const PiecewiseQuadratic1D& sol) {
  nlohmann::json membranes = nlohmann::json::array();
  for (std::size_t i = 0; i < sol.membranes(); ++i) {
    nlohmann::json pieces = nlohmann::json::array();
    for (std::size_t j = 0; j < sol.intervals(); ++j) {
      const Quadratic& q = sol.piece(i, j);
      pieces.push_back({q.c2, q.c1, q.c0});
    }
    membranes.push_back(std::move(pieces));
  }
  return nlohmann::json{{"breakpoints", sol.breakpoints()},
                        {"free_boundaries", sol.free_boundaries},
                        {"membranes", std::move(membranes)}};
}

// ---------------------------------------------------------------------------
// tau and the free-boundary construction

namespace {

void require_connected(const Cone1D& cone) {
  if (!cone.connected())
    throw Error(ErrorKind::NotConnected, "cone " + cone.id() + " is not connected");
}

}  // namespace

BranchVector tau(const Cone1D& cone) {
  require_connected(cone);
  const ConeCoefficients a = cone_coefficients(cone);
  BranchVector t = BranchVector::zero(cone.size());
  for (std::size_t i = 0; i < cone.size(); ++i) {
    // a (x^- - s)^2 = a (x^-)^2 - 2 a s x^- + a s^2, and x^+ picks up +2 a s.
    t.minus[i] = -2.0 * a.minus[i];
    t.plus[i] = 2.0 * a.plus[i];
  }
  return t;
}

PiecewiseQuadratic1D gamma_to_solution(const Cone1D& cone, std::span<const double> gamma) {
  require_connected(cone);
  const std::size_t n = cone.size();
  if (gamma.size() + 1 != n)
    throw Error(ErrorKind::InvalidArgument, "expected N-1 free boundary positions");
  for (double g : gamma)
    if (!std::isfinite(g)) throw Error(ErrorKind::InvalidArgument, "free boundary position not finite");

  std::vector<double> breakpoints(gamma.begin(), gamma.end());
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  const std::size_t m = breakpoints.size();

  // Second derivative of every membrane on every interval: the force of the
  // coincidence group it belongs to at an interior sample point.
  std::vector<std::vector<double>> second(n, std::vector<double>(m + 1));
  for (std::size_t j = 0; j <= m; ++j) {
    double x = 0.0;
    if (m > 0) {
      if (j == 0)
        x = breakpoints[0] - 1.0;
      else if (j == m)
        x = breakpoints[m - 1] + 1.0;
      else
        x = 0.5 * (breakpoints[j - 1] + breakpoints[j]);
    }
    std::size_t lo = 1;
    for (std::size_t k = 1; k <= n; ++k) {
      bool joined = false;
      if (k < n) {
        joined = cone.pattern[k - 1] == Contact::RightHalfLine ? x > gamma[k - 1] : x < gamma[k - 1];
      }
      if (joined) continue;
      const double fg = group_force(cone.spec, {lo, k});
      for (std::size_t i = lo; i <= k; ++i) second[i - 1][j] = fg;
      lo = k + 1;
    }
  }

  std::vector<std::vector<Quadratic>> pieces(n, std::vector<Quadratic>(m + 1));
  for (std::size_t i = 0; i < n; ++i) {
    Quadratic q{0.5 * second[i][0], 0.0, 0.0};
    pieces[i][0] = q;
    for (std::size_t j = 1; j <= m; ++j) {
      q.add_square(0.5 * (second[i][j] - second[i][j - 1]), breakpoints[j - 1]);
      pieces[i][j] = q;
    }
  }

  // Membrane i+1 agrees with membrane i on the contact side of Gamma_i; both
  // have the same second derivative there, so matching value and slope at
  // Gamma_i fixes the free linear part.
  for (std::size_t i = 1; i < n; ++i) {
    const double g = gamma[i - 1];
    const PiecewiseQuadratic1D current(breakpoints, pieces);
    const double dv = current.value(i - 1, g) - current.value(i, g);
    const double ds = current.slope(i - 1, g) - current.slope(i, g);
    for (Quadratic& q : pieces[i]) {
      q.c1 += ds;
      q.c0 += dv - ds * g;
    }
  }

  const double wsum = cone.spec.total_weight();
  for (std::size_t j = 0; j <= m; ++j) {
    Quadratic avg;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = cone.spec.weights[i] / wsum;
      avg.c2 += w * pieces[i][j].c2;
      avg.c1 += w * pieces[i][j].c1;
      avg.c0 += w * pieces[i][j].c0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      pieces[i][j].c2 -= avg.c2;
      pieces[i][j].c1 -= avg.c1;
      pieces[i][j].c0 -= avg.c0;
    }
  }

  PiecewiseQuadratic1D out(std::move(breakpoints), std::move(pieces));
  out.free_boundaries.assign(gamma.begin(), gamma.end());
  return out;
}

namespace {

void check_asymptotics(const Cone1D& cone, const PiecewiseQuadratic1D& sol) {
  if (sol.membranes() != cone.size())
    throw Error(ErrorKind::InvalidArgument, "solution has the wrong number of membranes");
  const ConeCoefficients a = cone_coefficients(cone);
  const std::size_t last = sol.intervals() - 1;
  for (std::size_t i = 0; i < cone.size(); ++i) {
    const double left = sol.piece(i, 0).c2;
    const double right = sol.piece(i, last).c2;
    const double tol = 1e-9 * (1.0 + std::abs(a.plus[i]) + std::abs(a.minus[i]));
    if (std::abs(left - a.minus[i]) > tol || std::abs(right - a.plus[i]) > tol)
      throw Error(ErrorKind::AsymptoticMismatch,
                  "outer second derivative of membrane " + std::to_string(i + 1) + " differs from cone " + cone.id());
  }
}

}  // namespace

BranchVector solution_to_b(const Cone1D& cone, const PiecewiseQuadratic1D& sol) {
  check_asymptotics(cone, sol);
  const std::size_t last = sol.intervals() - 1;
  BranchVector b = BranchVector::zero(cone.size());
  for (std::size_t i = 0; i < cone.size(); ++i) {
    b.minus[i] = -sol.piece(i, 0).c1;  // x^- = -x on the left
    b.plus[i] = sol.piece(i, last).c1;
  }
  return b;
}

ErrorVector solution_to_e(const Cone1D& cone, const PiecewiseQuadratic1D& sol) {
  check_asymptotics(cone, sol);
  const std::size_t last = sol.intervals() - 1;
  ErrorVector e = BranchVector::zero(cone.size());
  for (std::size_t i = 0; i < cone.size(); ++i) {
    e.minus[i] = sol.piece(i, 0).c0;
    e.plus[i] = sol.piece(i, last).c0;
  }
  return e;
}

// ---------------------------------------------------------------------------
// b -> Gamma

namespace {

using Ordering = std::vector<std::size_t>;  // ordering[j] = pair index at sorted position j

Eigen::VectorXd flatten(const BranchVector& b) {
  const std::size_t n = b.size();
  Eigen::VectorXd v(static_cast<Eigen::Index>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    v[static_cast<Eigen::Index>(i)] = b.minus[i];
    v[static_cast<Eigen::Index>(n + i)] = b.plus[i];
  }
  return v;
}

std::string cone_key(const Cone1D& cone) {
  std::string key = cone.id();
  key += '|';
  auto append = [&key](const std::vector<double>& v) {
    for (double x : v) {
      char buf[sizeof(double)];
      std::memcpy(buf, &x, sizeof(double));
      key.append(buf, sizeof(double));
    }
  };
  append(cone.spec.weights);
  append(cone.spec.forces);
  return key;
}

std::string ordering_key(const Ordering& ord) {
  std::string s;
  for (std::size_t k : ord) s += static_cast<char>('a' + k);
  return s;
}

/// Linear map Gamma -> b valid on the closed region where the free
/// boundaries are sorted according to `ord`.
struct RegionMap {
  Eigen::MatrixXd forward;                                // 2N x (N-1)
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> inverse;    // least-squares solve
};

// The cache only speeds up repeated inversions; results never depend on it.
thread_local std::map<std::string, RegionMap> t_region_cache;
thread_local std::map<std::string, Ordering> t_last_ordering;

const RegionMap& region_map(const Cone1D& cone, const std::string& key, const Ordering& ord) {
  const std::string full = key + '#' + ordering_key(ord);
  auto it = t_region_cache.find(full);
  if (it != t_region_cache.end()) return it->second;

  const std::size_t dim = cone.size() - 1;
  std::vector<double> anchor(dim);
  for (std::size_t j = 0; j < dim; ++j) anchor[ord[j]] = static_cast<double>(j);
  const Eigen::VectorXd b0 = flatten(solution_to_b(cone, gamma_to_solution(cone, anchor)));
  RegionMap map;
  map.forward.resize(b0.size(), static_cast<Eigen::Index>(dim));
  constexpr double kStep = 0.25;
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<double> g = anchor;
    g[k] += kStep;
    const Eigen::VectorXd bk = flatten(solution_to_b(cone, gamma_to_solution(cone, g)));
    map.forward.col(static_cast<Eigen::Index>(k)) = (bk - b0) / kStep;
  }
  map.inverse.compute(map.forward);
  if (t_region_cache.size() > 4096) t_region_cache.clear();
  return t_region_cache.emplace(full, std::move(map)).first->second;
}

bool respects(const std::vector<double>& gamma, const Ordering& ord) {
  double scale = 1.0;
  for (double g : gamma) scale = std::max(scale, std::abs(g));
  const double tol = 1e-10 * scale;
  for (std::size_t j = 0; j + 1 < ord.size(); ++j)
    if (gamma[ord[j]] > gamma[ord[j + 1]] + tol) return false;
  return true;
}

Ordering sort_order(const std::vector<double>& gamma) {
  Ordering ord(gamma.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return gamma[a] < gamma[b]; });
  return ord;
}

std::vector<double> solve_in_region(const Cone1D& cone, const std::string& key, const Ordering& ord,
                                    const Eigen::VectorXd& target) {
  const RegionMap& map = region_map(cone, key, ord);
  const Eigen::VectorXd g = map.inverse.solve(target);
  return std::vector<double>(g.data(), g.data() + g.size());
}

std::vector<double> by_enumeration(const Cone1D& cone, const std::string& key, const Eigen::VectorXd& target) {
  Ordering ord(cone.size() - 1);
  std::iota(ord.begin(), ord.end(), 0);
  do {
    std::vector<double> g = solve_in_region(cone, key, ord, target);
    if (respects(g, ord)) {
      t_last_ordering[key] = ord;
      return g;
    }
  } while (std::next_permutation(ord.begin(), ord.end()));
  throw Error(ErrorKind::NoRegionFound, "no ordering region reproduces b for cone " + cone.id());
}

// Walks the straight path from the reference asymptote b(0, 1, ..., N-2) to
// the target, switching ordering regions where two free boundaries cross.
std::vector<double> by_continuation(const Cone1D& cone, const std::string& key, const Eigen::VectorXd& target) {
  const std::size_t dim = cone.size() - 1;
  Ordering ord(dim);
  std::iota(ord.begin(), ord.end(), 0);
  std::vector<double> start(dim);
  for (std::size_t j = 0; j < dim; ++j) start[j] = static_cast<double>(j);
  Eigen::VectorXd b_start = flatten(solution_to_b(cone, gamma_to_solution(cone, start)));

  double t = 0.0;
  const std::size_t max_steps = 64 * dim * dim + 64;
  for (std::size_t step = 0; step < max_steps; ++step) {
    // Within one region Gamma(s) is affine in the path parameter s in [0, 1].
    const std::vector<double> g0 = solve_in_region(cone, key, ord, b_start);
    const std::vector<double> g1 = solve_in_region(cone, key, ord, target);
    double t_cross = 1.0;
    std::size_t swap_at = dim;
    for (std::size_t j = 0; j + 1 < dim; ++j) {
      const double d0 = g0[ord[j + 1]] - g0[ord[j]];
      const double d1 = g1[ord[j + 1]] - g1[ord[j]];
      const double gap_t = (1.0 - t) * d0 + t * d1;
      if (d1 < d0) {
        const double s = d0 / (d0 - d1);
        if (s > t + 1e-14 && s < t_cross) {
          t_cross = s;
          swap_at = j;
        } else if (s <= t + 1e-14 && gap_t <= 0.0 && t_cross > t) {
          t_cross = t;
          swap_at = j;
        }
      }
    }
    if (swap_at == dim) {
      t_last_ordering[key] = ord;
      return g1;
    }
    t = t_cross;
    std::swap(ord[swap_at], ord[swap_at + 1]);
  }
  throw Error(ErrorKind::NoRegionFound, "continuation did not reach the target for cone " + cone.id());
}

}  // namespace

std::vector<double> b_to_gamma(const Cone1D& cone, const BranchVector& b, RegionSearch method) {
  require_connected(cone);
  const std::size_t n = cone.size();
  if (b.size() != n || b.plus.size() != n) throw Error(ErrorKind::InvalidArgument, "branch vector has wrong size");
  if (!in_branch_space(cone, b, 1e-9))
    throw Error(ErrorKind::InvalidArgument, "branch vector is not in B(p) for cone " + cone.id());
  if (n == 1) return {};
  const std::string key = cone_key(cone);
  const Eigen::VectorXd target = flatten(b);

  if (method == RegionSearch::Enumerate) return by_enumeration(cone, key, target);
  if (method == RegionSearch::Continuation) return by_continuation(cone, key, target);

  Ordering ord;
  if (auto it = t_last_ordering.find(key); it != t_last_ordering.end()) {
    ord = it->second;
  } else {
    ord.resize(n - 1);
    std::iota(ord.begin(), ord.end(), 0);
  }
  std::vector<std::string> visited;
  for (std::size_t iter = 0; iter < 2 * n + 2; ++iter) {
    std::vector<double> g = solve_in_region(cone, key, ord, target);
    if (respects(g, ord)) {
      t_last_ordering[key] = ord;
      return g;
    }
    const std::string k = ordering_key(ord);
    if (std::find(visited.begin(), visited.end(), k) != visited.end()) break;
    visited.push_back(k);
    ord = sort_order(g);
  }
  return n <= 7 ? by_enumeration(cone, key, target) : by_continuation(cone, key, target);
}

PiecewiseQuadratic1D h_solution(const Cone1D& cone, const BranchVector& b, RegionSearch method) {
  return gamma_to_solution(cone, b_to_gamma(cone, b, method));
}

std::vector<double> h_eval(const Cone1D& cone, const BranchVector& b, double x) {
  return h_solution(cone, b).evaluate(x);
}

ErrorVector error_function(const Cone1D& cone, const BranchVector& b) {
  return solution_to_e(cone, h_solution(cone, b));
}

double asymmetry(const Cone1D& cone, const BranchVector& b) {
  const double nb = norm(b);
  if (nb == 0.0) throw Error(ErrorKind::ZeroVector, "asymmetry undefined at b = 0");
  return norm(error_function(cone, b) - error_function(cone, -b)) / (nb * nb);
}

double tau_line_distance(const Cone1D& cone, const BranchVector& b) {
  const double nb = norm(b);
  if (nb == 0.0) throw Error(ErrorKind::ZeroVector, "direction undefined at b = 0");
  const BranchVector t = tau(cone);
  const double nt = norm(t);
  const BranchVector u = (1.0 / nb) * b;
  const BranchVector v = (1.0 / nt) * t;
  return std::min(norm(u - v), norm(u + v));
}

// ---------------------------------------------------------------------------
// Two-dimensional profiles

Rotation::Rotation(double angle) : c(std::cos(angle)), s(std::sin(angle)) {}

ProfileEvaluator::ProfileEvaluator(ApproximateProfile2D profile)
    : profile_(std::move(profile)), rotation_(profile_.rotation_angle) {
  const std::size_t n = profile_.cone.size();
  if (profile_.b0.size() == 0) profile_.b0 = BranchVector::zero(n);
  if (profile_.b1.size() == 0) profile_.b1 = BranchVector::zero(n);
  homogeneous_ = norm(profile_.b0) == 0.0;
  const std::vector<double> zero(n > 0 ? n - 1 : 0, 0.0);
  base_ = gamma_to_solution(profile_.cone, zero);
  if (homogeneous_) {
    positive_ = h_solution(profile_.cone, profile_.b1);
    negative_ = h_solution(profile_.cone, -profile_.b1);
  }
}

void ProfileEvaluator::eval(double x1, double x2, std::span<double> out) const {
  double y1 = 0.0;
  double y2 = 0.0;
  rotation_.to_local(x1, x2, y1, y2);
  if (!homogeneous_) {
    const BranchVector b = profile_.b0 + y1 * profile_.b1;
    h_solution(profile_.cone, b).evaluate(y2, out);
    return;
  }
  if (y1 == 0.0) {
    base_.evaluate(y2, out);
    return;
  }
  // h(y2, t b) = t^2 h(y2 / t, b) for t > 0.
  const double t = std::abs(y1);
  const PiecewiseQuadratic1D& sol = y1 > 0.0 ? positive_ : negative_;
  const double z = y2 / t;
  const std::size_t j = sol.interval_of(z);
  for (std::size_t i = 0; i < sol.membranes(); ++i) {
    const Quadratic& q = sol.piece(i, j);
    out[i] = q.c2 * y2 * y2 + q.c1 * y2 * t + q.c0 * t * t;
  }
}

std::vector<double> ProfileEvaluator::operator()(double x1, double x2) const {
  std::vector<double> out(profile_.cone.size());
  eval(x1, x2, out);
  return out;
}

std::vector<double> profile2d_eval(const ApproximateProfile2D& profile, double x1, double x2) {
  return ProfileEvaluator(profile)(x1, x2);
}

std::vector<double> DegenerateProfile2D::operator()(double x1, double x2) const {
  const ProblemSpec& spec = decomposition.cone.spec;
  std::vector<double> out;
  out.reserve(spec.size());
  for (std::size_t g = 0; g < decomposition.groups.size(); ++g) {
    const DegenerateGroup& group = decomposition.groups[g];
    const Rotation rot(angles[g]);
    double y1 = 0.0;
    double y2 = 0.0;
    rot.to_local(x1, x2, y1, y2);
    const double q = quadratics[g](x1, x2);
    for (double v : cone_eval(group.sub_cone, y2)) out.push_back(v + q);
  }
  double avg = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) avg += spec.weights[k] * out[k];
  avg /= spec.total_weight();
  for (double& v : out) v -= avg;
  return out;
}

DegenerateProfile2D build_degenerate_profile(const DegenerateDecomposition& decomposition,
                                             std::span<const double> angles,
                                             std::span<const GroupQuadratic> quadratics,
                                             std::size_t angular_samples, double tolerance) {
  const std::size_t m = decomposition.groups.size();
  if (angles.size() != m || quadratics.size() != m)
    throw Error(ErrorKind::InvalidArgument, "need one angle and one quadratic per group");
  for (std::size_t g = 0; g < m; ++g) {
    const double want = decomposition.groups[g].quadratic_coefficient;
    if (std::abs(quadratics[g].laplacian() - want) > 1e-10 * (1.0 + std::abs(want)))
      throw Error(ErrorKind::InvalidArgument,
                  "group " + std::to_string(g + 1) + " quadratic has Laplacian " +
                      std::to_string(quadratics[g].laplacian()) + ", expected " + std::to_string(want));
  }

  DegenerateProfile2D profile;
  profile.decomposition = decomposition;
  profile.angles.assign(angles.begin(), angles.end());
  profile.quadratics.assign(quadratics.begin(), quadratics.end());

  const std::size_t samples = std::max<std::size_t>(angular_samples, 64);
  const double dphi = 2.0 * M_PI / static_cast<double>(samples);
  auto gap = [&](std::size_t k, double phi) {
    const std::vector<double> v = profile(std::cos(phi), std::sin(phi));
    return v[k - 1] - v[k];
  };

  for (std::size_t cut : decomposition.cut_indices) {
    std::vector<double> d(samples);
    double scale = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      d[s] = gap(cut, dphi * static_cast<double>(s));
      scale = std::max(scale, std::abs(d[s]));
    }
    scale = std::max(scale, 1e-300);
    const double order_tol = tolerance * scale;
    for (std::size_t s = 0; s < samples; ++s) {
      if (d[s] < -order_tol)
        throw Error(ErrorKind::OrderingViolation,
                    "membranes " + std::to_string(cut) + " and " + std::to_string(cut + 1) +
                        " cross at angle " + std::to_string(dphi * static_cast<double>(s)));
    }
    // Contact points: sampled local minima whose refined value vanishes.
    std::vector<double> touch;
    const double zero_tol = std::max(1e-10, 100.0 * tolerance) * scale;
    for (std::size_t s = 0; s < samples; ++s) {
      const double prev = d[(s + samples - 1) % samples];
      const double next = d[(s + 1) % samples];
      if (!(d[s] <= prev && d[s] < next)) continue;
      double a = dphi * (static_cast<double>(s) - 1.0);
      double b = dphi * (static_cast<double>(s) + 1.0);
      const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - golden * (b - a);
      double e = a + golden * (b - a);
      double fc = gap(cut, c);
      double fe = gap(cut, e);
      for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
        if (fc < fe) {
          b = e;
          e = c;
          fe = fc;
          c = b - golden * (b - a);
          fc = gap(cut, c);
        } else {
          a = c;
          c = e;
          fc = fe;
          e = a + golden * (b - a);
          fe = gap(cut, e);
        }
      }
      const double phi = 0.5 * (a + b);
      const double value = std::min({gap(cut, phi), d[s]});
      if (value < -order_tol)
        throw Error(ErrorKind::OrderingViolation,
                    "membranes " + std::to_string(cut) + " and " + std::to_string(cut + 1) + " cross at angle " +
                        std::to_string(phi));
      if (value <= zero_tol) touch.push_back(std::fmod(phi + 2.0 * M_PI, 2.0 * M_PI));
    }
    if (touch.size() > 2)
      throw Error(ErrorKind::TwoRayViolation, "pair " + std::to_string(cut) + " touches along " +
                                                  std::to_string(touch.size()) + " rays");
    if (touch.size() == 2) {
      double sep = std::abs(touch[0] - touch[1]);
      sep = std::min(sep, 2.0 * M_PI - sep);
      if (!(sep > 0.5 * M_PI + 1e-9))
        throw Error(ErrorKind::TwoRayViolation,
                    "contact rays of pair " + std::to_string(cut) + " separated by " + std::to_string(sep) + " rad");
    }
    profile.coincidence_angles.push_back(std::move(touch));
  }
  return profile;
}

}  // namespace nmembrane
