#include "nmembrane/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "nmembrane/error.hpp"

namespace nmembrane {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump_rec(const nlohmann::json& j, int indent, int depth, std::string& out) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_rec(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j)
        if (e.is_structured()) flat = false;
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat && indent >= 0 ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump_rec(e, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string join_row(std::initializer_list<double> values) {
  std::string s;
  for (double v : values) {
    if (!s.empty()) s += ',';
    s += format_double(v);
  }
  return s;
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump_rec(j, indent, 0, out);
  out += '\n';
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    os << text;
    if (!os) throw Error(ErrorKind::InvalidArgument, "short write to " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string field_csv(const GridSolution& sol) {
  const std::size_t n = sol.membranes();
  std::string s = "node,x,y";
  for (std::size_t k = 1; k <= n; ++k) s += ",u_" + std::to_string(k);
  s += '\n';
  const Grid& g = sol.grid;
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t node = g.index(i, j);
      if (!g.active(node)) continue;
      s += std::to_string(node);
      s += ',' + format_double(g.x(i));
      s += ',' + format_double(g.dimension == 1 ? 0.0 : g.y(j));
      for (std::size_t k = 0; k < n; ++k) s += ',' + format_double(sol.at(node, k));
      s += '\n';
    }
  return s;
}

std::string weiss_csv(const WeissProfile& p) {
  std::string s = "r,E,F,W\n";
  for (std::size_t i = 0; i < p.radii.size(); ++i) s += join_row({p.radii[i], p.E[i], p.F[i], p.W[i]}) + '\n';
  return s;
}

std::string rate_csv(const RateFit& fit) {
  std::string s = "r,epsilon,log_model,power_model\n";
  for (std::size_t i = 0; i < fit.radii.size(); ++i) {
    const double r = fit.radii[i];
    s += join_row({r, fit.epsilons[i], fit.log_constant / -std::log(r),
                   fit.power_constant * std::pow(r, fit.power_exponent)}) +
         '\n';
  }
  return s;
}

std::string curve_csv(const FreeBoundaryCurve& curve) {
  std::string s = "polyline,x,y\n";
  for (std::size_t c = 0; c < curve.polylines.size(); ++c)
    for (const Point2& p : curve.polylines[c]) s += std::to_string(c) + ',' + join_row({p[0], p[1]}) + '\n';
  return s;
}

nlohmann::json to_json(const SolveStats& st) {
  return {{"sweeps", st.sweeps}, {"last_change", st.last_change}, {"tol", st.tol},
          {"relaxation", st.relaxation}, {"converged", st.converged}};
}

nlohmann::json to_json(const ResidualReport& r) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& g : r.region_residuals)
    regions.push_back({{"group", {g.group.lo, g.group.hi}}, {"max_residual", g.max_residual}, {"nodes", g.nodes}});
  return {{"kkt_residual", r.kkt_residual},
          {"region_residuals", regions},
          {"weighted_laplacian_sum", r.weighted_laplacian_sum},
          {"laplacian_bound_ratio", r.laplacian_bound_ratio},
          {"ordering_ok", r.ordering_ok},
          {"coincidence_tol", r.coincidence_tol}};
}

nlohmann::json to_json(const MaxPrincipleVerdict& v) {
  return {{"holds", v.holds},
          {"worst_violation", v.worst_violation},
          {"worst_node", v.worst_node},
          {"interior_max_sq", v.interior_max_sq},
          {"boundary_max_sq", v.boundary_max_sq}};
}

nlohmann::json to_json(const GrowthReport& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : r.samples) samples.push_back({{"x", s.x}, {"y", s.y}, {"r", s.radius}, {"ratio", s.ratio}});
  return {{"pair", r.pair}, {"min_ratio", r.min_ratio}, {"max_ratio", r.max_ratio}, {"samples", samples}};
}

nlohmann::json to_json(const WeissProfile& p) {
  return {{"center", {p.center[0], p.center[1]}}, {"h", p.h}, {"r", p.radii}, {"E", p.E}, {"F", p.F}, {"W", p.W}};
}

nlohmann::json to_json(const MonotonicityVerdict& v) {
  return {{"monotone", v.monotone},
          {"slack_constant", v.slack_constant},
          {"worst_excess", v.worst_excess},
          {"worst_index", v.worst_index}};
}

nlohmann::json to_json(const BranchVector& b) { return {{"minus", b.minus}, {"plus", b.plus}}; }

nlohmann::json to_json(const FitResult& f) {
  nlohmann::json j = {{"cone", f.cone_id},   {"theta", f.theta},   {"b", to_json(f.b)},
                      {"epsilon", f.epsilon}, {"radius", f.radius}, {"center", {f.center[0], f.center[1]}},
                      {"b_ratio", f.b_ratio}, {"degenerate", f.degenerate}};
  if (f.degenerate) {
    nlohmann::json q = nlohmann::json::array();
    for (const auto& g : f.quadratics) q.push_back({g.xx, g.xy, g.yy});
    j["group_angles"] = f.group_angles;
    j["quadratics"] = q;
    j["degenerate_profile_valid"] = f.degenerate_profile_valid;
    j["best_connected_epsilon"] = f.best_connected_epsilon;
    j["best_connected_cone"] = f.best_connected_id;
  }
  return j;
}

nlohmann::json to_json(const RateFit& f) {
  return {{"r", f.radii},
          {"epsilon", f.epsilons},
          {"log", {{"C", f.log_constant}, {"residual", f.log_residual}}},
          {"power", {{"C", f.power_constant}, {"alpha", f.power_exponent}, {"residual", f.power_residual}}},
          {"preferred", f.preferred == RateModel::Log ? "log" : "power"}};
}

nlohmann::json to_json(const RegularPointReport& r) {
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : r.curves) {
    nlohmann::json scales = nlohmann::json::array();
    for (const auto& s : c.scales) scales.push_back({{"r", s.radius}, {"angle", s.angle}, {"vertices", s.vertices}});
    curves.push_back({{"pair", c.pair}, {"oscillation", c.oscillation}, {"scales", scales}});
  }
  return {{"fit", to_json(r.fit)}, {"epsilon0", r.epsilon0}, {"curves", curves}};
}

nlohmann::json to_json(const MonteCarloResult& mc) {
  return {{"node", mc.node}, {"ticket", mc.ticket}, {"mean", mc.mean},
          {"se", mc.se},     {"walks", mc.n_walks}, {"seed", mc.seed}};
}

nlohmann::json grid_to_json(const Grid& g) {
  return {{"dimension", g.dimension},
          {"nx", g.nx},
          {"ny", g.ny},
          {"h", g.h},
          {"x0", g.x0},
          {"y0", g.y0},
          {"interior", g.count(NodeKind::Interior)},
          {"boundary", g.count(NodeKind::Boundary)}};
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace nmembrane
