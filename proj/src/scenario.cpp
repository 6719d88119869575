#include "nmembrane/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Core>

#include "nmembrane/analysis.hpp"
#include "nmembrane/error.hpp"
#include "nmembrane/game.hpp"
#include "nmembrane/io.hpp"
#include "nmembrane/version.hpp"

namespace nmembrane {

namespace {

const char* const kSchemaText =
#include "scenario_schema.inc"
    ;

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

std::string type_name(const nlohmann::json& j) {
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

bool has_type(const nlohmann::json& j, const std::string& t) {
  if (t == "object") return j.is_object();
  if (t == "array") return j.is_array();
  if (t == "string") return j.is_string();
  if (t == "boolean") return j.is_boolean();
  if (t == "integer") return j.is_number_integer() || (j.is_number_float() && std::floor(j.get<double>()) == j.get<double>());
  if (t == "number") return j.is_number();
  if (t == "null") return j.is_null();
  return false;
}

class SchemaWalker {
 public:
  SchemaWalker(const nlohmann::json& root, std::vector<ValidationIssue>& out) : root_(root), out_(out) {}

  void check(const nlohmann::json& schema, const nlohmann::json& doc, const std::string& ptr) {
    if (schema.contains("$ref")) {
      const std::string ref = schema["$ref"].get<std::string>();
      if (ref.rfind("#", 0) != 0) throw Error(ErrorKind::InvalidArgument, "only local schema references are supported");
      check(root_.at(nlohmann::json::json_pointer(ref.substr(1))), doc, ptr);
      return;
    }
    if (schema.contains("type") && !has_type(doc, schema["type"].get<std::string>())) {
      issue(ptr, "expected " + schema["type"].get<std::string>() + ", got " + type_name(doc));
      return;
    }
    if (schema.contains("enum")) {
      bool found = false;
      for (const auto& e : schema["enum"]) found = found || e == doc;
      if (!found) issue(ptr, "value " + doc.dump() + " is not one of " + schema["enum"].dump());
    }
    if (doc.is_number()) {
      const double v = doc.get<double>();
      if (schema.contains("minimum") && v < schema["minimum"].get<double>())
        issue(ptr, "must be >= " + schema["minimum"].dump());
      if (schema.contains("maximum") && v > schema["maximum"].get<double>())
        issue(ptr, "must be <= " + schema["maximum"].dump());
      if (schema.contains("exclusiveMinimum") && v <= schema["exclusiveMinimum"].get<double>())
        issue(ptr, "must be > " + schema["exclusiveMinimum"].dump());
      if (schema.contains("exclusiveMaximum") && v >= schema["exclusiveMaximum"].get<double>())
        issue(ptr, "must be < " + schema["exclusiveMaximum"].dump());
    }
    if (doc.is_array()) {
      if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>())
        issue(ptr, "needs at least " + schema["minItems"].dump() + " items");
      if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>())
        issue(ptr, "allows at most " + schema["maxItems"].dump() + " items");
      if (schema.contains("items"))
        for (std::size_t i = 0; i < doc.size(); ++i) check(schema["items"], doc[i], ptr + "/" + std::to_string(i));
    }
    if (doc.is_object()) {
      if (schema.contains("required"))
        for (const auto& key : schema["required"])
          if (!doc.contains(key.get<std::string>()))
            issue(ptr + "/" + escape_token(key.get<std::string>()), "required property is missing");
      const auto props = schema.value("properties", nlohmann::json::object());
      const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
      for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string child = ptr + "/" + escape_token(it.key());
        if (props.contains(it.key()))
          check(props[it.key()], it.value(), child);
        else if (closed)
          issue(child, "unknown property");
      }
    }
  }

 private:
  void issue(const std::string& ptr, const std::string& msg) { out_.push_back({ptr, msg}); }

  const nlohmann::json& root_;
  std::vector<ValidationIssue>& out_;
};

bool needs_problem(const std::string& p) { return p != "rate"; }
bool needs_field(const std::string& p) { return p == "solve" || p == "blowup" || p == "weiss" || p == "game"; }

void check_branch(const nlohmann::json& b, std::size_t n, const std::string& ptr, std::vector<ValidationIssue>& out) {
  for (const char* side : {"minus", "plus"})
    if (b.contains(side) && b[side].size() != n)
      out.push_back({ptr + "/" + side, "needs " + std::to_string(n) + " entries"});
}

void semantic_checks(const nlohmann::json& s, std::vector<ValidationIssue>& out) {
  const std::string pipeline = s["pipeline"].get<std::string>();
  std::size_t n = 0;
  std::optional<ProblemSpec> spec;
  if (needs_problem(pipeline)) {
    if (!s.contains("problem")) {
      out.push_back({"/problem", "required for pipeline '" + pipeline + "'"});
    } else {
      const auto& p = s["problem"];
      n = p["forces"].size();
      if (p["weights"].size() != n) out.push_back({"/problem/weights", "needs one weight per force"});
      if (p.contains("n") && p["n"].get<std::size_t>() != n) out.push_back({"/problem/n", "does not match forces"});
      for (std::size_t k = 0; k + 1 < n; ++k)
        if (!(p["forces"][k].get<double>() > p["forces"][k + 1].get<double>())) {
          out.push_back({"/problem/forces/" + std::to_string(k + 1), "forces must be strictly decreasing"});
          break;
        }
      if (out.empty()) {
        try {
          spec = load_problem(p);
        } catch (const Error& e) {
          out.push_back({"/problem", e.what()});
        }
      }
    }
  }
  if (needs_field(pipeline)) {
    if (!s.contains("domain")) {
      out.push_back({"/domain", "required for pipeline '" + pipeline + "'"});
    } else {
      const auto& d = s["domain"];
      const std::string type = d["type"].get<std::string>();
      const auto require = [&](const char* key) {
        if (!d.contains(key)) out.push_back({std::string("/domain/") + key, "required for a " + type + " domain"});
      };
      if (type == "disk") {
        require("radius");
        require("h");
      } else if (type == "rectangle") {
        require("x");
        require("y");
        require("h");
      } else {
        require("x");
        require("cells");
      }
      for (const char* key : {"x", "y"})
        if (d.contains(key) && d[key].size() == 2 && !(d[key][0].get<double>() < d[key][1].get<double>()))
          out.push_back({std::string("/domain/") + key, "needs lower < upper"});
      if (pipeline == "blowup" && type == "interval")
        out.push_back({"/domain/type", "blow-up needs a two-dimensional domain"});
    }
    if (!s.contains("boundary")) {
      out.push_back({"/boundary", "required for pipeline '" + pipeline + "'"});
    } else if (spec) {
      const auto& b = s["boundary"];
      if (b["type"] == "cone") {
        try {
          const Cone1D cone = b.contains("cone") ? make_cone(*spec, b["cone"].get<std::string>()) : least_energy_cone(*spec);
          if (!cone.connected()) out.push_back({"/boundary/cone", "boundary profiles need a connected cone"});
          for (const char* key : {"b0", "b1"}) {
            if (!b.contains(key)) continue;
            const std::size_t before = out.size();
            check_branch(b[key], n, std::string("/boundary/") + key, out);
            if (out.size() == before && cone.connected()) {
              const BranchVector v{b[key]["minus"].get<std::vector<double>>(), b[key]["plus"].get<std::vector<double>>()};
              if (!in_branch_space(cone, v, 1e-9))
                out.push_back({std::string("/boundary/") + key, "not in the branch space of cone " + cone.id()});
            }
          }
        } catch (const Error& e) {
          out.push_back({"/boundary/cone", e.what()});
        }
      }
    }
  }
  if (pipeline == "game" && spec) {
    for (std::size_t k = 0; k < n; ++k)
      if (s["problem"]["weights"][k].get<double>() != 1.0) {
        out.push_back({"/problem/weights/" + std::to_string(k), "the game uses unit weights"});
        break;
      }
    if (s.contains("game") && s["game"].contains("probes"))
      for (std::size_t i = 0; i < s["game"]["probes"].size(); ++i) {
        const auto t = s["game"]["probes"][i][2].get<std::size_t>();
        if (t < 1 || t > n) out.push_back({"/game/probes/" + std::to_string(i) + "/2", "ticket must be in 1..N"});
      }
  }
  if (pipeline == "rate") {
    if (!s.contains("rate"))
      out.push_back({"/rate", "required for pipeline 'rate'"});
    else if (s["rate"]["r"].size() != s["rate"]["epsilon"].size())
      out.push_back({"/rate/epsilon", "needs one value per radius"});
  }
}

using Clock = std::chrono::steady_clock;

struct Context {
  nlohmann::json scenario;
  RunOverrides overrides;
  std::uint64_t seed = 0;
  RunResult result;
  nlohmann::json tolerances = nlohmann::json::object();
  nlohmann::json calibration = nlohmann::json::object();
  nlohmann::json timings = nlohmann::json::object();

  template <class F>
  auto stage(const char* name, F&& f) {
    const auto t0 = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      timings[name] = std::chrono::duration<double>(Clock::now() - t0).count();
    } else {
      auto r = f();
      timings[name] = std::chrono::duration<double>(Clock::now() - t0).count();
      return r;
    }
  }

  void emit(const std::string& name, std::string text) { result.files[name] = std::move(text); }
};

ProblemSpec scenario_problem(const Context& c) { return load_problem(c.scenario["problem"]); }

Grid scenario_grid(const nlohmann::json& d) {
  const std::string type = d["type"].get<std::string>();
  if (type == "disk") {
    const auto center = d.value("center", std::vector<double>{0.0, 0.0});
    return Grid::disk(center[0], center[1], d["radius"].get<double>(), d["h"].get<double>());
  }
  const auto x = d["x"].get<std::vector<double>>();
  if (type == "rectangle") {
    const auto y = d["y"].get<std::vector<double>>();
    return Grid::rectangle(x[0], x[1], y[0], y[1], d["h"].get<double>());
  }
  return Grid::interval(x[0], x[1], d["cells"].get<std::size_t>());
}

BranchVector read_branch(const nlohmann::json& b, const char* key, std::size_t n) {
  if (!b.contains(key)) return BranchVector::zero(n);
  return {b[key]["minus"].get<std::vector<double>>(), b[key]["plus"].get<std::vector<double>>()};
}

FieldFunction scenario_data(const Context& c, const ProblemSpec& spec) {
  const auto& b = c.scenario["boundary"];
  const std::size_t n = spec.size();
  if (b["type"] == "cone") {
    const Cone1D cone = b.contains("cone") ? make_cone(spec, b["cone"].get<std::string>()) : least_energy_cone(spec);
    if (c.scenario["domain"]["type"] == "interval") {
      // 1D data is h(x, b0) itself; rotation and b1 only apply in the plane.
      auto sol = std::make_shared<PiecewiseQuadratic1D>(h_solution(cone, read_branch(b, "b0", n)));
      return [sol](double x, double, std::span<double> out) { sol->evaluate(x, out); };
    }
    auto ev = std::make_shared<ProfileEvaluator>(
        ApproximateProfile2D{cone, read_branch(b, "b0", n), read_branch(b, "b1", n), b.value("rotation", 0.0)});
    return [ev](double x, double y, std::span<double> out) { ev->eval(x, y, out); };
  }
  // Random ordered data: per-membrane trigonometric series in the polar
  // angle (cosine series in x for intervals), sorted pointwise.
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double amp = b.value("amplitude", 1.0);
  std::vector<std::array<double, 6>> a(n);
  for (auto& row : a)
    for (double& v : row) v = amp * u(rng);
  return [a](double x, double y, std::span<double> out) {
    const double t = std::atan2(y, x);
    for (std::size_t k = 0; k < a.size(); ++k)
      out[k] = a[k][0] * std::cos(t) + a[k][1] * std::sin(t) + 0.5 * a[k][2] * std::cos(2 * t) +
               0.5 * a[k][3] * std::sin(2 * t) + 0.3 * a[k][4] * std::cos(3 * t) + a[k][5];
    std::sort(out.begin(), out.end(), std::greater<double>());
  };
}

GridSolution solve_stage(Context& c, const ProblemSpec& spec) {
  const Grid grid = scenario_grid(c.scenario["domain"]);
  SolverOptions opt;
  const auto solver = c.scenario.value("solver", nlohmann::json::object());
  opt.tol = c.overrides.tol.value_or(solver.value("tol", 0.0));
  opt.max_sweeps = solver.value("max_sweeps", opt.max_sweeps);
  opt.relaxation = solver.value("relaxation", 0.0);
  opt.threads = c.overrides.threads;
  const FieldFunction data = scenario_data(c, spec);
  GridSolution sol = c.stage("solve", [&] { return solve(spec, grid, data, opt); });
  c.tolerances["solver_tol"] = sol.stats.tol;
  c.tolerances["max_sweeps"] = opt.max_sweeps;
  c.calibration["relaxation"] = sol.stats.relaxation;
  return sol;
}

Point2 analysis_center(const Context& c) {
  const auto a = c.scenario.value("analysis", nlohmann::json::object());
  const auto v = a.value("center", std::vector<double>{0.0, 0.0});
  return {v[0], v[1]};
}

std::vector<double> analysis_radii(const Context& c, std::vector<double> fallback) {
  const auto a = c.scenario.value("analysis", nlohmann::json::object());
  return a.value("radii", std::move(fallback));
}

void run_cones(Context& c) {
  const ProblemSpec spec = scenario_problem(c);
  const auto cones = c.stage("enumerate", [&] { return enumerate_cones(spec); });
  nlohmann::json list = nlohmann::json::array();
  std::size_t connected = 0;
  for (const Cone1D& cone : cones) {
    nlohmann::json j = cone_to_json(cone);
    j["weiss"] = weiss_of_cone(cone);
    if (cone.connected()) {
      ++connected;
      j["tau"] = to_json(tau(cone));
    }
    list.push_back(j);
  }
  nlohmann::json out = {{"problem", spec}, {"count", cones.size()}, {"connected", connected}, {"cones", list}};
  c.emit("cones.json", dump_json(out));
  c.result.summary = std::to_string(cones.size()) + " cones, " + std::to_string(connected) + " connected";
}

void run_solve(Context& c) {
  const ProblemSpec spec = scenario_problem(c);
  const GridSolution sol = solve_stage(c, spec);
  const auto a = c.scenario.value("analysis", nlohmann::json::object());
  const double ctol = a.value("coincidence_tol", default_coincidence_tol(sol));
  c.tolerances["coincidence_tol"] = ctol;
  const ResidualReport rep = c.stage("residual", [&] { return residual(sol, ctol); });
  nlohmann::json fb = nlohmann::json::array();
  for (std::size_t k = 1; k < spec.size(); ++k) {
    try {
      const auto curve = extract_free_boundary(sol, k, ctol);
      c.emit("free_boundary_" + std::to_string(k) + ".csv", curve_csv(curve));
      fb.push_back({{"pair", k}, {"polylines", curve.polylines.size()}, {"vertices", curve.vertex_count()}});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyFreeBoundary) throw;
      fb.push_back({{"pair", k}, {"polylines", 0}, {"vertices", 0}});
    }
  }
  c.emit("field.csv", field_csv(sol));
  c.emit("residual.json", dump_json({{"grid", grid_to_json(sol.grid)},
                                     {"stats", to_json(sol.stats)},
                                     {"residual", to_json(rep)},
                                     {"free_boundaries", fb},
                                     {"energy", discrete_energy(sol)}}));
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu sweeps, kkt_residual %.3e", sol.stats.sweeps, rep.kkt_residual);
  c.result.summary = buf;
}

void run_weiss(Context& c) {
  const ProblemSpec spec = scenario_problem(c);
  const GridSolution sol = solve_stage(c, spec);
  const Point2 center = analysis_center(c);
  const auto radii = analysis_radii(c, {0.25, 0.4, 0.55, 0.7, 0.85});
  const WeissProfile w = c.stage("weiss", [&] { return weiss(sol, center, radii); });
  const double cq = c.stage("calibrate", [&] { return calibrate_weiss_slack(spec, sol.grid.h); });
  c.calibration["weiss_slack_constant"] = cq;
  nlohmann::json out = {{"profile", to_json(w)}, {"least_energy_weiss", weiss_of_cone(least_energy_cone(spec))}};
  if (radii.size() >= 3) out["monotonicity"] = to_json(monotonicity_check(w, cq));
  c.emit("weiss.csv", weiss_csv(w));
  c.emit("weiss.json", dump_json(out));
  c.result.summary = std::to_string(radii.size()) + " radii";
}

void run_blowup(Context& c) {
  const ProblemSpec spec = scenario_problem(c);
  const GridSolution sol = solve_stage(c, spec);
  if (sol.grid.dimension != 2) throw Error(ErrorKind::InvalidArgument, "blow-up needs a two-dimensional domain");
  const Point2 center = analysis_center(c);
  const auto radii = analysis_radii(c, {0.8, 0.4, 0.2, 0.1});
  const auto a = c.scenario.value("analysis", nlohmann::json::object());
  const double target_h = a.value("target_h", 1.0 / 32);
  c.tolerances["target_h"] = target_h;
  const Grid target = Grid::disk(0.0, 0.0, 1.0, target_h);
  const auto catalogue = enumerate_cones(spec);
  nlohmann::json fits = nlohmann::json::array();
  std::vector<double> eps;
  c.stage("fit", [&] {
    for (double r : radii) {
      const GridSolution v = blowup_rescale(sol, center, r, target);
      const FitResult f = fit_cone(v, {0.0, 0.0}, 0.95, catalogue);
      nlohmann::json j = to_json(f);
      j["scale"] = r;
      fits.push_back(j);
      eps.push_back(f.epsilon);
    }
  });
  nlohmann::json out = {{"fits", fits}};
  try {
    const RateFit rf = rate_fit(radii, eps);
    out["rate"] = to_json(rf);
    c.emit("rate.csv", rate_csv(rf));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
    out["rate"] = nullptr;
    out["rate_note"] = e.what();
  }
  c.emit("blowup.json", dump_json(out));
  c.result.summary = std::to_string(radii.size()) + " blow-up fits";
}

void run_game(Context& c) {
  const ProblemSpec spec = scenario_problem(c);
  const Grid lattice = scenario_grid(c.scenario["domain"]);
  const FieldFunction phi = scenario_data(c, spec);
  const GameSpec game = make_game(spec.forces, lattice, phi);
  const double tol = c.overrides.tol.value_or(c.scenario.value("solver", nlohmann::json::object()).value("tol", 1e-13));
  c.tolerances["bellman_tol"] = tol;
  const ValueTable table = c.stage("bellman", [&] { return bellman_solve(game, tol > 0.0 ? tol : 1e-13); });
  const GridSolution as_pde = as_solution(game, table);
  const double ctol = default_coincidence_tol(as_pde);
  c.tolerances["coincidence_tol"] = ctol;
  const ResidualReport rep = residual(as_pde, ctol);

  const auto g = c.scenario.value("game", nlohmann::json::object());
  const std::size_t walks = g.value("walks", std::size_t{100000});
  nlohmann::json probes = nlohmann::json::array();
  c.stage("monte_carlo", [&] {
    for (const auto& p : g.value("probes", nlohmann::json::array())) {
      const auto i = p[0].get<std::size_t>();
      const auto j = p[1].get<std::size_t>();
      const auto k = p[2].get<std::size_t>();
      if (i >= lattice.nx || j >= lattice.ny || !lattice.interior(lattice.index(i, j)))
        throw ValidationError({{"/game/probes", "probe (" + std::to_string(i) + ", " + std::to_string(j) +
                                                    ") is not an interior lattice node"}});
      const std::size_t node = lattice.index(i, j);
      const MonteCarloResult mc = monte_carlo_eval(game, table, node, k, walks, c.seed, c.overrides.threads);
      nlohmann::json e = to_json(mc);
      e["bellman"] = table.at(node, k - 1);
      e["z"] = (mc.mean - table.at(node, k - 1)) / mc.se;
      probes.push_back(e);
    }
  });
  c.emit("values.csv", field_csv(as_pde));
  c.emit("game.json", dump_json({{"lattice", grid_to_json(lattice)},
                                 {"iterations", table.iterations},
                                 {"last_change", table.last_change},
                                 {"round_costs", [&] {
                                    std::vector<double> v;
                                    for (std::size_t k = 0; k < game.tickets(); ++k) v.push_back(game.round_cost(k));
                                    return v;
                                  }()},
                                 {"pde_residual", to_json(rep)},
                                 {"probes", probes}}));
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu sweeps, %zu probes", table.iterations, probes.size());
  c.result.summary = buf;
}

void run_rate(Context& c) {
  const auto r = c.scenario["rate"]["r"].get<std::vector<double>>();
  const auto e = c.scenario["rate"]["epsilon"].get<std::vector<double>>();
  const RateFit fit = c.stage("fit", [&] { return rate_fit(r, e); });
  c.emit("rate.json", dump_json(to_json(fit)));
  c.emit("rate.csv", rate_csv(fit));
  c.result.summary = std::string("preferred model: ") + (fit.preferred == RateModel::Log ? "log" : "power");
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error([&] {
        std::string s = "invalid scenario";
        for (const auto& i : issues) s += "\n  " + (i.pointer.empty() ? std::string("/") : i.pointer) + ": " + i.message;
        return s;
      }()),
      issues_(std::move(issues)) {}

const nlohmann::json& scenario_schema() {
  static const nlohmann::json schema = nlohmann::json::parse(kSchemaText);
  return schema;
}

std::vector<ValidationIssue> validate_against(const nlohmann::json& schema, const nlohmann::json& doc) {
  std::vector<ValidationIssue> out;
  SchemaWalker(schema, out).check(schema, doc, "");
  return out;
}

std::vector<ValidationIssue> validate_scenario(const nlohmann::json& scenario) {
  auto out = validate_against(scenario_schema(), scenario);
  if (out.empty()) semantic_checks(scenario, out);
  return out;
}

RunResult run_scenario(std::string_view text, const RunOverrides& overrides) {
  nlohmann::json scenario;
  try {
    scenario = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError({{"", std::string("not valid JSON: ") + e.what()}});
  }
  if (overrides.pipeline && scenario.is_object()) {
    if (!scenario.contains("pipeline"))
      scenario["pipeline"] = *overrides.pipeline;
    else if (scenario["pipeline"] != *overrides.pipeline)
      throw ValidationError({{"/pipeline", "scenario is for '" + scenario["pipeline"].dump() + "', not '" +
                                               *overrides.pipeline + "'"}});
  }
  if (auto issues = validate_scenario(scenario); !issues.empty()) throw ValidationError(std::move(issues));

  Context c;
  c.scenario = scenario;
  c.overrides = overrides;
  c.seed = overrides.seed.value_or(scenario.value("seed", std::uint64_t{0}));
  const auto t0 = Clock::now();
  const std::string pipeline = scenario["pipeline"].get<std::string>();
  if (pipeline == "cones")
    run_cones(c);
  else if (pipeline == "solve")
    run_solve(c);
  else if (pipeline == "weiss")
    run_weiss(c);
  else if (pipeline == "blowup")
    run_blowup(c);
  else if (pipeline == "game")
    run_game(c);
  else
    run_rate(c);
  c.timings["total"] = std::chrono::duration<double>(Clock::now() - t0).count();

  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& [name, text_out] : c.result.files)
    outputs.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a64(text_out))}, {"bytes", text_out.size()}});
  c.result.manifest = {
      {"tool", "nmembrane"},
      {"versions",
       {{"nmembrane", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                     "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"compiler", __VERSION__}}},
      {"pipeline", pipeline},
      {"name", scenario.value("name", "")},
      {"input_fnv1a64", hex64(fnv1a64(text))},
      {"seed", c.seed},
      {"threads", overrides.threads},
      {"tolerances", c.tolerances},
      {"calibration", c.calibration},
      {"timings", c.timings},
      {"outputs", outputs}};
  return std::move(c.result);
}

}  // namespace nmembrane
