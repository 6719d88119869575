#include <optional>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nmembrane/analysis.hpp"
#include "nmembrane/error.hpp"
#include "nmembrane/io.hpp"
#include "nmembrane/projection.hpp"
#include "nmembrane/scenario.hpp"
#include "nmembrane/verify.hpp"
#include "nmembrane/version.hpp"

namespace py = pybind11;
using namespace nmembrane;

namespace {

ProblemSpec make_spec(std::vector<double> weights, std::vector<double> forces) {
  ProblemSpec s{std::move(weights), std::move(forces)};
  validate(s);
  return normalize(s);
}

py::dict cone_dict(const Cone1D& c) {
  const auto a = cone_coefficients(c);
  py::dict d;
  d["id"] = c.id();
  d["connected"] = c.connected();
  d["minus"] = a.minus;
  d["plus"] = a.plus;
  d["weiss"] = weiss_of_cone(c);
  return d;
}

BranchVector branch(std::vector<double> minus, std::vector<double> plus) { return {std::move(minus), std::move(plus)}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "N-membrane obstacle problem toolkit";
  m.attr("__version__") = kVersion;

  static py::exception<Error> error(m, "NmembraneError", PyExc_RuntimeError);
  static py::exception<ValidationError> invalid(m, "ScenarioError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      invalid(e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def("normalize", [](std::vector<double> w, std::vector<double> f) {
    const ProblemSpec s = make_spec(std::move(w), std::move(f));
    return py::make_tuple(s.weights, s.forces);
  });
  m.def("isotonic_project", [](std::vector<double> v, std::vector<double> w) { return isotonic_project(v, w); },
        py::arg("v"), py::arg("weights"));
  m.def("qp_oracle_project", [](std::vector<double> v, std::vector<double> w) { return qp_oracle_project(v, w); },
        py::arg("v"), py::arg("weights"));

  m.def("enumerate_cones", [](std::vector<double> w, std::vector<double> f) {
    py::list out;
    for (const Cone1D& c : enumerate_cones(make_spec(std::move(w), std::move(f)))) out.append(cone_dict(c));
    return out;
  });
  m.def("tau", [](std::vector<double> w, std::vector<double> f, const std::string& id) {
    const BranchVector t = tau(make_cone(make_spec(std::move(w), std::move(f)), id));
    return py::make_tuple(t.minus, t.plus);
  });
  m.def(
      "h_eval",
      [](std::vector<double> w, std::vector<double> f, const std::string& id, std::vector<double> minus,
         std::vector<double> plus, double x) {
        return h_eval(make_cone(make_spec(std::move(w), std::move(f)), id), branch(minus, plus), x);
      },
      py::arg("weights"), py::arg("forces"), py::arg("cone"), py::arg("minus"), py::arg("plus"), py::arg("x"));
  m.def(
      "b_to_gamma",
      [](std::vector<double> w, std::vector<double> f, const std::string& id, std::vector<double> minus,
         std::vector<double> plus) {
        return b_to_gamma(make_cone(make_spec(std::move(w), std::move(f)), id), branch(minus, plus));
      },
      py::arg("weights"), py::arg("forces"), py::arg("cone"), py::arg("minus"), py::arg("plus"));

  m.def(
      "solve_disk",
      [](std::vector<double> w, std::vector<double> f, std::optional<std::string> cone, double rotation, double h,
         double radius, double tol, unsigned threads) {
        const ProblemSpec s = make_spec(std::move(w), std::move(f));
        const Cone1D c = cone ? make_cone(s, *cone) : least_energy_cone(s);
        ProfileEvaluator ev({c, BranchVector::zero(s.size()), BranchVector::zero(s.size()), rotation});
        SolverOptions opt;
        opt.tol = tol;
        opt.threads = threads;
        GridSolution sol;
        {
          py::gil_scoped_release release;
          sol = solve(s, Grid::disk(0.0, 0.0, radius, h),
                      [&](double x, double y, std::span<double> out) { ev.eval(x, y, out); }, opt);
        }
        const Grid& g = sol.grid;
        const std::size_t n = s.size();
        std::vector<double> xs, ys, us;
        std::vector<int> kind;
        for (std::size_t node = 0; node < g.size(); ++node) {
          if (!g.active(node)) continue;
          xs.push_back(g.x(node % g.nx));
          ys.push_back(g.y(node / g.nx));
          kind.push_back(static_cast<int>(g.kind[node]));
          for (std::size_t k = 0; k < n; ++k) us.push_back(sol.at(node, k));
        }
        py::array_t<double> u({xs.size(), n});
        std::copy(us.begin(), us.end(), u.mutable_data());
        const ResidualReport rep = residual(sol, default_coincidence_tol(sol));
        py::dict d;
        d["x"] = py::array_t<double>(xs.size(), xs.data());
        d["y"] = py::array_t<double>(ys.size(), ys.data());
        d["kind"] = py::array_t<int>(kind.size(), kind.data());
        d["u"] = u;
        d["sweeps"] = sol.stats.sweeps;
        d["kkt_residual"] = rep.kkt_residual;
        d["weighted_laplacian_sum"] = rep.weighted_laplacian_sum;
        return d;
      },
      py::arg("weights"), py::arg("forces"), py::arg("cone") = py::none(), py::arg("rotation") = 0.0,
      py::arg("h") = 1.0 / 32, py::arg("radius") = 1.0, py::arg("tol") = 0.0, py::arg("threads") = 1U);

  m.def(
      "run_scenario",
      [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<double> tol, unsigned threads) {
        RunOverrides ov;
        ov.seed = seed;
        ov.tol = tol;
        ov.threads = threads;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_scenario(text, ov);
        }
        py::dict files;
        for (const auto& [name, body] : r.files) files[py::str(name)] = py::bytes(body);
        return py::make_tuple(files, dump_json(r.manifest));
      },
      py::arg("text"), py::arg("seed") = py::none(), py::arg("tol") = py::none(), py::arg("threads") = 1U);

  m.def("schema", [] { return dump_json(scenario_schema()); });

  m.def(
      "verify",
      [](const std::string& suite, std::uint64_t seed) {
        VerifyOptions o;
        o.seed = seed;
        std::vector<CheckResult> results;
        {
          py::gil_scoped_release release;
          results = run_suite(suite, o);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["id"] = r.id;
          d["name"] = r.name;
          d["pass"] = r.pass;
          d["detail"] = r.detail;
          d["seconds"] = r.seconds;
          out.append(d);
        }
        return out;
      },
      py::arg("suite"), py::arg("seed") = VerifyOptions{}.seed);
}
