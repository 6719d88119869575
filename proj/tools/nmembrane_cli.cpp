// nmembrane: scenario runner and acceptance checks.
//
//   nmembrane solve --scenario disk.json --out results/disk
//   nmembrane verify weiss
//
// Exit codes: 0 success, 1 internal error, 2 invalid input, 3 solver did not
// converge.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nmembrane/error.hpp"
#include "nmembrane/io.hpp"
#include "nmembrane/scenario.hpp"
#include "nmembrane/verify.hpp"

namespace fs = std::filesystem;
using namespace nmembrane;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNotConverged = 3;

struct RunArgs {
  std::string scenario;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 1;
  double tol = 0.0;
  bool tol_set = false;
};

bool is_input_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotConverged:
    case ErrorKind::TooLarge:
    case ErrorKind::NoRegionFound:
      return false;
    default:
      return true;
  }
}

int run_pipeline(const RunArgs& a, std::optional<std::string> pipeline) {
  std::ifstream in(a.scenario, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read scenario '" << a.scenario << "'\n";
    return kExitInvalid;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  RunOverrides ov;
  if (a.seed_set) ov.seed = a.seed;
  if (a.tol_set) ov.tol = a.tol;
  ov.threads = a.threads;
  ov.pipeline = std::move(pipeline);
  try {
    RunResult r = run_scenario(buf.str(), ov);
    fs::create_directories(a.out);
    for (const auto& [name, text] : r.files) write_text(fs::path(a.out) / name, text);
    write_text(fs::path(a.out) / "manifest.json", dump_json(r.manifest));
    std::cout << r.manifest["pipeline"].get<std::string>() << ": " << r.summary << " -> " << a.out << "\n";
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.kind() == ErrorKind::NotConverged) return kExitNotConverged;
    return is_input_error(e.kind()) ? kExitInvalid : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

void add_run_options(CLI::App* sub, RunArgs& a) {
  sub->add_option("-s,--scenario", a.scenario, "Scenario JSON file")->required();
  sub->add_option("-o,--out", a.out, "Output directory")->capture_default_str();
  sub->add_option_function<std::uint64_t>(
      "--seed", [&a](std::uint64_t s) { a.seed = s, a.seed_set = true; }, "Override the scenario seed");
  sub->add_option("--threads", a.threads, "Worker threads")->check(CLI::Range(1U, 256U))->capture_default_str();
  sub->add_option_function<double>(
      "--tol", [&a](double t) { a.tol = t, a.tol_set = true; }, "Override the solver tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"N-membrane obstacle problem toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nmembrane 0.1.0");

  RunArgs args;
  int rc = 0;
  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"cones", "Enumerate the one-dimensional cone catalogue"},
      {"solve", "Solve the membrane system on a grid"},
      {"blowup", "Blow-up rescalings and cone fits at a point"},
      {"weiss", "Weiss energy profile and monotonicity check"},
      {"game", "Ticket game: value iteration and Monte Carlo"},
      {"rate", "Fit log and power rate models to (r, eps) data"},
  };
  for (const auto& [verb, help] : verbs) {
    CLI::App* sub = app.add_subcommand(verb, help);
    add_run_options(sub, args);
    sub->callback([&, v = verb] { rc = run_pipeline(args, v); });
  }
  CLI::App* run = app.add_subcommand("run", "Run the pipeline named in the scenario");
  add_run_options(run, args);
  run->callback([&] { rc = run_pipeline(args, std::nullopt); });

  std::string suite = "all";
  std::string verify_out;
  VerifyOptions vo;
  CLI::App* verify = app.add_subcommand("verify", "Run acceptance checks");
  verify->add_option("suite", suite, "Suite name")->check(CLI::IsMember(suite_names()))->capture_default_str();
  verify->add_option("--seed", vo.seed, "Random seed")->capture_default_str();
  verify->add_option("--threads", vo.threads, "Worker threads")->check(CLI::Range(1U, 256U));
  verify->add_option("-o,--out", verify_out, "Write verify.json into this directory");
  verify->callback([&] {
    const auto results = run_suite(suite, vo);
    std::cout << format_table(results);
    bool ok = true;
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : results) {
      ok = ok && r.pass;
      j.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail},
                   {"seconds", r.seconds}, {"metrics", r.metrics}});
    }
    if (!verify_out.empty()) {
      fs::create_directories(verify_out);
      write_text(fs::path(verify_out) / "verify.json", dump_json({{"suite", suite}, {"seed", vo.seed}, {"checks", j}}));
    }
    rc = ok ? 0 : 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }
  return rc;
}
