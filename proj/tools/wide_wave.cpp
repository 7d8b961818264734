#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "wide/harness.hpp"

namespace {

void print_report(const wide::Report& r, const std::string& prefix) {
  for (const auto& c : r.checks)
    std::printf("%s%-4s %-40s margin=% .4e %s\n", prefix.c_str(), c.pass ? "ok" : "FAIL", c.name.c_str(), c.margin,
                c.detail.c_str());
}

int run(const std::string& path, bool calibrate) {
  const wide::Config cfg = wide::Config::load(path);
  const auto base = std::filesystem::path(path).parent_path().string();
  wide::Scenario s = wide::scenario_from_config(cfg, base);
  if (calibrate) s.constants = {};
  const std::string out =
      (std::filesystem::path(wide::output_root()) / std::filesystem::path(path).stem()).string();
  const wide::SweepResult r = wide::run_scenario(s, {out, false});

  std::printf("scenario %s  W = %s  theta = %g\n", s.name.c_str(), wide::describe(s).c_str(),
              wide::prescribed_theta(s));
  std::printf("%-8s %-6s %-6s %6s %14s %12s %12s %10s\n", "eps", "method", "conv", "iters", "J", "grad", "ref_dist",
              "wall_s");
  for (const auto& row : r.rows) {
    char dist[32] = "n/a";
    if (row.ref_distance) std::snprintf(dist, sizeof dist, "%.4e", *row.ref_distance);
    else if (row.cauchy_distance) std::snprintf(dist, sizeof dist, "~%.4e", *row.cauchy_distance);
    std::printf("%-8g %-6s %-6s %6d %14.6e %12.4e %12s %10.2f\n", row.eps, row.method.c_str(),
                row.completed ? (row.converged ? "yes" : "no") : "abort", row.iterations, row.j_value, row.grad_norm,
                dist, row.wall_seconds);
  }
  for (const auto& row : r.rows) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "[eps %g] ", row.eps);
    print_report(row.checks, tag);
  }
  print_report(r.sweep_checks, "[sweep] ");
  std::printf("output: %s\n", out.c_str());

  if (calibrate) {
    const wide::Calibration c = r.calibrate();
    wide::write_constants(path, c);
    std::printf("calibrated C_level=%g C_e0=%g C_R=%g written to %s\n", *c.C_level, *c.C_e0, *c.C_R, path.c_str());
    // Re-check the frozen constants against the run that produced them.
    s.constants = c;
    const bool ok = wide::run_scenario(s).pass();
    return ok ? 0 : 2;
  }
  return r.pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wide-wave: space-time minimization for semilinear wave equations"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run an eps sweep from a config file");
  std::string config;
  bool calibrate = false;
  run_cmd->add_option("config", config, "scenario config")->required();
  run_cmd->add_flag("--calibrate", calibrate, "fit and store the scenario constants");

  auto* lemmas_cmd = app.add_subcommand("verify-lemmas", "run the averaging, Poincare, Gronwall and source suites");
  std::uint64_t seed = 20240601;
  lemmas_cmd->add_option("--seed", seed, "random seed");

  auto* list_cmd = app.add_subcommand("list-scenarios", "list the scenario catalog");

  auto* cmp_cmd = app.add_subcommand("compare", "sup-in-time L2 distance between two stored runs");
  std::string run_a, run_b;
  double T = 1.0, length = wide::kTwoPi;
  cmp_cmd->add_option("runA", run_a, "trajectory file")->required();
  cmp_cmd->add_option("runB", run_b, "trajectory file")->required();
  cmp_cmd->add_option("--T", T, "final time");
  cmp_cmd->add_option("--length", length, "torus side length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return run(config, calibrate);
    if (*lemmas_cmd) {
      wide::LemmaSuiteOptions opt;
      opt.seed = seed;
      const wide::Report lem = wide::verify_lemmas(opt);
      const wide::Report src = wide::verify_sources({0.25, 0.1, 0.05});
      print_report(lem, "[lemmas] ");
      print_report(src, "[sources] ");
      return lem.pass() && src.pass() ? 0 : 2;
    }
    if (*list_cmd) {
      for (const auto& name : wide::scenario_names()) {
        const wide::Scenario s = wide::preset(name);
        std::printf("%-13s theta=%-6.4g %s\n", name.c_str(), wide::prescribed_theta(s), wide::describe(s).c_str());
      }
      return 0;
    }
    if (*cmp_cmd) {
      const auto a = wide::read_binary(run_a, length);
      const auto b = wide::read_binary(run_b, length);
      std::printf("%.12g\n", wide::compare_runs(a, b, T));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
