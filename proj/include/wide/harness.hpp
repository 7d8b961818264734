#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wide/config.hpp"
#include "wide/diagnostics.hpp"
#include "wide/energy.hpp"
#include "wide/grid.hpp"
#include "wide/report.hpp"
#include "wide/source.hpp"
#include "wide/trajectory.hpp"

namespace wide {

struct Calibration {
  std::optional<double> C_level;  // H <= W(w0) + C eps
  std::optional<double> C_e0;     // E(0) <= |w1|^2/2 + W(w0) + C sqrt(eps)
  std::optional<double> C_R;      // |R| <= C eps
};

struct Scenario {
  // dalembert, klein_gordon, biharmonic, nlw, sine_gordon, p_laplace, beam,
  // kirchhoff, fractional
  std::string name = "dalembert";
  double p = 4.0;
  std::optional<double> q;
  double s = 0.5;
  double lambda = 1.0;

  int dim = 1;
  int points = 128;
  double length = kTwoPi;

  // sine: w0 = a0 sin x [sin y], w1 = a1 cos x [cos y]
  // bump: w0 = a0 exp(-4 |x - c|^2), w1 = a1 times the same
  // random: a few low modes drawn from seed
  // zero: w0 = w1 = 0
  std::string initial = "sine";
  double w0_amplitude = 1.0;
  double w1_amplitude = 0.0;
  std::uint64_t seed = 1;

  // none, pulse, smooth, unit, decaying, csv
  std::string source = "none";
  double source_amplitude = 1.0;
  double source_t_end = 1.0;
  std::string source_path;

  std::vector<double> eps_list{0.25, 0.1, 0.05};
  double T_phys = 1.0;
  double ds = 0.05;
  double tail_pad = 12.0;
  double k_cut = 4.0;
  double beta = 2.0;

  double tol_grad = 0.0;
  int max_iter = 5000;
  int memory = 10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  bool first_order_bc = false;
  double p_laplace_mu = 1e-8;

  // auto: on exactly when the weak-solution item applies to the energy.
  std::string reference = "auto";
  double ref_dt = 0.0;  // 0 selects min(ds eps_min / 4, stable step)
  // Relative sup distance required at the smallest eps; negative means
  // report only. Unset: 0.05 for unforced runs, report only otherwise.
  std::optional<double> ref_rel_tol;

  Calibration constants;

  EnergySpec energy() const;
  GridPtr grid() const;
  Field w0(const GridPtr& g) const;
  Field w1(const GridPtr& g) const;
  SourceSpec source_spec(const GridPtr& g) const;
  bool reference_enabled() const;
  void validate() const;
};

std::vector<std::string> scenario_names();
// Preset with the default data and source for the family.
Scenario preset(const std::string& name);
// Growth exponent prescribed for the scenario family and parameters.
double prescribed_theta(const Scenario& s);
// Short description of W for listings.
std::string describe(const Scenario& s);

// Parses a scenario from a config; relative source paths resolve against base_dir.
Scenario scenario_from_config(const Config& c, const std::string& base_dir = ".");
Config scenario_to_config(const Scenario& s);

struct EpsRow {
  double eps = 0.0;
  bool completed = false;  // false if the source assumptions failed
  double wall_seconds = 0.0;
  Report checks;

  double j_value = 0.0, h_value = 0.0, s_value = 0.0, j_affine = 0.0;
  double grad_norm = 0.0, tol_grad = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string method;

  double level_excess = 0.0;  // (H - W(w0)) / eps
  double e0_excess = 0.0;     // (E(0) - |w1|^2/2 - W(w0)) / sqrt(eps)
  double R = 0.0;
  double E0 = 0.0;
  double sweep_margin = 0.0;
  double energy_increase = 0.0;
  double enineq_margin = 0.0, enineq_rhs = 0.0;
  double relation_defect = 0.0, ederiv_defect = 0.0;
  double kprime_defect = 0.0;
  EnergyBounds bounds;
  std::optional<WeakFormDefect> weak;
  // Distance to the classical solution driven by this eps's windowed source.
  std::optional<double> ref_distance;
  std::optional<double> ref_norm;
  // Forced runs: distance to the classical solution driven by the unwindowed source.
  std::optional<double> limit_distance;
  std::optional<double> cauchy_distance;  // to the next smaller eps

  std::optional<DiagnosticsSeries> series;
  std::optional<Trajectory> physical;  // rescaled minimizer
};

struct SweepResult {
  std::string scenario;
  std::vector<EpsRow> rows;  // eps descending
  Report sweep_checks;
  std::optional<Trajectory> reference;  // driven by the unwindowed source

  bool pass() const;
  // 2x the largest observed value over the completed rows (floored at 0).
  Calibration calibrate() const;
};

struct RunOptions {
  std::string out_dir;  // empty: no files
  bool keep_trajectories = false;
};

SweepResult run_scenario(const Scenario& s, const RunOptions& opt = {});

// sup over the nodes of a with t <= T of the L2 distance to b (b interpolated).
double compare_runs(const Trajectory& a, const Trajectory& b, double T);

// Output directory from WIDE_WAVE_OUT, default "wide-wave-out".
std::string output_root();

// Writes summary.csv and the series CSVs; trajectories as binary frames.
void write_sweep(const SweepResult& r, const std::string& dir);

// Replaces the [constants] section of a config file in place.
void write_constants(const std::string& path, const Calibration& c);

struct LemmaSuiteOptions {
  std::uint64_t seed = 1;
  int identity_cases = 1000;
  int poincare_cases = 1000;
  int gronwall_positive = 200;
  int gronwall_negative = 50;
};

// Randomized checks of the averaging identities, the weighted Poincare
// inequalities and the Gronwall variant.
Report verify_lemmas(const LemmaSuiteOptions& opt = {});

// Windowing properties and phi assumptions for every preset at every eps.
Report verify_sources(const std::vector<double>& eps_list = {0.25, 0.1, 0.05});

}  // namespace wide
