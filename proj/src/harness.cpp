#include "wide/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "wide/reference.hpp"
#include "wide/spacetime.hpp"

namespace wide {

namespace {

// Distances below this (relative) count as already converged in trend checks.
constexpr double kNegligible = 1e-13;

const std::vector<std::string> kNames = {"dalembert", "klein_gordon", "biharmonic", "nlw",      "sine_gordon",
                                         "p_laplace", "beam",         "kirchhoff",  "fractional"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "n/a"; }

Field modes_field(const GridPtr& g, std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double k0 = kTwoPi / g->length();
  struct Mode {
    double a, kx, ky, ph;
  };
  std::vector<Mode> ms;
  for (int j = 1; j <= 4; ++j) {
    const double kx = j * k0;
    const double ky = g->dim() == 2 ? ((j % 2) + 1) * k0 : 0.0;
    ms.push_back({amplitude * u(rng) / j, kx, ky, M_PI * u(rng)});
  }
  return Field::from_function(g, [&](double x, double y) {
    double s = 0.0;
    for (const Mode& m : ms) s += m.a * std::cos(m.kx * x + m.ky * y + m.ph);
    return s;
  });
}

// Smooth admissible perturbation for the stationarity check.
Trajectory random_direction(const MinProblem& p, std::mt19937_64& rng) {
  Trajectory eta(p.w0.grid, p.ds, p.count(), p.eps);
  const Field shape = modes_field(p.w0.grid, rng, 1.0);
  const Field shape2 = modes_field(p.w0.grid, rng, 1.0);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  const double rate = u(rng), freq = u(rng);
  for (std::size_t i = 2; i < eta.count(); ++i) {
    const double s = eta.time(i);
    const double a = s * s * std::exp(-s / (rate * 4.0)), b = std::sin(freq * s) * s * s / (1.0 + s * s);
    auto f = eta.frame(i);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = a * shape.values[k] + b * shape2.values[k];
  }
  auto e1 = eta.frame(1);
  const auto e2 = eta.frame(2);
  for (std::size_t k = 0; k < e1.size(); ++k) e1[k] = p.first_order_bc ? 0.0 : e2[k] / 4.0;
  return eta;
}

double node_at_or_below(double t, double step) {
  return std::floor(t / step + 1e-9) * step;
}

TimeSeries lemma_series(std::mt19937_64& rng, bool nonnegative, Tail tail) {
  std::uniform_int_distribution<int> count(2, 25);
  std::uniform_real_distribution<double> step(0.01, 2.0);
  std::uniform_real_distribution<double> val(nonnegative ? 0.0 : -3.0, 3.0);
  const int n = count(rng);
  std::vector<double> nodes(n), values(n);
  for (int i = 1; i < n; ++i) nodes[i] = nodes[i - 1] + step(rng);
  for (int i = 0; i < n; ++i) values[i] = val(rng);
  return TimeSeries(nodes, values, tail);
}

}  // namespace

// ---------------------------------------------------------------- scenarios

std::vector<std::string> scenario_names() { return kNames; }

Scenario preset(const std::string& name) {
  if (std::find(kNames.begin(), kNames.end(), name) == kNames.end())
    throw std::invalid_argument("unknown scenario '" + name + "'");
  Scenario s;
  s.name = name;
  s.source = "smooth";
  if (name == "dalembert") {
    s.source = "pulse";
  } else if (name == "klein_gordon") {
    s.w1_amplitude = 0.5;
  } else if (name == "beam") {
    s.q = 3.0;
  }
  return s;
}

EnergySpec Scenario::energy() const {
  if (name == "dalembert") return EnergySpec(GeneralSemilinear{1.0, {}});
  if (name == "klein_gordon") return EnergySpec(GeneralSemilinear{1.0, {{0, lambda, 2.0}}});
  if (name == "biharmonic") return EnergySpec(GeneralSemilinear{2.0, {}});
  if (name == "nlw") return EnergySpec(GeneralSemilinear{1.0, {{0, lambda, p}}});
  if (name == "sine_gordon") return EnergySpec(SineGordon{});
  if (name == "p_laplace") {
    PLaplacian pl{p, std::nullopt, p_laplace_mu};
    if (q) pl.lower = PLaplacian::Lower{*q, lambda};
    return EnergySpec(pl);
  }
  if (name == "beam") return EnergySpec(GeneralSemilinear{2.0, {{1, lambda, p}, {0, lambda, q.value_or(2.0)}}});
  if (name == "kirchhoff") return EnergySpec(Kirchhoff{});
  if (name == "fractional") return EnergySpec(FractionalNLW{s, lambda, p});
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

double prescribed_theta(const Scenario& s) {
  const std::string& n = s.name;
  if (n == "dalembert" || n == "klein_gordon" || n == "biharmonic" || n == "sine_gordon") return 0.5;
  if (n == "nlw") return 1.0 - 1.0 / std::max(2.0, s.p);
  if (n == "p_laplace") return s.q ? 1.0 - 1.0 / std::max(s.p, *s.q) : 1.0 - 1.0 / s.p;
  if (n == "beam") return 1.0 - 1.0 / std::max({2.0, s.p, s.q.value_or(2.0)});
  if (n == "kirchhoff") return 0.75;
  if (n == "fractional") return s.lambda > 0.0 ? 1.0 - 1.0 / std::max(2.0, s.p) : 0.5;
  throw std::invalid_argument("unknown scenario '" + n + "'");
}

std::string describe(const Scenario& s) {
  char buf[200];
  const std::string& n = s.name;
  if (n == "dalembert") return "1/2 |grad v|^2";
  if (n == "klein_gordon") return std::snprintf(buf, sizeof buf, "1/2 |grad v|^2 + %g/2 v^2", s.lambda), buf;
  if (n == "biharmonic") return "1/2 |lap v|^2";
  if (n == "nlw") return std::snprintf(buf, sizeof buf, "1/2 |grad v|^2 + %g/%g |v|^%g", s.lambda, s.p, s.p), buf;
  if (n == "sine_gordon") return "1/2 |grad v|^2 + 1 - cos v";
  if (n == "p_laplace") {
    if (s.q)
      return std::snprintf(buf, sizeof buf, "1/%g |grad v|^%g + %g/%g |v|^%g", s.p, s.p, s.lambda, *s.q, *s.q), buf;
    return std::snprintf(buf, sizeof buf, "1/%g |grad v|^%g", s.p, s.p), buf;
  }
  if (n == "beam") {
    const double q = s.q.value_or(2.0);
    return std::snprintf(buf, sizeof buf, "1/2 |lap v|^2 + %g/%g |grad v|^%g + %g/%g |v|^%g", s.lambda, s.p, s.p,
                         s.lambda, q, q),
           buf;
  }
  if (n == "kirchhoff") return "1/4 (int |grad v|^2)^2";
  if (n == "fractional")
    return std::snprintf(buf, sizeof buf, "1/2 ||k|^%g v|^2 + %g/%g |v|^%g", s.s, s.lambda, s.p, s.p), buf;
  return "?";
}

GridPtr Scenario::grid() const { return make_grid(dim, points, length); }

Field Scenario::w0(const GridPtr& g) const {
  const double c = 0.5 * length;
  if (initial == "zero") return Field(g);
  if (initial == "sine")
    return Field::from_function(g, [&](double x, double y) {
      return w0_amplitude * std::sin(x) * (g->dim() == 2 ? std::sin(y) : 1.0);
    });
  if (initial == "bump")
    return Field::from_function(g, [&](double x, double y) {
      const double r2 = (x - c) * (x - c) + (g->dim() == 2 ? (y - c) * (y - c) : 0.0);
      return w0_amplitude * std::exp(-4.0 * r2);
    });
  if (initial == "random") {
    std::mt19937_64 rng(seed);
    return modes_field(g, rng, w0_amplitude);
  }
  throw std::invalid_argument("unknown initial data '" + initial + "'");
}

Field Scenario::w1(const GridPtr& g) const {
  const double c = 0.5 * length;
  if (initial == "zero") return Field(g);
  if (initial == "sine")
    return Field::from_function(g, [&](double x, double y) {
      return w1_amplitude * std::cos(x) * (g->dim() == 2 ? std::cos(y) : 1.0);
    });
  if (initial == "bump")
    return Field::from_function(g, [&](double x, double y) {
      const double r2 = (x - c) * (x - c) + (g->dim() == 2 ? (y - c) * (y - c) : 0.0);
      return w1_amplitude * std::exp(-4.0 * r2);
    });
  if (initial == "random") {
    std::mt19937_64 rng(seed);
    modes_field(g, rng, 1.0);
    return modes_field(g, rng, w1_amplitude);
  }
  throw std::invalid_argument("unknown initial data '" + initial + "'");
}

SourceSpec Scenario::source_spec(const GridPtr& g) const {
  if (source == "none") return SourceSpec::zero(g);
  if (source == "pulse") return pulse_source(g, source_amplitude, source_t_end);
  if (source == "smooth") return smooth_source(g, source_amplitude);
  if (source == "unit") return unit_norm_source(g);
  if (source == "decaying") return decaying_source(g);
  if (source == "csv") return SourceSpec::load_csv(g, source_path);
  throw std::invalid_argument("unknown source kind '" + source + "'");
}

bool Scenario::reference_enabled() const {
  if (reference == "on") return true;
  if (reference == "off") return false;
  return energy().weak_solution_applicable();
}

void Scenario::validate() const {
  energy();
  if (dim != 1 && dim != 2) throw std::invalid_argument("scenario: dim must be 1 or 2");
  if (points < 4) throw std::invalid_argument("scenario: too few points");
  if (!(length > 0.0)) throw std::invalid_argument("scenario: length must be positive");
  if (eps_list.empty()) throw std::invalid_argument("scenario: empty eps list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] <= 0.25)) throw std::invalid_argument("scenario: eps must lie in (0, 0.25]");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("scenario: eps list must decrease");
  }
  if (!(T_phys > 0.0) || !(ds > 0.0) || !(tail_pad >= 0.0)) throw std::invalid_argument("scenario: bad time mesh");
  if (!(beta > 1.0)) throw std::invalid_argument("scenario: beta must exceed 1");
  if (reference != "auto" && reference != "on" && reference != "off")
    throw std::invalid_argument("scenario: reference mode must be auto, on or off");
  if (ref_dt < 0.0) throw std::invalid_argument("scenario: ref dt must be nonnegative");
  for (const auto& c : {constants.C_level, constants.C_e0, constants.C_R})
    if (c && !(*c >= 0.0)) throw std::invalid_argument("scenario: calibrated constants must be nonnegative");
  static const std::vector<std::string> inits{"zero", "sine", "bump", "random"};
  if (std::find(inits.begin(), inits.end(), initial) == inits.end())
    throw std::invalid_argument("unknown initial data '" + initial + "'");
  static const std::vector<std::string> sources{"none", "pulse", "smooth", "unit", "decaying", "csv"};
  if (std::find(sources.begin(), sources.end(), source) == sources.end())
    throw std::invalid_argument("unknown source kind '" + source + "'");
}

// ------------------------------------------------------------------ config

Scenario scenario_from_config(const Config& c, const std::string& base_dir) {
  c.require_known({
      {"scenario", {"name", "p", "q", "s", "lambda", "mu"}},
      {"grid", {"dim", "points", "length"}},
      {"data", {"initial", "w0_amplitude", "w1_amplitude", "seed"}},
      {"source", {"kind", "amplitude", "t_end", "path"}},
      {"sweep", {"eps", "T", "ds", "tail_pad", "k_cut", "beta"}},
      {"solver", {"tol_grad", "max_iter", "memory", "wolfe_c1", "wolfe_c2", "first_order_bc"}},
      {"reference", {"mode", "dt", "rel_tol"}},
      {"constants", {"C_level", "C_e0", "C_R"}},
  });
  const auto name = c.get("scenario", "name");
  if (!name) throw std::invalid_argument(c.origin() + ": [scenario] name is required");
  Scenario s = preset(*name);
  s.p = c.get_double("scenario", "p", s.p);
  if (c.has("scenario", "q")) s.q = c.get_double("scenario", "q", 0.0);
  s.s = c.get_double("scenario", "s", s.s);
  s.lambda = c.get_double("scenario", "lambda", s.lambda);
  s.p_laplace_mu = c.get_double("scenario", "mu", s.p_laplace_mu);
  s.dim = c.get_int("grid", "dim", s.dim);
  s.points = c.get_int("grid", "points", s.points);
  s.length = c.get_double("grid", "length", s.length);
  s.initial = c.get_string("data", "initial", s.initial);
  s.w0_amplitude = c.get_double("data", "w0_amplitude", s.w0_amplitude);
  s.w1_amplitude = c.get_double("data", "w1_amplitude", s.w1_amplitude);
  s.seed = static_cast<std::uint64_t>(c.get_int("data", "seed", static_cast<int>(s.seed)));
  s.source = c.get_string("source", "kind", s.source);
  s.source_amplitude = c.get_double("source", "amplitude", s.source_amplitude);
  s.source_t_end = c.get_double("source", "t_end", s.source_t_end);
  if (const auto path = c.get("source", "path")) {
    const std::filesystem::path p(*path);
    s.source_path = p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).string();
  }
  s.eps_list = c.get_list("sweep", "eps", s.eps_list);
  s.T_phys = c.get_double("sweep", "T", s.T_phys);
  s.ds = c.get_double("sweep", "ds", s.ds);
  s.tail_pad = c.get_double("sweep", "tail_pad", s.tail_pad);
  s.k_cut = c.get_double("sweep", "k_cut", s.k_cut);
  s.beta = c.get_double("sweep", "beta", s.beta);
  s.tol_grad = c.get_double("solver", "tol_grad", s.tol_grad);
  s.max_iter = c.get_int("solver", "max_iter", s.max_iter);
  s.memory = c.get_int("solver", "memory", s.memory);
  s.wolfe_c1 = c.get_double("solver", "wolfe_c1", s.wolfe_c1);
  s.wolfe_c2 = c.get_double("solver", "wolfe_c2", s.wolfe_c2);
  s.first_order_bc = c.get_bool("solver", "first_order_bc", s.first_order_bc);
  s.reference = c.get_string("reference", "mode", s.reference);
  s.ref_dt = c.get_double("reference", "dt", s.ref_dt);
  if (c.has("reference", "rel_tol")) s.ref_rel_tol = c.get_double("reference", "rel_tol", 0.0);
  if (c.has("constants", "C_level")) s.constants.C_level = c.get_double("constants", "C_level", 0.0);
  if (c.has("constants", "C_e0")) s.constants.C_e0 = c.get_double("constants", "C_e0", 0.0);
  if (c.has("constants", "C_R")) s.constants.C_R = c.get_double("constants", "C_R", 0.0);
  s.validate();
  return s;
}

Config scenario_to_config(const Scenario& s) {
  Config c;
  c.set("scenario", "name", s.name);
  c.set("scenario", "p", fmt(s.p));
  if (s.q) c.set("scenario", "q", fmt(*s.q));
  c.set("scenario", "s", fmt(s.s));
  c.set("scenario", "lambda", fmt(s.lambda));
  c.set("scenario", "mu", fmt(s.p_laplace_mu));
  c.set("grid", "dim", std::to_string(s.dim));
  c.set("grid", "points", std::to_string(s.points));
  c.set("grid", "length", fmt(s.length));
  c.set("data", "initial", s.initial);
  c.set("data", "w0_amplitude", fmt(s.w0_amplitude));
  c.set("data", "w1_amplitude", fmt(s.w1_amplitude));
  c.set("data", "seed", std::to_string(s.seed));
  c.set("source", "kind", s.source);
  c.set("source", "amplitude", fmt(s.source_amplitude));
  c.set("source", "t_end", fmt(s.source_t_end));
  if (!s.source_path.empty()) c.set("source", "path", s.source_path);
  std::string eps;
  for (double e : s.eps_list) eps += (eps.empty() ? "" : ", ") + fmt(e);
  c.set("sweep", "eps", eps);
  c.set("sweep", "T", fmt(s.T_phys));
  c.set("sweep", "ds", fmt(s.ds));
  c.set("sweep", "tail_pad", fmt(s.tail_pad));
  c.set("sweep", "k_cut", fmt(s.k_cut));
  c.set("sweep", "beta", fmt(s.beta));
  c.set("solver", "tol_grad", fmt(s.tol_grad));
  c.set("solver", "max_iter", std::to_string(s.max_iter));
  c.set("solver", "memory", std::to_string(s.memory));
  c.set("solver", "wolfe_c1", fmt(s.wolfe_c1));
  c.set("solver", "wolfe_c2", fmt(s.wolfe_c2));
  c.set("solver", "first_order_bc", s.first_order_bc ? "true" : "false");
  c.set("reference", "mode", s.reference);
  c.set("reference", "dt", fmt(s.ref_dt));
  if (s.ref_rel_tol) c.set("reference", "rel_tol", fmt(*s.ref_rel_tol));
  if (s.constants.C_level) c.set("constants", "C_level", fmt(*s.constants.C_level));
  if (s.constants.C_e0) c.set("constants", "C_e0", fmt(*s.constants.C_e0));
  if (s.constants.C_R) c.set("constants", "C_R", fmt(*s.constants.C_R));
  return c;
}

// ------------------------------------------------------------------- sweep

double compare_runs(const Trajectory& a, const Trajectory& b, double T) {
  require_same_grid(*a.grid(), *b.grid());
  if (b.end_time() < std::min(T, a.end_time()) - 1e-12)
    throw std::invalid_argument("compare_runs: second trajectory ends before T");
  const SpaceGrid& g = *a.grid();
  std::vector<double> bb(g.size()), diff(g.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < a.count() && a.time(i) <= T + 1e-12; ++i) {
    b.sample(a.time(i), bb);
    const auto fa = a.frame(i);
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = fa[k] - bb[k];
    sup = std::max(sup, g.norm(diff));
  }
  return sup;
}

bool SweepResult::pass() const {
  if (!sweep_checks.pass()) return false;
  for (const auto& r : rows)
    if (!r.checks.pass()) return false;
  return true;
}

Calibration SweepResult::calibrate() const {
  double level = 0.0, e0 = 0.0, R = 0.0;
  for (const auto& r : rows) {
    if (!r.completed) continue;
    level = std::max(level, r.level_excess);
    e0 = std::max(e0, r.e0_excess);
    R = std::max(R, std::abs(r.R) / r.eps);
  }
  return {2.0 * level, 2.0 * e0, 2.0 * R};
}

SweepResult run_scenario(const Scenario& s, const RunOptions& opt) {
  using clock = std::chrono::steady_clock;
  s.validate();
  const GridPtr g = s.grid();
  const EnergySpec energy = s.energy();
  const Field w0 = s.w0(g), w1 = s.w1(g);
  const SourceSpec f = s.source_spec(g);
  require_cutoff_admissible(f, s.eps_list, s.k_cut);
  const bool unforced = f.is_zero();
  const double W0 = eval_W(energy, w0);
  const double n1 = w1.norm();

  SweepResult res;
  res.scenario = s.name;
  res.sweep_checks.append(verify_fapp_sweep(f, s.eps_list, s.T_phys, s.k_cut), "source_");

  const bool with_ref = s.reference_enabled();
  double ref_dt = s.ref_dt;
  if (with_ref && ref_dt <= 0.0) ref_dt = std::min(s.ds * s.eps_list.back() / 4.0, stable_step(energy, w0));
  auto sup_norm = [&](const Trajectory& r) {
    double m = 0.0;
    for (std::size_t i = 0; i < r.count(); ++i) m = std::max(m, g->norm(r.frame(i)));
    return m;
  };
  if (with_ref) res.reference = integrate(RefConfig{energy, f, w0, w1, ref_dt, s.T_phys});
  const double ref_norm = res.reference ? sup_norm(*res.reference) : 0.0;

  std::mt19937_64 rng(s.seed * 7919 + 17);
  for (double eps : s.eps_list) {
    const auto t_start = clock::now();
    EpsRow row;
    row.eps = eps;
    const ApproxSource a = build_approx(f, eps, s.k_cut);
    row.checks.append(verify_fapp_properties(a, s.T_phys), "source_");
    row.checks.append(verify_phi_assumptions(a, s.T_phys / eps + s.tail_pad), "source_");
    if (!row.checks.pass()) {
      row.wall_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
      res.rows.push_back(std::move(row));
      continue;
    }

    MinProblem p = make_problem(energy, a, w0, w1, s.ds, s.T_phys, s.tail_pad);
    p.tol_grad = s.tol_grad;
    p.max_iter = s.max_iter;
    p.memory = s.memory;
    p.wolfe_c1 = s.wolfe_c1;
    p.wolfe_c2 = s.wolfe_c2;
    p.first_order_bc = s.first_order_bc;
    p.level_C = s.constants.C_level.value_or(0.0);
    p.validate();
    const MinimizeReport r = minimize(p);
    const Trajectory& u = r.trajectory;
    row.completed = true;
    row.j_value = r.j_value;
    row.h_value = r.h_value;
    row.s_value = r.s_value;
    row.j_affine = r.j_affine;
    row.grad_norm = r.grad_norm;
    row.tol_grad = r.tol_grad;
    row.iterations = r.iterations;
    row.converged = r.converged;
    row.method = r.method;

    // minimizer
    row.checks.add("a_converged", r.converged, r.tol_grad - r.grad_norm, r.message);
    row.checks.add_margin("a_below_affine", r.j_affine - r.j_value, 1e-9);
    row.level_excess = (r.h_value - W0) / eps;
    if (s.constants.C_level)
      row.checks.add_margin("a_level_estimate", r.level_margin, 1e-6 * (1.0 + W0));
    if (r.converged) {
      double worst = -1.0;
      for (int k = 0; k < 10; ++k) {
        const Trajectory eta = random_direction(p, rng);
        const double bound = r.tol_grad * precond_norm(p, eta);
        worst = std::max(worst, el_residual(p, u, eta) / bound);
      }
      row.checks.add_margin("a_el_residual", 10.0 - worst, 0.0, "max residual / (tol |eta|) = " + fmt(worst));
    }
    row.checks.append(weighted_norm_checks(u), "a_");

    // energy structure
    const DiagnosticsSeries d = compute_series(p, u);
    const double s_end = s.T_phys / eps;
    double E_sup = 0.0;
    for (std::size_t i = 0; i < d.s_nodes.size() && d.s_nodes[i] <= s_end + 1e-12; ++i)
      E_sup = std::max(E_sup, d.E.values()[i]);
    const double scale = 1.0 + E_sup;
    row.checks.add_margin("series_identities", 1e-9 - series_identity_defect(d));
    row.E0 = d.E.values()[0];
    row.e0_excess = (row.E0 - 0.5 * n1 * n1 - W0) / std::sqrt(eps);
    if (s.constants.C_e0)
      row.checks.add_margin("e0_bound", e0_bound_margin(d, w0, w1, energy, *s.constants.C_e0), 1e-9 * scale);
    row.R = remainder_R(p, u);
    if (s.constants.C_R) row.checks.add_margin("remainder_bound", *s.constants.C_R * eps - std::abs(row.R), 1e-12);
    row.sweep_margin = sweep_bound_margin(d, a, s.T_phys, s.beta);
    row.checks.add_margin("sweep_bound", row.sweep_margin, 1e-6 * scale);
    if (unforced) {
      row.energy_increase = max_energy_increase(d, s_end);
      row.checks.add_margin("energy_nonincreasing", -row.energy_increase, 1e-6);
    }
    const GronwallReport gr = energy_gronwall(d, a, s.beta, s_end);
    row.checks.add("energy_gronwall", gr.ok(), gr.ok() ? gr.conclusion_margin : gr.hypothesis_margin, gr.message);
    const std::size_t last_node = d.s_nodes.size() - 2;
    for (double frac : {0.25, 0.5, 1.0}) {
      double t = node_at_or_below(frac * s_end, s.ds);
      const double t_max = d.s_nodes[last_node];
      if (t < s.ds) t = s.ds;
      if (t > t_max) t = t_max;
      row.relation_defect = std::max(row.relation_defect, relation_defect(p, u, d, false, t));
      row.ederiv_defect = std::max(row.ederiv_defect, ederiv_defect(d, t));
      row.kprime_defect = std::max(row.kprime_defect, kprime_defect(u, d, t));
    }
    row.checks.add_margin("relation_identity", 1e-3 * scale - row.relation_defect);
    row.checks.add_margin("energy_derivative", 1e-3 * scale - row.ederiv_defect);

    // bounds, energy inequality, weak form
    const Trajectory w = rescale(u, eps);
    row.bounds = energy_bounds(w, energy, s.T_phys, 0.0);
    const double t_d = node_at_or_below(s.T_phys, w.ds());
    const double e_init = physical_energy(w, energy, 0.0);
    const double root = std::sqrt(std::max(0.0, e_init)) + std::sqrt(0.5 * t_d * gamma_of(f, t_d));
    row.enineq_rhs = root * root;
    row.enineq_margin = energy_inequality_margin(w, energy, f, t_d);
    if (eps == s.eps_list.back())
      row.checks.add_margin("d_energy_inequality", row.enineq_margin, 0.01 * row.enineq_rhs);
    else
      row.checks.add("d_energy_inequality_info", true, row.enineq_margin, "enforced at the smallest eps only");

    if (energy.weak_solution_applicable()) {
      Field h = w0.norm() > 0.0 ? w0 : Field::from_function(g, [](double x, double) { return std::sin(x); });
      row.weak = weak_form_defect(w, energy, a, TestBump{0.2 * s.T_phys, 0.8 * s.T_phys, h});
      row.checks.add("e_weak_form", true, row.weak->with_eps, "eps-free defect " + fmt(row.weak->eps_free));
    } else {
      row.checks.add("e_weak_form", true, 0.0, "not applicable");
    }

    if (res.reference) {
      if (unforced) {
        row.ref_distance = compare_runs(w, *res.reference, s.T_phys);
        row.ref_norm = ref_norm;
      } else {
        const Trajectory ref_eps = integrate(RefConfig{energy, a.windowed(), w0, w1, ref_dt, s.T_phys});
        row.ref_distance = compare_runs(w, ref_eps, s.T_phys);
        row.ref_norm = sup_norm(ref_eps);
        row.limit_distance = compare_runs(w, *res.reference, s.T_phys);
      }
    }
    if (opt.keep_trajectories || !opt.out_dir.empty() || !with_ref) row.physical = w;
    row.series = d;
    row.wall_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    res.rows.push_back(std::move(row));
  }

  // Sweep-level checks over the completed rows.
  std::vector<EpsRow*> done;
  for (auto& r : res.rows)
    if (r.completed) done.push_back(&r);

  if (res.reference) {
    bool decreasing = true;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < done.size(); ++i) {
      const double gap = *done[i - 1]->ref_distance - *done[i]->ref_distance;
      worst = std::min(worst, gap);
      if (!(gap > 0.0) && *done[i - 1]->ref_distance > kNegligible * (1.0 + ref_norm)) decreasing = false;
    }
    res.sweep_checks.add("c_reference_decreasing", decreasing, done.size() > 1 ? worst : 0.0);
    if (!done.empty()) {
      const EpsRow& last = *done.back();
      const double rel = *last.ref_distance / std::max(*last.ref_norm, 1e-300);
      const double tol = s.ref_rel_tol.value_or(unforced ? 0.05 : -1.0);
      if (*last.ref_norm == 0.0)
        res.sweep_checks.add("c_reference_final", *last.ref_distance == 0.0, -*last.ref_distance, "zero reference");
      else if (tol >= 0.0)
        res.sweep_checks.add_margin("c_reference_final", tol - rel, 0.0, "relative distance " + fmt(rel));
      else
        res.sweep_checks.add("c_reference_final_info", true, rel, "relative distance, report only");
    }
    if (!unforced) {
      std::string values;
      for (auto* r : done) values += (values.empty() ? "" : " ") + fmt(*r->limit_distance);
      res.sweep_checks.add("c_limit_distance_info", true, 0.0,
                           "distance to the unwindowed-source solution, report only: " + values);
    }
  } else {
    for (std::size_t i = 0; i + 1 < done.size(); ++i)
      done[i]->cauchy_distance = compare_runs(*done[i]->physical, *done[i + 1]->physical, s.T_phys);
    bool decreasing = true;
    for (std::size_t i = 1; i + 1 < done.size(); ++i)
      if (!(*done[i]->cauchy_distance < *done[i - 1]->cauchy_distance) &&
          *done[i - 1]->cauchy_distance > kNegligible)
        decreasing = false;
    res.sweep_checks.add("c_successive_decreasing", decreasing, 0.0,
                         "distances between successive eps (no classical reference)");
  }

  if (!done.empty()) {
    std::vector<double> sup, pot;
    for (auto* r : done) {
      sup.push_back(r->bounds.sup_energy);
      pot.push_back(r->bounds.potential_int);
    }
    // Uniform-in-eps bound proxy: finite values within a factor 2 of each other.
    auto bounded = [&](const std::vector<double>& v, const std::string& name) {
      const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
      const bool finite = std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
      res.sweep_checks.add(name, finite && *mx <= 2.0 * *mn + 1e-12, 2.0 * *mn - *mx,
                           "min " + fmt(*mn) + " max " + fmt(*mx));
    };
    bounded(sup, "b_sup_energy_bounded");
    bounded(pot, "b_potential_integral_bounded");
  }

  if (energy.weak_solution_applicable()) {
    bool decreasing = true;
    for (std::size_t i = 1; i < done.size(); ++i)
      if (!(done[i]->weak->eps_free < done[i - 1]->weak->eps_free) &&
          done[i - 1]->weak->eps_free > kNegligible * (1.0 + done[i - 1]->weak->scale))
        decreasing = false;
    if (unforced)
      res.sweep_checks.add("e_weak_form_trend", decreasing, 0.0, "eps-free defect decreasing along the sweep");
    else
      res.sweep_checks.add("e_weak_form_trend_info", true, decreasing ? 1.0 : 0.0,
                           decreasing ? "eps-free defect decreasing, report only"
                                      : "eps-free defect not decreasing, report only (source window)");
  } else {
    res.sweep_checks.add("e_weak_form_comparison", true, 0.0, "not applicable: weak-solution item is open");
  }

  if (!opt.out_dir.empty()) write_sweep(res, opt.out_dir);
  if (!opt.keep_trajectories)
    for (auto& r : res.rows) r.physical.reset();
  return res;
}

// ----------------------------------------------------------------- output

std::string output_root() {
  const char* env = std::getenv("WIDE_WAVE_OUT");
  return env && *env ? std::string(env) : std::string("wide-wave-out");
}

void write_sweep(const SweepResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw std::runtime_error("cannot write " + (std::filesystem::path(dir) / name).string());
    out << kSchemaLine << "\n";
    return out;
  };
  {
    std::ofstream out = open("summary.csv");
    out << "eps,completed,converged,method,iterations,j_value,h_value,s_value,j_affine,grad_norm,tol_grad,"
           "level_excess,e0_excess,R,E0,sweep_margin,energy_increase,enineq_margin,enineq_rhs,relation_defect,"
           "ederiv_defect,kprime_defect,sup_energy,potential_integral,weak_with_eps,weak_eps_free,ref_distance,ref_norm,"
           "limit_distance,successive_distance\n";
    for (const auto& row : r.rows) {
      out << fmt(row.eps) << "," << (row.completed ? 1 : 0) << "," << (row.converged ? 1 : 0) << ","
          << (row.method.empty() ? "n/a" : row.method) << "," << row.iterations << "," << fmt(row.j_value) << ","
          << fmt(row.h_value) << "," << fmt(row.s_value) << "," << fmt(row.j_affine) << "," << fmt(row.grad_norm)
          << "," << fmt(row.tol_grad) << "," << fmt(row.level_excess) << "," << fmt(row.e0_excess) << ","
          << fmt(row.R) << "," << fmt(row.E0) << "," << fmt(row.sweep_margin) << "," << fmt(row.energy_increase)
          << "," << fmt(row.enineq_margin) << "," << fmt(row.enineq_rhs) << "," << fmt(row.relation_defect) << ","
          << fmt(row.ederiv_defect) << "," << fmt(row.kprime_defect) << "," << fmt(row.bounds.sup_energy) << ","
          << fmt(row.bounds.potential_int) << ","
          << (row.weak ? fmt(row.weak->with_eps) : "n/a") << "," << (row.weak ? fmt(row.weak->eps_free) : "n/a")
          << "," << fmt_opt(row.ref_distance) << "," << fmt_opt(row.ref_norm) << ","
          << fmt_opt(row.limit_distance) << "," << fmt_opt(row.cauchy_distance) << "\n";
    }
  }
  {
    std::ofstream out = open("checks.csv");
    out << "eps,check,pass,margin,detail\n";
    auto emit = [&](const std::string& eps, const Report& rep) {
      for (const auto& c : rep.checks) {
        std::string detail = c.detail;
        std::replace(detail.begin(), detail.end(), ',', ';');
        out << eps << "," << c.name << "," << (c.pass ? 1 : 0) << "," << fmt(c.margin) << "," << detail << "\n";
      }
    };
    for (const auto& row : r.rows) emit(fmt(row.eps), row.checks);
    emit("sweep", r.sweep_checks);
  }
  for (const auto& row : r.rows) {
    const std::string tag = "eps" + fmt(row.eps);
    if (row.series) {
      std::ofstream out = open("series_" + tag + ".csv");
      out << "s,K,D,W,L,Phi,E\n";
      const auto& d = *row.series;
      for (std::size_t i = 0; i < d.s_nodes.size(); ++i)
        out << fmt(d.s_nodes[i]) << "," << fmt(d.K.values()[i]) << "," << fmt(d.D.values()[i]) << ","
            << fmt(d.Wser.values()[i]) << "," << fmt(d.L.values()[i]) << "," << fmt(d.Phi.values()[i]) << ","
            << fmt(d.E.values()[i]) << "\n";
    }
    if (row.physical) write_binary(*row.physical, (std::filesystem::path(dir) / ("w_" + tag + ".wide")).string());
  }
  if (r.reference) write_binary(*r.reference, (std::filesystem::path(dir) / "reference.wide").string());
}

void write_constants(const std::string& path, const Calibration& c) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> kept;
  std::string line;
  bool skipping = false;
  while (std::getline(in, line)) {
    std::string t = line;
    t.erase(0, t.find_first_not_of(" \t"));
    if (!t.empty() && t.front() == '[') skipping = t.rfind("[constants]", 0) == 0;
    if (!skipping) kept.push_back(line);
  }
  in.close();
  while (!kept.empty() && kept.back().find_first_not_of(" \t\r") == std::string::npos) kept.pop_back();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& l : kept) out << l << "\n";
  out << "\n[constants]\n";
  if (c.C_level) out << "C_level = " << fmt(*c.C_level) << "\n";
  if (c.C_e0) out << "C_e0 = " << fmt(*c.C_e0) << "\n";
  if (c.C_R) out << "C_R = " << fmt(*c.C_R) << "\n";
}

// ------------------------------------------------------------ lemma suites

Report verify_lemmas(const LemmaSuiteOptions& opt) {
  Report rep;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  double worst = 0.0;
  for (int c = 0; c < opt.identity_cases; ++c) {
    const TimeSeries h = lemma_series(rng, true, c % 3 ? Tail::ConstantLast : Tail::Zero);
    const double tau = 1.2 * h.last_node() * u01(rng);
    const double delta = 1e-3 + 2.0 * h.last_node() * u01(rng);
    const double scale = 1.0 + h.sup_norm();
    for (int order : {1, 2}) worst = std::max(worst, avg_identity_defect(h, tau, delta, order) / scale);
  }
  rep.add_margin("average_identities", 1e-9 - worst, 0.0, std::to_string(opt.identity_cases) + " cases");

  double low = std::numeric_limits<double>::infinity();
  for (int c = 0; c < opt.poincare_cases; ++c) {
    const TimeSeries h = lemma_series(rng, false, Tail::ConstantLast);
    const double alpha = std::array<double, 3>{1.25, 2.0, 8.0}[c % 3];
    const double t = u01(rng) * h.last_node();
    const double scale = 1.0 + h.sup_norm() * h.sup_norm();
    for (int order : {1, 2}) low = std::min(low, poincare_defect(h, std::nullopt, t, alpha, order) / scale);
  }
  rep.add_margin("poincare_inequalities", low, 1e-9, std::to_string(opt.poincare_cases) + " cases");

  // u = lambda (c0 + int v)^2 with lambda in [0.3, 0.8] meets the hypothesis
  // with room to spare; inflating u by a factor above 1 breaks it.
  auto gronwall_case = [&](double factor) {
    const int n = 5 + static_cast<int>(40 * u01(rng));
    std::vector<double> nodes(n), v(n), c(n), uu(n);
    for (int i = 1; i < n; ++i) nodes[i] = nodes[i - 1] + 0.01 + 0.5 * u01(rng);
    for (int i = 0; i < n; ++i) v[i] = 2.0 * u01(rng);
    const double c0 = 0.5 + 2.0 * u01(rng);
    double V = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i > 0) V += 0.5 * (nodes[i] - nodes[i - 1]) * (v[i - 1] + v[i]);
      c[i] = c0;
      uu[i] = factor * (c0 + V) * (c0 + V);
    }
    return gronwall_bound(TimeSeries(nodes, uu), TimeSeries(nodes, v), TimeSeries(nodes, c));
  };
  int pos_ok = 0, neg_ok = 0;
  for (int k = 0; k < opt.gronwall_positive; ++k)
    if (gronwall_case(0.3 + 0.5 * u01(rng)).ok()) ++pos_ok;
  for (int k = 0; k < opt.gronwall_negative; ++k)
    if (!gronwall_case(1.2 + u01(rng)).ok()) ++neg_ok;
  rep.add("gronwall_positive", pos_ok == opt.gronwall_positive, pos_ok - opt.gronwall_positive,
          std::to_string(pos_ok) + "/" + std::to_string(opt.gronwall_positive) + " true");
  rep.add("gronwall_negative", neg_ok == opt.gronwall_negative, neg_ok - opt.gronwall_negative,
          std::to_string(neg_ok) + "/" + std::to_string(opt.gronwall_negative) + " false");
  return rep;
}

Report verify_sources(const std::vector<double>& eps_list) {
  Report rep;
  for (const auto& name : scenario_names()) {
    const Scenario s = preset(name);
    const GridPtr g = s.grid();
    const SourceSpec f = s.source_spec(g);
    try {
      require_cutoff_admissible(f, eps_list, s.k_cut);
      rep.add(name + "_cutoff", true, 0.0);
    } catch (const std::exception& e) {
      rep.add(name + "_cutoff", false, -1.0, e.what());
    }
    rep.append(verify_fapp_sweep(f, eps_list, s.T_phys, s.k_cut), name + "_");
    for (double eps : eps_list) {
      const ApproxSource a = build_approx(f, eps, s.k_cut);
      const std::string tag = name + "_eps" + fmt(eps) + "_";
      rep.append(verify_fapp_properties(a, s.T_phys), tag);
      rep.append(verify_phi_assumptions(a, s.T_phys / eps + s.tail_pad), tag);
    }
  }
  const GridPtr g = make_grid(1, 16);
  const ApproxSource a = build_approx(unit_norm_source(g), 0.04, 4.0);
  rep.add("worked_t_eps", a.t_eps() == 0.8, -std::abs(a.t_eps() - 0.8), "t_eps = " + fmt(a.t_eps()));
  rep.add("worked_T_eps", std::abs(a.T_eps() - 5.0) <= 1e-12, -std::abs(a.T_eps() - 5.0), "T_eps = " + fmt(a.T_eps()));
  return rep;
}

}  // namespace wide
