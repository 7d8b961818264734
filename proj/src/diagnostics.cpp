#include "wide/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wide {

namespace {

std::size_t node_index(double s, double ds, std::size_t count, const char* who) {
  const double x = s / ds;
  const long i = std::lround(x);
  if (std::abs(x - static_cast<double>(i)) > 1e-8 || i < 0 || static_cast<std::size_t>(i) >= count)
    throw std::invalid_argument(std::string(who) + ": time is not a node");
  return static_cast<std::size_t>(i);
}

std::size_t interior_node(double s, double ds, std::size_t count, const char* who) {
  const std::size_t i = node_index(s, ds, count, who);
  if (i == 0 || i + 1 >= count) throw std::invalid_argument(std::string(who) + ": time must be an interior node");
  return i;
}

double sq_norm(const SpaceGrid& g, std::span<const double> v) { return g.inner(v, v); }

}  // namespace

std::size_t DiagnosticsSeries::node_of(double s) const { return node_index(s, ds, s_nodes.size(), "DiagnosticsSeries"); }

DiagnosticsSeries compute_series(const MinProblem& p, const Trajectory& u) {
  const SpaceGrid& g = *u.grid();
  const std::size_t n = u.count();
  const double inv = 1.0 / (2.0 * p.eps * p.eps);
  std::vector<double> nodes(n), K(n), D(n), W(n), L(n), Phi(n);
  std::vector<double> d1(g.size()), d2(g.size()), ph(g.size());
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = u.time(i);
    first_difference(u, i, d1);
    second_difference(u, i, d2);
    K[i] = inv * sq_norm(g, d1);
    D[i] = inv * sq_norm(g, d2);
    W[i] = detail::energy_value_grad(p.energy, g, u.frame(i), {});
    L[i] = D[i] + W[i];
    p.source.phi(nodes[i], ph);
    Phi[i] = g.inner(ph, d1);
  }
  TimeSeries Wser(nodes, W);
  const std::vector<double> a2w = avg2_at_nodes(Wser);
  std::vector<double> E(n);
  for (std::size_t i = 0; i < n; ++i) E[i] = K[i] + a2w[i];
  return DiagnosticsSeries{p.eps,
                           p.ds,
                           nodes,
                           TimeSeries(nodes, K),
                           TimeSeries(nodes, D),
                           Wser,
                           TimeSeries(nodes, L),
                           TimeSeries(nodes, Phi),
                           TimeSeries(nodes, E)};
}

double series_identity_defect(const DiagnosticsSeries& d) {
  double worst = 0.0, scale = 1.0;
  for (double e : d.E.values()) scale = std::max(scale, std::abs(e));
  for (std::size_t i = 0; i < d.s_nodes.size(); ++i) {
    const double s = d.s_nodes[i];
    worst = std::max(worst, std::abs(d.L.values()[i] - d.D.values()[i] - d.Wser.values()[i]));
    worst = std::max(worst, std::abs(d.E.values()[i] - d.K.values()[i] - avg2(d.Wser, s)));
  }
  return worst / scale;
}

double e0_bound_margin(const DiagnosticsSeries& d, const Field& w0, const Field& w1, const EnergySpec& spec,
                       double C) {
  const double n1 = w1.norm();
  return 0.5 * n1 * n1 + eval_W(spec, w0) + C * std::sqrt(d.eps) - d.E.values()[0];
}

double beta_constant(double beta) {
  if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
  const double alpha = std::sqrt(beta);
  return alpha * poincare_constant(alpha);
}

double sweep_bound_margin(const DiagnosticsSeries& d, const ApproxSource& a, double T, double beta) {
  const double cb = beta_constant(beta);
  if (!(T >= 0.0)) throw std::invalid_argument("sweep_bound_margin: T must be nonnegative");
  const double eps = d.eps;
  const double rhs = std::sqrt(d.E.values()[0]) +
                     (std::sqrt(eps * cb) + std::sqrt(0.5 * T * beta)) * std::sqrt(a.gamma(T + a.t_eps()) + eps * eps);
  return rhs - std::sqrt(std::max(0.0, d.E(T / eps)));
}

double remainder_R(const MinProblem& p, const Trajectory& u) {
  const SpaceGrid& g = *u.grid();
  std::vector<double> nodes(u.count()), omega(u.count());
  std::vector<double> gw(g.size()), ph(g.size());
  for (std::size_t i = 0; i < u.count(); ++i) {
    nodes[i] = u.time(i);
    detail::energy_value_grad(p.energy, g, u.frame(i), gw);
    p.source.phi(nodes[i], ph);
    omega[i] = -g.inner(gw, p.w1.values) + g.inner(ph, p.w1.values);
  }
  return p.eps * avg2(TimeSeries(nodes, omega), 0.0);
}

double relation_defect(const MinProblem& p, const Trajectory& u, const DiagnosticsSeries& d, bool at_zero, double t) {
  if (at_zero) {
    const double lhs = avg2(d.L, 0.0) + 4.0 * avg(d.D, 0.0) - avg(d.L, 0.0);
    return std::abs(lhs - avg2(d.Phi, 0.0) + remainder_R(p, u));
  }
  const std::size_t i = interior_node(t, d.ds, d.s_nodes.size(), "relation_defect");
  const auto K = d.K.values();
  const double dK = (K[i + 1] - K[i - 1]) / (2.0 * d.ds);
  const double lhs = avg2(d.L, t) + 4.0 * avg(d.D, t) - avg(d.L, t);
  return std::abs(lhs - avg2(d.Phi, t) + dK);
}

double kprime_defect(const Trajectory& u, const DiagnosticsSeries& d, double t) {
  const std::size_t i = interior_node(t, d.ds, d.s_nodes.size(), "kprime_defect");
  const SpaceGrid& g = *u.grid();
  std::vector<double> d1(g.size()), d2(g.size());
  first_difference(u, i, d1);
  second_difference(u, i, d2);
  const auto K = d.K.values();
  const double central = (K[i + 1] - K[i - 1]) / (2.0 * d.ds);
  return std::abs(central - g.inner(d1, d2) / (d.eps * d.eps));
}

double ederiv_defect(const DiagnosticsSeries& d, double t) {
  const std::size_t i = interior_node(t, d.ds, d.s_nodes.size(), "ederiv_defect");
  const auto E = d.E.values();
  const double dE = (E[i + 1] - E[i - 1]) / (2.0 * d.ds);
  return std::abs(dE + 3.0 * avg(d.D, t) + avg2(d.D, t) - avg2(d.Phi, t));
}

double max_energy_increase(const DiagnosticsSeries& d, double s_max) {
  const auto E = d.E.values();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < E.size() && d.s_nodes[i + 1] <= s_max + 1e-12; ++i)
    worst = std::max(worst, E[i + 1] - E[i]);
  const double e0 = E[0] > 0.0 ? E[0] : 1.0;
  return worst / e0;
}

Report weighted_norm_checks(const Trajectory& u) {
  const SpaceGrid& g = *u.grid();
  const std::size_t n = u.count();
  std::vector<double> nodes(n), n0(n), n1(n), n2(n), d1(g.size()), d2(g.size());
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = u.time(i);
    first_difference(u, i, d1);
    second_difference(u, i, d2);
    n0[i] = sq_norm(g, u.frame(i));
    n1[i] = sq_norm(g, d1);
    n2[i] = sq_norm(g, d2);
  }
  const double a0 = weighted_l2(TimeSeries(nodes, n0));
  const double a1 = weighted_l2(TimeSeries(nodes, n1));
  const double a2 = weighted_l2(TimeSeries(nodes, n2));
  Report r;
  const double s1 = 2.0 * n1[0] + 4.0 * a2;
  const double s0 = 2.0 * n0[0] + 8.0 * n1[0] + 16.0 * a2;
  r.add_margin("weighted_first_derivative", s1 - a1, 1e-9 * (1.0 + s1));
  r.add_margin("weighted_value", s0 - a0, 1e-9 * (1.0 + s0));
  return r;
}

GronwallReport energy_gronwall(const DiagnosticsSeries& d, const ApproxSource& a, double beta, double s_max) {
  const double cb = beta_constant(beta);
  const double eps = d.eps;
  std::size_t m = 0;
  while (m < d.s_nodes.size() && d.s_nodes[m] <= s_max + 1e-12) ++m;
  if (m < 2) throw std::invalid_argument("energy_gronwall: horizon too short");
  const std::vector<double> nodes(d.s_nodes.begin(), d.s_nodes.end());
  std::vector<double> phi2(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) phi2[i] = a.phi_norm2(nodes[i]);
  const std::vector<double> a2 = avg2_at_nodes(TimeSeries(nodes, phi2));
  std::vector<double> s(m), uu(m), vv(m), cc(m);
  const double e0 = d.E.values()[0];
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    s[i] = nodes[i];
    uu[i] = std::max(0.0, d.E.values()[i]);
    vv[i] = eps * std::sqrt(0.5 * beta) * std::sqrt(std::max(0.0, a2[i]));
    if (i > 0) acc += 0.5 * (s[i] - s[i - 1]) * (std::max(0.0, a2[i - 1]) + std::max(0.0, a2[i]));
    cc[i] = std::sqrt(std::max(e0 + cb * eps * eps * acc, 1e-300));
  }
  return gronwall_bound(TimeSeries(s, uu), TimeSeries(s, vv), TimeSeries(s, cc));
}

double physical_energy(const Trajectory& w, const EnergySpec& spec, double t) {
  const std::size_t i = node_index(t, w.ds(), w.count(), "physical_energy");
  const SpaceGrid& g = *w.grid();
  std::vector<double> d1(g.size());
  first_difference(w, i, d1);
  return 0.5 * sq_norm(g, d1) + detail::energy_value_grad(spec, g, w.frame(i), {});
}

EnergyBounds energy_bounds(const Trajectory& w, const EnergySpec& spec, double T, double tau) {
  if (!(T > 0.0) || !(tau >= 0.0) || tau + T > w.end_time() + 1e-9 || T > w.end_time() + 1e-9)
    throw std::invalid_argument("energy_bounds: window outside the trajectory");
  const SpaceGrid& g = *w.grid();
  std::vector<double> d1(g.size()), nodes(w.count()), W(w.count());
  EnergyBounds out;
  for (std::size_t i = 0; i < w.count(); ++i) {
    nodes[i] = w.time(i);
    W[i] = detail::energy_value_grad(spec, g, w.frame(i), {});
    if (nodes[i] <= T + 1e-12) {
      first_difference(w, i, d1);
      out.sup_energy = std::max(out.sup_energy, sq_norm(g, d1) + sq_norm(g, w.frame(i)));
    }
  }
  out.potential_int = integral(TimeSeries(nodes, W), tau, tau + T);
  return out;
}

double energy_inequality_margin(const Trajectory& w, const EnergySpec& spec, const SourceSpec& f, double t) {
  const double e0 = physical_energy(w, spec, 0.0);
  const double et = physical_energy(w, spec, t);
  const double root = std::sqrt(std::max(0.0, e0)) + std::sqrt(0.5 * t * gamma_of(f, t));
  return root * root - et;
}

double TestBump::time_derivative(double t, int k) const {
  if (t <= t0 || t >= t1) return 0.0;
  const double c = 0.25 * (t1 - t0) * (t1 - t0);
  const double q = (t - t0) * (t1 - t) / c;
  const double q1 = (t0 + t1 - 2.0 * t) / c;
  const double q2 = -2.0 / c;
  switch (k) {
    case 0: return q * q * q * q;
    case 1: return 4.0 * q * q * q * q1;
    case 2: return 12.0 * q * q * q1 * q1 + 4.0 * q * q * q * q2;
    case 3: return 24.0 * q * q1 * q1 * q1 + 36.0 * q * q * q1 * q2;
    default: throw std::invalid_argument("TestBump: derivative order must be 0..3");
  }
}

WeakFormDefect weak_form_defect(const Trajectory& w, const EnergySpec& spec, const ApproxSource& a,
                                const TestBump& test) {
  if (!(test.t0 > 0.0) || !(test.t1 > test.t0)) throw std::invalid_argument("weak_form_defect: support must lie in (0, T)");
  if (test.t1 > w.end_time()) throw std::invalid_argument("weak_form_defect: support beyond the trajectory");
  require_same_grid(*w.grid(), *test.h.grid);
  const SpaceGrid& g = *w.grid();
  const double eps = a.eps();
  const double dt = w.ds();
  std::vector<double> d1(g.size()), gw(g.size()), fe(g.size()), f0(g.size());
  double lhs_e = 0.0, lhs_0 = 0.0, rhs_w = 0.0, rhs_fe = 0.0, rhs_f = 0.0;
  for (std::size_t i = 0; i < w.count(); ++i) {
    const double t = w.time(i);
    if (t > test.t1 + dt) break;
    const double b = test.time_derivative(t, 0);
    const double b1 = test.time_derivative(t, 1);
    if (b == 0.0 && b1 == 0.0) continue;
    const double q = (i == 0 || i + 1 == w.count()) ? 0.5 * dt : dt;
    first_difference(w, i, d1);
    const double wh = g.inner(d1, test.h.values);
    lhs_e += q * wh * (eps * eps * test.time_derivative(t, 3) + 2.0 * eps * test.time_derivative(t, 2) + b1);
    lhs_0 += q * wh * b1;
    detail::energy_value_grad(spec, g, w.frame(i), gw);
    rhs_w += q * b * g.inner(gw, test.h.values);
    a.f_eps(t, fe);
    a.base().sample(t, f0);
    rhs_fe += q * b * g.inner(fe, test.h.values);
    rhs_f += q * b * g.inner(f0, test.h.values);
  }
  WeakFormDefect out;
  out.with_eps = std::abs(lhs_e - (rhs_w - rhs_fe));
  out.eps_free = std::abs(lhs_0 - (rhs_w - rhs_f));
  out.scale = std::max({std::abs(lhs_e), std::abs(rhs_w), std::abs(rhs_fe), std::abs(rhs_f), 1e-300});
  return out;
}

}  // namespace wide
