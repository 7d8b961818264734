#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wide/energy.hpp"
#include "wide/report.hpp"
#include "wide/source.hpp"
#include "wide/spacetime.hpp"
#include "wide/timeweight.hpp"
#include "wide/trajectory.hpp"

namespace wide {

// Energy observables of a minimizer, sampled at the fast-time nodes.
// Every series extends beyond the last node as a constant.
struct DiagnosticsSeries {
  double eps = 0.0;
  double ds = 0.0;
  std::vector<double> s_nodes;
  TimeSeries K;     // |u'|^2 / (2 eps^2)
  TimeSeries D;     // |u''|^2 / (2 eps^2)
  TimeSeries Wser;  // W(u)
  TimeSeries L;     // D + W
  TimeSeries Phi;   // (phi, u')
  TimeSeries E;     // K + A^2 W

  std::size_t node_of(double s) const;  // throws unless s is a node
};

DiagnosticsSeries compute_series(const MinProblem& p, const Trajectory& u);

// Largest |L - D - W| and |E - K - A^2 W| over the nodes, relative to 1 + sup E.
double series_identity_defect(const DiagnosticsSeries& d);

// 1/2 |w1|^2 + W(w0) + C sqrt(eps) - E(0).
double e0_bound_margin(const DiagnosticsSeries& d, const Field& w0, const Field& w1, const EnergySpec& spec,
                       double C);

// Constant of the second weighted Poincare inequality, beta = alpha^2.
double beta_constant(double beta);

// RHS - sqrt(E(T/eps)) of the approximate energy estimate; gamma is the
// accumulated source norm of the unwindowed f.
double sweep_bound_margin(const DiagnosticsSeries& d, const ApproxSource& a, double T, double beta);

// R(u) = eps int e^{-s} s (-<gradW(u), w1> + (phi, w1)) ds.
double remainder_R(const MinProblem& p, const Trajectory& u);

// Defect of the averaged relation at 0 (with R) or at an interior node t
// (with K' by central differences of K).
double relation_defect(const MinProblem& p, const Trajectory& u, const DiagnosticsSeries& d, bool at_zero,
                       double t = 0.0);

// |K'(t) - (u'(t), u''(t)) / eps^2|: central difference of K against the
// stencil derivatives, at an interior node.
double kprime_defect(const Trajectory& u, const DiagnosticsSeries& d, double t);

// |E'(t) + 3 A D(t) + A^2 D(t) - A^2 Phi(t)| at an interior node.
double ederiv_defect(const DiagnosticsSeries& d, double t);

// Largest increase E(s_{i+1}) - E(s_i) for s_i up to s_max, relative to E(0).
double max_energy_increase(const DiagnosticsSeries& d, double s_max);

// Weighted norm inequalities for u' and u on the produced trajectory:
// margins 2|u'(0)|^2 + 4|u''|^2 - |u'|^2 and 2|u(0)|^2 + 8|u'(0)|^2 + 16|u''|^2 - |u|^2.
Report weighted_norm_checks(const Trajectory& u);

// Square-root Gronwall applied with u = E, v = eps sqrt(beta/2) N_phi and
// c^2 = E(0) + C_beta eps^2 int N_phi^2 on [0, s_max].
GronwallReport energy_gronwall(const DiagnosticsSeries& d, const ApproxSource& a, double beta, double s_max);

struct EnergyBounds {
  double sup_energy = 0.0;    // sup_{t <= T} |w'|^2 + |w|^2
  double potential_int = 0.0;  // int_tau^{tau+T} W(w)
};

// w is a physical-time trajectory (see rescale).
EnergyBounds energy_bounds(const Trajectory& w, const EnergySpec& spec, double T, double tau);

// Classical energy 1/2 |w'|^2 + W(w) at a physical node t.
double physical_energy(const Trajectory& w, const EnergySpec& spec, double t);

// (sqrt(E(0)) + sqrt(t gamma(t) / 2))^2 - [1/2 |w'(t)|^2 + W(w(t))].
double energy_inequality_margin(const Trajectory& w, const EnergySpec& spec, const SourceSpec& f, double t);

// Product test function b(t) h(x), b = q^4 with q the normalized parabola
// vanishing at t0 and t1 (three continuous derivatives).
struct TestBump {
  double t0 = 0.0;
  double t1 = 1.0;
  Field h;

  // b^(k)(t) for k = 0..3.
  double time_derivative(double t, int k) const;
};

struct WeakFormDefect {
  double with_eps = 0.0;  // includes the eps^2 b''' + 2 eps b'' terms and f_eps
  double eps_free = 0.0;  // limit form with f
  double scale = 0.0;     // largest absolute term, for relative statements
};

WeakFormDefect weak_form_defect(const Trajectory& w, const EnergySpec& spec, const ApproxSource& a,
                                const TestBump& test);

}  // namespace wide
