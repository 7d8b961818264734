#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "wide/energy.hpp"
#include "wide/grid.hpp"
#include "wide/source.hpp"
#include "wide/trajectory.hpp"

namespace wide {

// Discrete minimization of
//   J(u) = sum_i q_i e^{-s_i} [ |D2 u_i|^2 / (2 eps^2) + W(u_i) - (phi(s_i), u_i) ]
// over u with u_0 = w0 and a one-sided u'(0) = eps w1 constraint.
struct MinProblem {
  EnergySpec energy;
  ApproxSource source;
  double eps;
  Field w0;
  Field w1;
  double ds = 0.05;
  double T_phys = 1.0;
  double tail_pad = 12.0;
  // <= 0 selects 1e-8 (1 + |J(psi)|) for the affine competitor psi.
  double tol_grad = 0.0;
  int max_iter = 5000;
  int memory = 10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  // u'(0) by (u_1 - u_0)/ds instead of the second-order one-sided stencil.
  bool first_order_bc = false;
  // Constant in the level estimate H(u) <= W(w0) + C eps.
  double level_C = 0.0;

  // Number of intervals N, with N ds >= T_phys / eps + tail_pad.
  std::size_t intervals() const;
  std::size_t count() const { return intervals() + 1; }
  double S_max() const { return static_cast<double>(intervals()) * ds; }
  void validate() const;
};

MinProblem make_problem(EnergySpec energy, ApproxSource source, Field w0, Field w1, double ds = 0.05,
                        double T_phys = 1.0, double tail_pad = 12.0);

struct JValue {
  double value = 0.0;
  double h_value = 0.0;
  double s_value = 0.0;
  // Spatial L2 representative per frame; rows 0 and 1 are eliminated by
  // the constraints and folded into row 2.
  Trajectory gradient;
};

struct MinimizeReport {
  Trajectory trajectory;
  double j_value = 0.0;
  double h_value = 0.0;
  double s_value = 0.0;
  double j_affine = 0.0;
  double grad_norm = 0.0;
  double tol_grad = 0.0;
  int iterations = 0;
  bool converged = false;
  // W(w0) + level_C eps - H(u)
  double level_margin = 0.0;
  std::string method;
  std::string message;
};

// The affine competitor u_i = w0 + eps s_i w1.
Trajectory affine_guess(const MinProblem& p);

JValue assemble_J(const MinProblem& p, const Trajectory& u);
MinimizeReport minimize(const MinProblem& p);

// |<dJ(u), eta>| for eta with eta(0) = 0 and eta'(0) = 0 (discrete constraints).
double el_residual(const MinProblem& p, const Trajectory& u, const Trajectory& eta);

// sqrt(eta^T P eta) for the preconditioner P of the problem; the dual pairing
// gives el_residual <= grad_norm * precond_norm(eta).
double precond_norm(const MinProblem& p, const Trajectory& eta);

// Returns true if eta is an admissible test direction for the constraints.
bool admissible_direction(const MinProblem& p, const Trajectory& eta, double tol = 1e-10);

// lhs = (D2 u(tau), h) / eps^2, rhs = -A^2<gradW(u), h>(tau) + A^2(phi, h)(tau).
std::pair<double, double> representation_check(const MinProblem& p, const Trajectory& u, const Field& h,
                                               double tau);

// Second difference at frame i with the objective's stencil (one-sided at the ends).
void second_difference(const Trajectory& u, std::size_t i, std::span<double> out);
// First difference at frame i: central inside, second-order one-sided at the ends.
void first_difference(const Trajectory& u, std::size_t i, std::span<double> out);

}  // namespace wide
