#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

/// \file timeweight.hpp
/// Exponentially weighted time calculus on piecewise-linear samples.
///
/// Every operator here integrates the piecewise-linear interpolant of the
/// samples exactly against the kernels e^{-(s-t)} and (s-t) e^{-(s-t)}, so
/// identities between the average operators hold to rounding.

namespace wide {

/// Extrapolation of a TimeSeries beyond its last node.
enum class Tail { Zero, ConstantLast };

/// Real samples on a strictly increasing time grid starting at 0.
class TimeSeries {
public:
  TimeSeries(std::vector<double> nodes, std::vector<double> values,
             Tail tail = Tail::ConstantLast);

  /// Nodes i * step for i = 0..values.size()-1.
  static TimeSeries uniform(double step, std::vector<double> values,
                            Tail tail = Tail::ConstantLast);

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> values() const { return values_; }
  Tail tail() const { return tail_; }
  std::size_t size() const { return nodes_.size(); }
  double last_node() const { return nodes_.back(); }

  /// Value of the interpolant (with tail) at t >= 0.
  double operator()(double t) const;

  double sup_norm() const;

  /// Index j of the segment [nodes[j], nodes[j+1]] holding t (clamped).
  std::size_t segment_of(double t) const;

private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  Tail tail_;
};

/// A h(t) = int_t^inf e^{-(s-t)} h(s) ds.
double avg(const TimeSeries& h, double t);

/// A^2 h(t) = int_t^inf e^{-(s-t)} (s-t) h(s) ds.
double avg2(const TimeSeries& h, double t);

/// A h at every node, by the backward recurrence over segments.
std::vector<double> avg_at_nodes(const TimeSeries& h);

/// A^2 h at every node, by the backward recurrence over segments.
std::vector<double> avg2_at_nodes(const TimeSeries& h);

/// Exact integral of the interpolant (with tail) over [a, b].
double integral(const TimeSeries& h, double a, double b);

/// Exact integral of A h over [a, b], from the closed form of A h on each
/// linear piece: A h(t) = h(t) + m + (A h(b) - h(b) - m) e^{t-b}.
double integral_of_avg(const TimeSeries& h, double a, double b);

/// Exact integral of A^2 h over [a, b] (same construction, one level up).
double integral_of_avg2(const TimeSeries& h, double a, double b);

/// Absolute defect of the integrated average identities on [tau, tau+delta].
/// order 1: int A h - int h - A h(tau+delta) + A h(tau).
/// order 2: int A^2 h - int h - [A h] - [A^2 h], brackets are increments.
/// Requires h >= 0.
double avg_identity_defect(const TimeSeries& h, double tau, double delta, int order);

/// int_0^inf e^{-s} n(s) ds for a nonnegative series n(s) = ||v(s)||^2.
double weighted_l2(const TimeSeries& squared_norms);

/// RHS - LHS of the weighted Poincare inequalities at time t.
///
/// order 1: A|h|^2(t) <= alpha |h(t)|^2 + C_alpha A|h'|^2(t),
///          C_alpha = alpha^2 / (alpha - 1).
/// order 2: A^2|h|^2(t) <= beta |h(t)|^2 + C_beta (A|h'|^2 + A^2|h'|^2)(t),
///          beta = alpha^2, C_beta = alpha C_alpha.
///
/// Without \p h_prime the exact piecewise-constant derivative of the
/// interpolant is used; otherwise \p h_prime is squared as its own
/// interpolant.
double poincare_defect(const TimeSeries& h, const std::optional<TimeSeries>& h_prime,
                       double t, double alpha, int order);

/// Constant C_alpha = alpha^2 / (alpha - 1).
double poincare_constant(double alpha);

struct GronwallReport {
  bool hypothesis_checked = false;
  bool hypothesis_holds = true;
  bool conclusion_holds = true;
  /// min over nodes of RHS - LHS for the hypothesis (if checked).
  double hypothesis_margin = 0.0;
  /// min over nodes of c + int v - sqrt(u).
  double conclusion_margin = 0.0;
  std::optional<std::size_t> first_violation;
  std::string message;

  bool ok() const { return hypothesis_holds && conclusion_holds; }
  explicit operator bool() const { return ok(); }
};

/// Checks the square-root Gronwall variant on a common grid.
///
/// The hypothesis u <= c^2 + 2 int v sqrt(u) is verified first unless
/// \p assume_hypothesis is set; a violated hypothesis yields a report with
/// ok() == false rather than an exception.
GronwallReport gronwall_bound(const TimeSeries& u, const TimeSeries& v, const TimeSeries& c,
                              bool assume_hypothesis = false);

/// Y(z) = int_0^z e^{-s} s ds = 1 - e^{-z}(1 + z).
double y_of(double z);

namespace detail {
/// I_n(L) = int_0^L x^n e^{-x} dx for n = 0..3, cancellation-free.
double exp_moment(int n, double length);
}  // namespace detail

}  // namespace wide
