#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wide/grid.hpp"
#include "wide/report.hpp"

namespace wide {

// Forcing term f(t, x) on a grid, either closed-form or tabulated in time.
class SourceSpec {
public:
  using Sampler = std::function<void(double t, std::span<double> out)>;

  static SourceSpec zero(GridPtr grid);
  // breakpoints: times where f may jump or kink (integration splits there).
  static SourceSpec analytic(GridPtr grid, Sampler f, std::vector<double> breakpoints = {});
  // Linear interpolation in time; zero after the last tabulated time.
  static SourceSpec tabulated(GridPtr grid, std::vector<double> times, std::vector<std::vector<double>> frames);
  // CSV: header row, then rows "t, v_0, ..., v_{N-1}" (row-major grid values).
  static SourceSpec load_csv(GridPtr grid, const std::string& path);

  const GridPtr& grid() const { return grid_; }
  bool is_zero() const { return zero_; }
  const std::vector<double>& breakpoints() const { return breaks_; }

  void sample(double t, std::span<double> out) const;
  Field at(double t) const;
  double norm2(double t) const;

private:
  GridPtr grid_;
  Sampler f_;
  std::vector<double> breaks_;
  bool zero_ = false;
};

// sin(k x) [sin(k y)] times amplitude on [0, t_end], zero afterwards.
SourceSpec pulse_source(GridPtr grid, double amplitude = 1.0, double t_end = 1.0);
// amplitude sin(t) cos(2x) [cos(y)].
SourceSpec smooth_source(GridPtr grid, double amplitude = 1.0);
// A fixed field with unit L2 norm, for all t.
SourceSpec unit_norm_source(GridPtr grid);
// g(x) e^{-t} with g = sqrt(2 / |torus|) (so ||g||^2 = 2).
SourceSpec decaying_source(GridPtr grid);

// gamma(t) = int_0^t ||f(s)||^2 ds.
double gamma_of(const SourceSpec& f, double t);

// f_eps = chi_(t_eps, T_eps) f with t_eps = k sqrt(eps) and
// T_eps = min(Gamma^{-1}(1/eps), 1/sqrt(eps)), Gamma(t) = t + gamma(t).
class ApproxSource {
public:
  ApproxSource(SourceSpec base, double eps, double k_cut, double t_eps, double T_eps);

  const SourceSpec& base() const { return base_; }
  double eps() const { return eps_; }
  double k_cut() const { return k_cut_; }
  double t_eps() const { return t_eps_; }
  double T_eps() const { return T_eps_; }
  // Fast-time support end T* = T_eps / eps.
  double support_end() const { return T_eps_ / eps_; }
  bool is_zero() const { return base_.is_zero(); }
  bool active(double t) const { return t > t_eps_ && t < T_eps_; }

  void f_eps(double t, std::span<double> out) const;
  Field f_eps(double t) const;
  // phi(s) = f_eps(eps s).
  void phi(double s, std::span<double> out) const { f_eps(eps_ * s, out); }
  double phi_norm2(double s) const;
  double gamma(double t) const { return gamma_of(base_, t); }

  // The windowed source as a SourceSpec in its own right.
  SourceSpec windowed() const;

private:
  SourceSpec base_;
  double eps_, k_cut_, t_eps_, T_eps_;
};

ApproxSource build_approx(const SourceSpec& f, double eps, double k_cut = 4.0);

// Gamma^{-1}(y) by bisection.
double gamma_inverse(const SourceSpec& f, double y);

// Properties (i)-(v) of the windowed approximation at one eps; T is the
// physical window used for (i).
Report verify_fapp_properties(const ApproxSource& a, double T);

// (i) across a decreasing eps list: distance to f shrinks, norm grows.
Report verify_fapp_sweep(const SourceSpec& f, const std::vector<double>& eps_list, double T,
                         double k_cut = 4.0);

// Assumptions on phi in fast time up to the given horizon: compact support,
// weighted norm at most eps, and the integrated A^2 growth bound.
Report verify_phi_assumptions(const ApproxSource& a, double horizon);

// Checks the k_cut requirement e^{-k/sqrt(eps)} <= eps^5 and
// e^{-t_eps/eps}(1 + T_eps/eps) <= eps^3 for every eps; throws otherwise.
void require_cutoff_admissible(const SourceSpec& f, const std::vector<double>& eps_list, double k_cut);

}  // namespace wide
