#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wide/grid.hpp"

namespace wide {

// (lambda / p) int |grad^order v|^p
struct PowerTerm {
  int order = 0;
  double lambda = 0.0;
  double p = 2.0;
};

// 1/2 ||v||^2_{H^m dot} + sum of power terms with order < m.
struct GeneralSemilinear {
  double m = 1.0;
  std::vector<PowerTerm> terms;
};

// int 1/2 |grad v|^2 + 1 - cos v
struct SineGordon {};

// (1/p) int |grad v|^p [+ (lambda/q) int |v|^q], smoothed by mu when p < 2.
struct PLaplacian {
  struct Lower {
    double q = 2.0;
    double lambda = 1.0;
  };
  double p = 4.0;
  std::optional<Lower> lower;
  double mu = 1e-8;
};

// 1/4 (int |grad v|^2)^2
struct Kirchhoff {};

// 1/2 || |k|^s v ||^2 + (lambda/p) int |v|^p
struct FractionalNLW {
  double s = 0.5;
  double lambda = 0.0;
  double p = 4.0;
};

// W = 0
struct ZeroEnergy {};

using EnergyVariant =
    std::variant<ZeroEnergy, GeneralSemilinear, SineGordon, PLaplacian, Kirchhoff, FractionalNLW>;

// Growth exponent prescribed for each catalog member.
double theta_for(const EnergyVariant& v);

class EnergySpec {
public:
  explicit EnergySpec(EnergyVariant variant, double growth_C = 1.0);

  const EnergyVariant& variant() const { return variant_; }
  double theta() const { return theta_; }
  double growth_C() const { return growth_C_; }
  std::string name() const;

  // True when W is a quadratic form (gradient linear in v).
  bool is_quadratic() const;
  // False for the members whose weak-solution item is open (Kirchhoff, p-Laplacian).
  bool weak_solution_applicable() const;
  // True when grad_W(v) has zero spatial mean for every v.
  bool gradient_mean_free() const;
  // Highest spatial derivative order appearing in W.
  double max_order() const;

private:
  EnergyVariant variant_;
  double theta_;
  double growth_C_;
};

double eval_W(const EnergySpec& spec, const Field& v);
Field grad_W(const EnergySpec& spec, const Field& v);

// Dictionary surrogate of the dual-norm growth bound: returns
// (sup_h <grad_W(v), h> / ||h||_W, growth_C (1 + W(v)^theta)).
std::pair<double, double> growth_check(const EnergySpec& spec, const Field& v);

// Norm of the energy space used to normalize growth_check test fields.
double w_norm(const EnergySpec& spec, const Field& h);

// Spectral symbol of the quadratic part of W at |k|^2 = k2.
double linear_symbol(const EnergySpec& spec, double k2);

// Per spectral mode, the symbol of the Hessian of W frozen at a reference
// state (spatial averages of the pointwise curvature). Used for preconditioning.
std::vector<double> frozen_symbols(const EnergySpec& spec, const Field& state);

// Upper bound for the largest eigenvalue of the Hessian of W at state
// (pointwise suprema instead of averages).
double stiffness_bound(const EnergySpec& spec, const Field& state);

namespace detail {
// Value of W on raw samples; writes the gradient when grad is non-empty.
double energy_value_grad(const EnergySpec& spec, const SpaceGrid& grid, std::span<const double> v,
                         std::span<double> grad);
}  // namespace detail

}  // namespace wide
