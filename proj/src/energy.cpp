#include "wide/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wide {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kSmoothing = 1e-8;

struct MultiIndex {
  int ax;
  int ay;
  double weight;
};

std::vector<MultiIndex> multi_indices(int dim, int order) {
  if (dim == 1) return {{order, 0, 1.0}};
  std::vector<MultiIndex> out;
  double binom = 1.0;
  for (int a = 0; a <= order; ++a) {
    out.push_back({a, order - a, binom});
    binom = binom * (order - a) / (a + 1);
  }
  return out;
}

// Pointwise |grad^order v|^2 and the derivative samples behind it.
std::vector<double> tensor_square(const SpaceGrid& g, std::span<const double> v, int order,
                                  std::vector<std::vector<double>>& parts) {
  const auto idx = multi_indices(g.dim(), order);
  parts.assign(idx.size(), std::vector<double>(g.size()));
  std::vector<double> r2(g.size(), 0.0);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    g.derivative(v, parts[a], idx[a].ax, idx[a].ay);
    for (std::size_t i = 0; i < g.size(); ++i) r2[i] += idx[a].weight * parts[a][i] * parts[a][i];
  }
  return r2;
}

// (lambda / p) int |grad^order v|^p, smoothed as (r^2 + mu^2)^{p/2} - mu^p
// when p < 2; the gradient is accumulated into grad if non-empty.
double power_term(const SpaceGrid& g, std::span<const double> v, int order, double lambda, double p,
                  double mu, std::span<double> grad) {
  if (lambda == 0.0) return 0.0;
  std::vector<std::vector<double>> parts;
  const std::vector<double> r2 = tensor_square(g, v, order, parts);
  const bool smooth = p < 2.0;
  const double mu2 = mu * mu;
  const double mup = smooth ? std::pow(mu, p) : 0.0;
  double total = 0.0;
  std::vector<double> weight(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = smooth ? r2[i] + mu2 : r2[i];
    if (p == 2.0) {
      total += r;
      weight[i] = 1.0;
    } else if (p == 4.0) {
      total += r * r - (smooth ? mup : 0.0);
      weight[i] = r;
    } else {
      total += std::pow(r, 0.5 * p) - mup;
      weight[i] = std::pow(r, 0.5 * p - 1.0);
    }
  }
  if (!grad.empty()) {
    const auto idx = multi_indices(g.dim(), order);
    const double sign = order % 2 == 0 ? 1.0 : -1.0;
    std::vector<double> work(g.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t i = 0; i < g.size(); ++i) work[i] = weight[i] * parts[a][i];
      g.derivative(work, work, idx[a].ax, idx[a].ay);
      const double c = lambda * sign * idx[a].weight;
      for (std::size_t i = 0; i < g.size(); ++i) grad[i] += c * work[i];
    }
  }
  return lambda / p * total * g.cell_volume();
}

// 1/2 (v, |k|^{2m} v); adds |k|^{2m} v to grad if non-empty.
double quadratic_part(const SpaceGrid& g, std::span<const double> v, double m, std::span<double> grad,
                      double factor = 1.0) {
  std::vector<double> lv(g.size());
  g.laplace_power(v, lv, m);
  if (!grad.empty())
    for (std::size_t i = 0; i < g.size(); ++i) grad[i] += factor * lv[i];
  return 0.5 * g.inner(v, lv);
}

double lp_norm(const SpaceGrid& g, std::span<const double> v, int order, double p) {
  std::vector<std::vector<double>> parts;
  const auto r2 = tensor_square(g, v, order, parts);
  double s = 0.0;
  for (double r : r2) s += std::pow(r, 0.5 * p);
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

// Spatial mean of the pointwise curvature weight of a power term.
double mean_curvature(const SpaceGrid& g, std::span<const double> v, int order, double p, bool sup) {
  if (p == 2.0) return 1.0;
  std::vector<std::vector<double>> parts;
  const auto r2 = tensor_square(g, v, order, parts);
  const double floor2 = p < 2.0 ? 1e-4 : 0.0;
  double acc = 0.0;
  for (double r : r2) {
    const double w = (p - 1.0) * std::pow(r + floor2, 0.5 * p - 1.0);
    acc = sup ? std::max(acc, w) : acc + w;
  }
  return sup ? acc : acc / static_cast<double>(r2.size());
}

void check_resolvable(const SpaceGrid& g, double order) {
  if (g.points_per_axis() <= 2.0 * order)
    throw std::invalid_argument("grid too coarse for the derivative order of W");
}

}  // namespace

double theta_for(const EnergyVariant& v) {
  return std::visit(
      overloaded{
          [](const ZeroEnergy&) { return 0.5; },
          [](const GeneralSemilinear& e) {
            double pmax = 2.0;
            for (const auto& t : e.terms)
              if (t.lambda > 0.0) pmax = std::max(pmax, t.p);
            return 1.0 - 1.0 / pmax;
          },
          [](const SineGordon&) { return 0.5; },
          [](const PLaplacian& e) {
            const double top = e.lower ? std::max(e.p, e.lower->q) : e.p;
            return 1.0 - 1.0 / top;
          },
          [](const Kirchhoff&) { return 0.75; },
          [](const FractionalNLW& e) { return e.lambda > 0.0 ? 1.0 - 1.0 / std::max(2.0, e.p) : 0.5; },
      },
      v);
}

EnergySpec::EnergySpec(EnergyVariant variant, double growth_C)
    : variant_(std::move(variant)), growth_C_(growth_C) {
  if (!(growth_C >= 0.0)) throw std::invalid_argument("EnergySpec: growth_C must be nonnegative");
  std::visit(overloaded{
                 [](const ZeroEnergy&) {},
                 [](const GeneralSemilinear& e) {
                   if (!(e.m > 0.0) || !std::isfinite(e.m))
                     throw std::invalid_argument("GeneralSemilinear: m must be positive");
                   for (const auto& t : e.terms) {
                     if (t.order < 0 || !(t.order < e.m))
                       throw std::invalid_argument("GeneralSemilinear: lower-order terms need 0 <= k < m");
                     if (!(t.lambda >= 0.0)) throw std::invalid_argument("GeneralSemilinear: lambda must be >= 0");
                     if (!(t.p > 1.0)) throw std::invalid_argument("GeneralSemilinear: p must exceed 1");
                   }
                 },
                 [](const SineGordon&) {},
                 [](const PLaplacian& e) {
                   if (!(e.p > 1.0)) throw std::invalid_argument("PLaplacian: p must exceed 1");
                   if (!(e.mu > 0.0)) throw std::invalid_argument("PLaplacian: mu must be positive");
                   if (e.lower && (!(e.lower->q > 1.0) || !(e.lower->lambda >= 0.0)))
                     throw std::invalid_argument("PLaplacian: lower term needs q > 1, lambda >= 0");
                 },
                 [](const Kirchhoff&) {},
                 [](const FractionalNLW& e) {
                   if (!(e.s > 0.0 && e.s < 1.0)) throw std::invalid_argument("FractionalNLW: s in (0,1)");
                   if (!(e.lambda >= 0.0)) throw std::invalid_argument("FractionalNLW: lambda >= 0");
                   if (!(e.p > 1.0)) throw std::invalid_argument("FractionalNLW: p must exceed 1");
                 },
             },
             variant_);
  theta_ = theta_for(variant_);
}

std::string EnergySpec::name() const {
  char buf[160];
  return std::visit(
      overloaded{
          [&](const ZeroEnergy&) { return std::string("zero"); },
          [&](const GeneralSemilinear& e) {
            std::string s;
            std::snprintf(buf, sizeof buf, "semilinear(m=%g", e.m);
            s = buf;
            for (const auto& t : e.terms) {
              std::snprintf(buf, sizeof buf, ",[k=%d,lambda=%g,p=%g]", t.order, t.lambda, t.p);
              s += buf;
            }
            return s + ")";
          },
          [&](const SineGordon&) { return std::string("sine_gordon"); },
          [&](const PLaplacian& e) {
            if (e.lower)
              std::snprintf(buf, sizeof buf, "p_laplace(p=%g,q=%g,lambda=%g)", e.p, e.lower->q, e.lower->lambda);
            else
              std::snprintf(buf, sizeof buf, "p_laplace(p=%g)", e.p);
            return std::string(buf);
          },
          [&](const Kirchhoff&) { return std::string("kirchhoff"); },
          [&](const FractionalNLW& e) {
            std::snprintf(buf, sizeof buf, "fractional(s=%g,lambda=%g,p=%g)", e.s, e.lambda, e.p);
            return std::string(buf);
          },
      },
      variant_);
}

bool EnergySpec::is_quadratic() const {
  return std::visit(overloaded{
                        [](const ZeroEnergy&) { return true; },
                        [](const GeneralSemilinear& e) {
                          return std::all_of(e.terms.begin(), e.terms.end(),
                                             [](const PowerTerm& t) { return t.p == 2.0 || t.lambda == 0.0; });
                        },
                        [](const SineGordon&) { return false; },
                        [](const PLaplacian& e) {
                          return e.p == 2.0 && (!e.lower || e.lower->q == 2.0 || e.lower->lambda == 0.0);
                        },
                        [](const Kirchhoff&) { return false; },
                        [](const FractionalNLW& e) { return e.lambda == 0.0 || e.p == 2.0; },
                    },
                    variant_);
}

bool EnergySpec::weak_solution_applicable() const {
  return !std::holds_alternative<Kirchhoff>(variant_) && !std::holds_alternative<PLaplacian>(variant_);
}

bool EnergySpec::gradient_mean_free() const {
  return std::visit(overloaded{
                        [](const ZeroEnergy&) { return true; },
                        [](const GeneralSemilinear& e) {
                          return std::none_of(e.terms.begin(), e.terms.end(),
                                              [](const PowerTerm& t) { return t.order == 0 && t.lambda > 0.0; });
                        },
                        [](const SineGordon&) { return false; },
                        [](const PLaplacian& e) { return !e.lower || e.lower->lambda == 0.0; },
                        [](const Kirchhoff&) { return true; },
                        [](const FractionalNLW& e) { return e.lambda == 0.0; },
                    },
                    variant_);
}

double EnergySpec::max_order() const {
  return std::visit(overloaded{
                        [](const ZeroEnergy&) { return 0.0; },
                        [](const GeneralSemilinear& e) { return e.m; },
                        [](const SineGordon&) { return 1.0; },
                        [](const PLaplacian&) { return 1.0; },
                        [](const Kirchhoff&) { return 1.0; },
                        [](const FractionalNLW& e) { return e.s; },
                    },
                    variant_);
}

namespace detail {

double energy_value_grad(const EnergySpec& spec, const SpaceGrid& g, std::span<const double> v,
                         std::span<double> grad) {
  if (v.size() != g.size() || (!grad.empty() && grad.size() != g.size()))
    throw std::invalid_argument("energy: field size does not match grid");
  check_resolvable(g, std::ceil(spec.max_order()));
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  const double vol = g.cell_volume();
  return std::visit(
      overloaded{
          [&](const ZeroEnergy&) { return 0.0; },
          [&](const GeneralSemilinear& e) {
            double w = quadratic_part(g, v, e.m, grad);
            for (const auto& t : e.terms) w += power_term(g, v, t.order, t.lambda, t.p, kSmoothing, grad);
            return w;
          },
          [&](const SineGordon&) {
            double w = quadratic_part(g, v, 1.0, grad);
            double s = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
              const double h = std::sin(0.5 * v[i]);
              s += 2.0 * h * h;
              if (!grad.empty()) grad[i] += std::sin(v[i]);
            }
            return w + s * vol;
          },
          [&](const PLaplacian& e) {
            double w = power_term(g, v, 1, 1.0, e.p, e.mu, grad);
            if (e.lower) w += power_term(g, v, 0, e.lower->lambda, e.lower->q, e.mu, grad);
            return w;
          },
          [&](const Kirchhoff&) {
            std::vector<double> lv(g.size());
            g.laplace_power(v, lv, 1.0);
            const double G = g.inner(v, lv);
            if (!grad.empty())
              for (std::size_t i = 0; i < g.size(); ++i) grad[i] = G * lv[i];
            return 0.25 * G * G;
          },
          [&](const FractionalNLW& e) {
            return quadratic_part(g, v, e.s, grad) + power_term(g, v, 0, e.lambda, e.p, kSmoothing, grad);
          },
      },
      spec.variant());
}

}  // namespace detail

double eval_W(const EnergySpec& spec, const Field& v) {
  return detail::energy_value_grad(spec, *v.grid, v.values, {});
}

Field grad_W(const EnergySpec& spec, const Field& v) {
  Field out(v.grid);
  detail::energy_value_grad(spec, *v.grid, v.values, out.values);
  return out;
}

double w_norm(const EnergySpec& spec, const Field& h) {
  const SpaceGrid& g = *h.grid;
  const double l2 = h.norm();
  auto hdot = [&](double m) {
    std::vector<double> lv(g.size());
    g.laplace_power(h.values, lv, m);
    return std::sqrt(std::max(0.0, g.inner(h.values, lv)));
  };
  return std::visit(overloaded{
                        [&](const ZeroEnergy&) { return l2; },
                        [&](const GeneralSemilinear& e) {
                          double n = l2 + hdot(e.m);
                          for (const auto& t : e.terms)
                            if (t.lambda > 0.0) n += lp_norm(g, h.values, t.order, t.p);
                          return n;
                        },
                        [&](const SineGordon&) { return l2 + hdot(1.0); },
                        [&](const PLaplacian& e) {
                          double n = l2 + lp_norm(g, h.values, 1, e.p);
                          if (e.lower && e.lower->lambda > 0.0) n += lp_norm(g, h.values, 0, e.lower->q);
                          return n;
                        },
                        [&](const Kirchhoff&) { return l2 + hdot(1.0); },
                        [&](const FractionalNLW& e) {
                          double n = l2 + hdot(e.s);
                          if (e.lambda > 0.0) n += lp_norm(g, h.values, 0, e.p);
                          return n;
                        },
                    },
                    spec.variant());
}

std::pair<double, double> growth_check(const EnergySpec& spec, const Field& v) {
  const GridPtr& g = v.grid;
  const Field grad = grad_W(spec, v);
  const double k0 = kTwoPi / g->length();
  std::vector<Field> dictionary;
  for (int j = 1; j <= 4; ++j) {
    const double k = j * k0;
    dictionary.push_back(Field::from_function(g, [k](double x, double) { return std::sin(k * x); }));
    dictionary.push_back(Field::from_function(g, [k](double x, double) { return std::cos(k * x); }));
    if (g->dim() == 2) {
      dictionary.push_back(Field::from_function(g, [k](double, double y) { return std::sin(k * y); }));
      dictionary.push_back(Field::from_function(g, [k](double, double y) { return std::cos(k * y); }));
      dictionary.push_back(Field::from_function(g, [k](double x, double y) { return std::sin(k * (x + y)); }));
    }
  }
  double lhs = 0.0;
  for (const Field& h : dictionary) lhs = std::max(lhs, std::abs(grad.inner(h)) / w_norm(spec, h));
  const double rhs = spec.growth_C() * (1.0 + std::pow(eval_W(spec, v), spec.theta()));
  return {lhs, rhs};
}

double linear_symbol(const EnergySpec& spec, double k2) {
  auto pw = [k2](double m) { return k2 == 0.0 ? (m == 0.0 ? 1.0 : 0.0) : std::pow(k2, m); };
  return std::visit(overloaded{
                        [&](const ZeroEnergy&) { return 0.0; },
                        [&](const GeneralSemilinear& e) {
                          double s = pw(e.m);
                          for (const auto& t : e.terms)
                            if (t.p == 2.0) s += t.lambda * pw(t.order);
                          return s;
                        },
                        [&](const SineGordon&) { return k2; },
                        [&](const PLaplacian& e) {
                          double s = e.p == 2.0 ? k2 : 0.0;
                          if (e.lower && e.lower->q == 2.0) s += e.lower->lambda;
                          return s;
                        },
                        [&](const Kirchhoff&) { return 0.0; },
                        [&](const FractionalNLW& e) { return pw(e.s) + (e.p == 2.0 ? e.lambda : 0.0); },
                    },
                    spec.variant());
}

namespace {

// Hessian curvature of the non-quadratic part as sum_j c_j |k|^{2 q_j}.
std::vector<std::pair<double, double>> curvature_terms(const EnergySpec& spec, const Field& state, bool sup) {
  const SpaceGrid& g = *state.grid;
  const auto& v = state.values;
  std::vector<std::pair<double, double>> out;
  std::visit(overloaded{
                 [&](const ZeroEnergy&) {},
                 [&](const GeneralSemilinear& e) {
                   for (const auto& t : e.terms)
                     if (t.p != 2.0 && t.lambda > 0.0)
                       out.emplace_back(t.lambda * mean_curvature(g, v, t.order, t.p, sup), t.order);
                 },
                 [&](const SineGordon&) {
                   if (sup) {
                     out.emplace_back(1.0, 0.0);
                     return;
                   }
                   double acc = 0.0;
                   for (double x : v) acc += std::cos(x);
                   out.emplace_back(std::max(acc / static_cast<double>(v.size()), 0.0), 0.0);
                 },
                 [&](const PLaplacian& e) {
                   if (e.p != 2.0) out.emplace_back(mean_curvature(g, v, 1, e.p, sup), 1.0);
                   if (e.lower && e.lower->q != 2.0)
                     out.emplace_back(e.lower->lambda * mean_curvature(g, v, 0, e.lower->q, sup), 0.0);
                 },
                 [&](const Kirchhoff&) {
                   std::vector<double> lv(g.size());
                   g.laplace_power(v, lv, 1.0);
                   out.emplace_back(g.inner(v, lv), 1.0);
                   if (sup) out.emplace_back(2.0 * g.inner(lv, lv), 0.0);
                 },
                 [&](const FractionalNLW& e) {
                   if (e.p != 2.0 && e.lambda > 0.0)
                     out.emplace_back(e.lambda * mean_curvature(g, v, 0, e.p, sup), 0.0);
                 },
             },
             spec.variant());
  return out;
}

double sum_terms(const std::vector<std::pair<double, double>>& terms, double k2) {
  double s = 0.0;
  for (const auto& [c, q] : terms) s += c * (q == 0.0 ? 1.0 : std::pow(k2, q));
  return s;
}

}  // namespace

std::vector<double> frozen_symbols(const EnergySpec& spec, const Field& state) {
  const SpaceGrid& g = *state.grid;
  const auto terms = curvature_terms(spec, state, false);
  std::vector<double> out(g.spectral_size());
  for (std::size_t m = 0; m < out.size(); ++m) {
    const auto k = g.mode_k(m);
    const double k2 = k[0] * k[0] + k[1] * k[1];
    out[m] = linear_symbol(spec, k2) + sum_terms(terms, k2);
  }
  return out;
}

double stiffness_bound(const EnergySpec& spec, const Field& state) {
  const SpaceGrid& g = *state.grid;
  const double kn = kTwoPi / g.length() * (g.points_per_axis() / 2);
  const double k2 = g.dim() * kn * kn;
  return linear_symbol(spec, k2) + sum_terms(curvature_terms(spec, state, true), k2);
}

}  // namespace wide
