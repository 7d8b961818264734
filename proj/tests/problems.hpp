#pragma once
// Problem builders and independent oracles shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "catalog.hpp"
#include "wide/spacetime.hpp"

namespace testprob {

using namespace wide;

inline MinProblem small_problem(const EnergySpec& e, const SourceSpec& f, double eps, const Field& w0,
                                const Field& w1, double ds = 0.1, double tail = 6.0) {
  return make_problem(e, build_approx(f, eps), w0, w1, ds, 1.0, tail);
}

// Random perturbation eta with eta_0 = 0 and the homogeneous slope constraint.
inline Trajectory admissible(const MinProblem& p, std::mt19937_64& rng, double amp = 1.0) {
  Trajectory eta(p.w0.grid, p.ds, p.count(), p.eps);
  for (std::size_t i = 2; i < eta.count(); ++i) {
    const Field r = testcat::random_field(p.w0.grid, rng, amp, 3);
    std::copy(r.values.begin(), r.values.end(), eta.frame(i).begin());
  }
  auto e1 = eta.frame(1);
  const auto e2 = eta.frame(2);
  for (std::size_t k = 0; k < e1.size(); ++k) e1[k] = p.first_order_bc ? 0.0 : e2[k] / 4.0;
  return eta;
}

inline Trajectory axpy(const Trajectory& u, double h, const Trajectory& eta) {
  Trajectory v = u.clone();
  auto d = v.data();
  const auto e = eta.data();
  for (std::size_t j = 0; j < d.size(); ++j) d[j] += h * e[j];
  return v;
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = a[r][c] / a[c][c];
      if (m == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= m * a[c][k];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return x;
}

struct GradientCase {
  std::string label;
  double analytic = 0.0;
  double fd = 0.0;
  double el = 0.0;  // el_residual on the same direction
  double scale = 1.0;
  double relative() const { return std::abs(fd - analytic) / scale; }
};

// Directional derivative of J against a fourth-order central difference,
// over every catalog member in 1D and 2D (10 + 5 repetitions each).
inline std::vector<GradientCase> gradient_cases(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradientCase> out;
  for (int dim : {1, 2}) {
    const auto g = make_grid(dim, dim == 1 ? 16 : 8);
    for (const EnergySpec& e : testcat::all_specs()) {
      for (int rep = 0; rep < (dim == 1 ? 10 : 5); ++rep) {
        const Field w0 = testcat::random_field(g, rng, 0.7), w1 = testcat::random_field(g, rng, 0.7);
        const double eps = rep % 2 ? 0.25 : 0.2;
        MinProblem p = small_problem(e, rep % 3 ? smooth_source(g) : SourceSpec::zero(g), eps, w0, w1, 0.25, 2.0);
        p.first_order_bc = rep == 4;
        Trajectory u = axpy(affine_guess(p), 0.3, admissible(p, rng));
        const Trajectory eta = admissible(p, rng);
        const JValue j = assemble_J(p, u);
        GradientCase c;
        c.label = e.name() + " dim " + std::to_string(dim) + " rep " + std::to_string(rep);
        for (std::size_t i = 0; i < u.count(); ++i) c.analytic += g->inner(j.gradient.frame(i), eta.frame(i));
        const double h = 1e-5;
        const double jp = assemble_J(p, axpy(u, h, eta)).value, jm = assemble_J(p, axpy(u, -h, eta)).value;
        const double jp2 = assemble_J(p, axpy(u, 2 * h, eta)).value, jm2 = assemble_J(p, axpy(u, -2 * h, eta)).value;
        c.fd = (8.0 * (jp - jm) - (jp2 - jm2)) / (12.0 * h);
        c.el = el_residual(p, u, eta);
        c.scale = 1.0 + std::abs(c.analytic) + std::abs(j.value);
        out.push_back(c);
      }
    }
  }
  return out;
}

struct QuadraticComparison {
  bool converged = false;
  std::string method;
  double j_value = 0.0, j_affine = 0.0;
  double error = 0.0;  // max over frames of |c_i - y_i|
  double scale = 0.0;  // max |y_i|
};

// W = 1/2 |v_x|^2, w0 = a cos x, w1 = b cos x, f proportional to cos x: each
// frame is c_i cos x and J is a quadratic in (c_2..c_N), solved densely.
inline QuadraticComparison quadratic_single_mode(bool first_order, double eps) {
  const auto g = make_grid(1, 16);
  const double a = 0.8, b = -0.5;
  const Field w0 = Field::from_function(g, [&](double x, double) { return a * std::cos(x); });
  const Field w1 = Field::from_function(g, [&](double x, double) { return b * std::cos(x); });
  const SourceSpec f = SourceSpec::analytic(g, [&](double t, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = 2.0 * std::sin(3.0 * t) * std::cos(g->coord(static_cast<int>(i)));
  });
  MinProblem p = small_problem(EnergySpec(GeneralSemilinear{1.0, {}}), f, eps, w0, w1, 0.1, 6.0);
  p.first_order_bc = first_order;
  const MinimizeReport r = minimize(p);
  QuadraticComparison out{r.converged, r.method, r.j_value, r.j_affine, 0.0, 0.0};

  const std::size_t N = p.intervals();
  const double ds = p.ds;
  std::vector<double> w(N + 1), gi(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    w[i] = ((i == 0 || i == N) ? 0.5 : 1.0) * ds * std::exp(-ds * static_cast<double>(i));
    const double t = eps * ds * static_cast<double>(i);
    gi[i] = (t > p.source.t_eps() && t < p.source.T_eps()) ? 2.0 * std::sin(3.0 * t) : 0.0;
  }
  const std::size_t n = N - 1;
  auto column = [&](std::size_t frame) {
    std::vector<double> col(N + 1, 0.0);
    col[frame] = 1.0;
    if (frame == 2 && !first_order) col[1] = 0.25;
    return col;
  };
  std::vector<double> c0(N + 1, 0.0);
  c0[0] = a;
  c0[1] = first_order ? a + ds * eps * b : (3.0 * a + 2.0 * ds * eps * b) / 4.0;
  auto d2 = [&](const std::vector<double>& c, std::size_t i) {
    if (i == 0) return (2 * c[0] - 5 * c[1] + 4 * c[2] - c[3]) / (ds * ds);
    if (i == N) return (2 * c[N] - 5 * c[N - 1] + 4 * c[N - 2] - c[N - 3]) / (ds * ds);
    return (c[i - 1] - 2 * c[i] + c[i + 1]) / (ds * ds);
  };
  // J(c) = pi sum w_i [d2_i^2 / (2 eps^2) + c_i^2 / 2 - g_i c_i]  (|cos|^2 = pi).
  std::vector<std::vector<double>> cols(n);
  for (std::size_t j = 0; j < n; ++j) cols[j] = column(j + 2);
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i <= N; ++i) {
    std::vector<double> bd(n), bm(n);
    for (std::size_t j = 0; j < n; ++j) {
      bd[j] = d2(cols[j], i);
      bm[j] = cols[j][i];
    }
    const double r0 = d2(c0, i), m0 = c0[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (bd[j] == 0.0 && bm[j] == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) A[j][k] += w[i] * (bd[j] * bd[k] / (eps * eps) + bm[j] * bm[k]);
      rhs[j] -= w[i] * (bd[j] * r0 / (eps * eps) + bm[j] * m0 - bm[j] * gi[i]);
    }
  }
  const std::vector<double> y = dense_solve(A, rhs);
  for (std::size_t i = 2; i <= N; ++i) {
    const double c = g->inner(r.trajectory.frame(i), w0.values) / (a * M_PI);
    out.error = std::max(out.error, std::abs(c - y[i - 2]));
    out.scale = std::max(out.scale, std::abs(y[i - 2]));
  }
  return out;
}

}  // namespace testprob
