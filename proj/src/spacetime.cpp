#include "wide/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "wide/optim.hpp"
#include "wide/timeweight.hpp"

namespace wide {

std::size_t MinProblem::intervals() const {
  const double span = T_phys / eps + tail_pad;
  return static_cast<std::size_t>(std::ceil(span / ds - 1e-9));
}

void MinProblem::validate() const {
  if (!(eps > 0.0 && eps <= 0.25)) throw std::invalid_argument("MinProblem: eps must lie in (0, 0.25]");
  if (std::abs(source.eps() - eps) > 1e-15 * eps)
    throw std::invalid_argument("MinProblem: source built for a different eps");
  require_same_grid(*w0.grid, *w1.grid);
  require_same_grid(*w0.grid, *source.base().grid());
  if (!(ds > 0.0)) throw std::invalid_argument("MinProblem: ds must be positive");
  if (!(T_phys > 0.0) || !(tail_pad >= 0.0)) throw std::invalid_argument("MinProblem: bad horizon");
  if (intervals() < 3) throw std::invalid_argument("MinProblem: need at least 4 time nodes");
  if (max_iter < 1 || memory < 1) throw std::invalid_argument("MinProblem: bad optimizer settings");
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
    throw std::invalid_argument("MinProblem: Wolfe constants need 0 < c1 < c2 < 1");
}

MinProblem make_problem(EnergySpec energy, ApproxSource source, Field w0, Field w1, double ds, double T_phys,
                        double tail_pad) {
  const double eps = source.eps();
  MinProblem p{std::move(energy), std::move(source), eps, std::move(w0), std::move(w1)};
  p.ds = ds;
  p.T_phys = T_phys;
  p.tail_pad = tail_pad;
  p.validate();
  return p;
}

namespace {

struct StencilRow {
  std::size_t first;  // index of the first frame touched
  double c[4];
  int len;
};

StencilRow d2_row(std::size_t i, std::size_t N, double inv_ds2) {
  if (i == 0) return {0, {2.0 * inv_ds2, -5.0 * inv_ds2, 4.0 * inv_ds2, -inv_ds2}, 4};
  if (i == N) return {N - 3, {-inv_ds2, 4.0 * inv_ds2, -5.0 * inv_ds2, 2.0 * inv_ds2}, 4};
  return {i - 1, {inv_ds2, -2.0 * inv_ds2, inv_ds2, 0.0}, 3};
}

// The discrete functional with the constraint elimination and the
// per-mode banded preconditioner.
class Functional {
public:
  explicit Functional(const MinProblem& p)
      : p_(p), grid_(*p.w0.grid), N_(p.intervals()), M_(grid_.size()), vol_(grid_.cell_volume()) {
    weight_.resize(N_ + 1);
    for (std::size_t i = 0; i <= N_; ++i) {
      const double q = (i == 0 || i == N_) ? 0.5 * p.ds : p.ds;
      weight_[i] = q * std::exp(-static_cast<double>(i) * p.ds);
    }
    if (!p.source.is_zero()) {
      phi_.assign((N_ + 1) * M_, 0.0);
      for (std::size_t i = 0; i <= N_; ++i)
        p.source.phi(static_cast<double>(i) * p.ds, std::span<double>(phi_.data() + i * M_, M_));
    }
    u1_coupling_ = p.first_order_bc ? 0.0 : 0.25;
    build_preconditioner();
  }

  std::size_t n_free() const { return (N_ - 1) * M_; }
  std::size_t N() const { return N_; }

  void expand(std::span<const double> x, std::span<double> U, bool homogeneous) const {
    std::copy(x.begin(), x.end(), U.begin() + 2 * M_);
    const double e = p_.eps * p_.ds;
    for (std::size_t k = 0; k < M_; ++k) {
      const double u0 = homogeneous ? 0.0 : p_.w0.values[k];
      const double w1 = homogeneous ? 0.0 : p_.w1.values[k];
      U[k] = u0;
      if (p_.first_order_bc)
        U[M_ + k] = u0 + e * w1;
      else
        U[M_ + k] = (3.0 * u0 + U[2 * M_ + k] + 2.0 * e * w1) / 4.0;
    }
  }

  // Value parts and the L2-representative gradient of all frames.
  std::pair<double, double> evaluate(std::span<const double> U, std::span<double> G, bool with_data) const {
    const bool want_grad = !G.empty();
    if (want_grad) std::fill(G.begin(), G.end(), 0.0);
    const double inv_ds2 = 1.0 / (p_.ds * p_.ds);
    const double inv_eps2 = 1.0 / (p_.eps * p_.eps);
    std::vector<double> r(M_), gw(M_);
    double h = 0.0, s = 0.0;
    for (std::size_t i = 0; i <= N_; ++i) {
      const double w = weight_[i];
      const StencilRow row = d2_row(i, N_, inv_ds2);
      std::fill(r.begin(), r.end(), 0.0);
      for (int a = 0; a < row.len; ++a) {
        const double* u = U.data() + (row.first + a) * M_;
        for (std::size_t k = 0; k < M_; ++k) r[k] += row.c[a] * u[k];
      }
      double rr = 0.0;
      for (double v : r) rr += v * v;
      const std::span<const double> ui = U.subspan(i * M_, M_);
      const double wv = detail::energy_value_grad(p_.energy, grid_, ui, want_grad ? std::span<double>(gw) : std::span<double>());
      h += w * (0.5 * inv_eps2 * rr * vol_ + wv);
      if (with_data && !phi_.empty()) {
        const double* ph = phi_.data() + i * M_;
        double d = 0.0;
        for (std::size_t k = 0; k < M_; ++k) d += ph[k] * ui[k];
        s += w * d * vol_;
      }
      if (want_grad) {
        for (int a = 0; a < row.len; ++a) {
          double* g = G.data() + (row.first + a) * M_;
          const double c = w * inv_eps2 * row.c[a];
          for (std::size_t k = 0; k < M_; ++k) g[k] += c * r[k];
        }
        double* g = G.data() + i * M_;
        for (std::size_t k = 0; k < M_; ++k) g[k] += w * gw[k];
        if (with_data && !phi_.empty()) {
          const double* ph = phi_.data() + i * M_;
          for (std::size_t k = 0; k < M_; ++k) g[k] -= w * ph[k];
        }
      }
    }
    return {h, s};
  }

  // Euclidean gradient with respect to the free frames 2..N.
  void reduce(std::span<const double> G, std::span<double> gx) const {
    for (std::size_t j = 0; j < n_free(); ++j) gx[j] = vol_ * G[2 * M_ + j];
    if (u1_coupling_ != 0.0)
      for (std::size_t k = 0; k < M_; ++k) gx[k] += vol_ * u1_coupling_ * G[M_ + k];
  }

  double value_grad(std::span<const double> x, std::span<double> gx) const {
    std::vector<double> U((N_ + 1) * M_), G((N_ + 1) * M_);
    expand(x, U, false);
    const auto [h, s] = evaluate(U, G, true);
    reduce(G, gx);
    return h - s;
  }

  void hess_vec(std::span<const double> d, std::span<double> out) const {
    std::vector<double> U((N_ + 1) * M_), G((N_ + 1) * M_);
    expand(d, U, true);
    evaluate(U, G, false);
    reduce(G, out);
  }

  void precond(std::span<const double> g, std::span<double> out) const {
    const std::size_t S = grid_.spectral_size();
    const std::size_t F = N_ - 1;
    std::vector<std::complex<double>> spec(F * S);
    for (std::size_t k = 0; k < F; ++k)
      grid_.forward(g.subspan(k * M_, M_), std::span<std::complex<double>>(spec.data() + k * S, S));
    double* raw = reinterpret_cast<double*>(spec.data());
    for (std::size_t m = 0; m < S; ++m) {
      factors_[m].solve(raw + 2 * m, 2 * S);
      factors_[m].solve(raw + 2 * m + 1, 2 * S);
    }
    for (std::size_t k = 0; k < F; ++k)
      grid_.inverse(std::span<const std::complex<double>>(spec.data() + k * S, S), out.subspan(k * M_, M_));
    const double inv = 1.0 / vol_;
    for (double& v : out) v *= inv;
  }

  // eta^T P eta for free coordinates.
  double precond_quadratic(std::span<const double> x) const {
    const std::size_t S = grid_.spectral_size();
    const std::size_t F = N_ - 1;
    std::vector<std::complex<double>> spec(F * S);
    for (std::size_t k = 0; k < F; ++k)
      grid_.forward(x.subspan(k * M_, M_), std::span<std::complex<double>>(spec.data() + k * S, S));
    double total = 0.0;
    std::vector<double> re(F), im(F);
    for (std::size_t m = 0; m < S; ++m) {
      for (std::size_t k = 0; k < F; ++k) {
        re[k] = spec[k * S + m].real();
        im[k] = spec[k * S + m].imag();
      }
      total += grid_.mode_multiplicity(m) * (band_quadratic(m, re) + band_quadratic(m, im));
    }
    // Parseval: sum |x|^2 = (1/M) sum_m mult |x_m|^2.
    return vol_ * total / static_cast<double>(M_);
  }

private:
  // Free-coordinate rows (index into frames 2..N) of the second difference
  // at frame i and of the point value at frame i.
  void free_row(const StencilRow& row, std::vector<std::pair<std::size_t, double>>& out) const {
    out.clear();
    for (int a = 0; a < row.len; ++a) {
      const std::size_t f = row.first + a;
      const double c = row.c[a];
      if (f == 0) continue;
      if (f == 1) {
        if (u1_coupling_ != 0.0) out.push_back({0, c * u1_coupling_});
        continue;
      }
      out.push_back({f - 2, c});
    }
  }

  void build_preconditioner() {
    const std::size_t F = N_ - 1;
    const std::size_t bw = 3;
    const double inv_ds2 = 1.0 / (p_.ds * p_.ds);
    const double inv_eps2 = 1.0 / (p_.eps * p_.eps);
    // Time-only parts: B = sum w_i/eps^2 b_i b_i^T and the mass diagonal.
    std::vector<double> band(F * (bw + 1), 0.0);
    auto add = [&](std::size_t a, std::size_t b, double v) {
      const std::size_t i = std::max(a, b), j = std::min(a, b);
      band[i * (bw + 1) + (i - j)] += v;
    };
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t i = 0; i <= N_; ++i) {
      free_row(d2_row(i, N_, inv_ds2), row);
      const double w = weight_[i] * inv_eps2;
      for (const auto& [a, ca] : row)
        for (const auto& [b, cb] : row)
          if (a >= b) add(a, b, w * ca * cb);
    }
    mass_.assign(F, 0.0);
    for (std::size_t f = 2; f <= N_; ++f) mass_[f - 2] = weight_[f];
    if (u1_coupling_ != 0.0) mass_[0] += weight_[1] * u1_coupling_ * u1_coupling_;
    band_ = band;

    const std::vector<double> mu = frozen_symbols(p_.energy, p_.w0);
    mu_.resize(mu.size());
    factors_.clear();
    factors_.reserve(mu.size());
    for (std::size_t m = 0; m < mu.size(); ++m) {
      mu_[m] = std::max(0.0, mu[m]);
      BandedCholesky chol(F, bw);
      for (std::size_t i = 0; i < F; ++i)
        for (std::size_t d = 0; d <= std::min(bw, i); ++d) chol.at(i, i - d) = band[i * (bw + 1) + d];
      for (std::size_t i = 0; i < F; ++i) chol.at(i, i) += mu_[m] * mass_[i];
      chol.factor();
      factors_.push_back(std::move(chol));
    }
  }

  double band_quadratic(std::size_t m, const std::vector<double>& x) const {
    const std::size_t bw = 3;
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += (band_[i * (bw + 1)] + mu_[m] * mass_[i]) * x[i] * x[i];
      for (std::size_t d = 1; d <= std::min(bw, i); ++d) s += 2.0 * band_[i * (bw + 1) + d] * x[i] * x[i - d];
    }
    return s;
  }

  const MinProblem& p_;
  const SpaceGrid& grid_;
  std::size_t N_, M_;
  double vol_;
  double u1_coupling_ = 0.25;
  std::vector<double> weight_, phi_, mass_, band_, mu_;
  std::vector<BandedCholesky> factors_;
};

std::vector<double> free_part(const Trajectory& u) {
  const std::size_t M = u.grid()->size();
  const auto d = u.data();
  return std::vector<double>(d.begin() + 2 * static_cast<std::ptrdiff_t>(M), d.end());
}

void check_shape(const MinProblem& p, const Trajectory& u) {
  require_same_grid(*u.grid(), *p.w0.grid);
  if (u.count() != p.count() || std::abs(u.ds() - p.ds) > 1e-14 * p.ds)
    throw std::invalid_argument("trajectory does not match the problem's time mesh");
}

void check_constraints(const MinProblem& p, const Trajectory& u) {
  const auto u0 = u.frame(0), u1 = u.frame(1), u2 = u.frame(2);
  double scale = 1.0;
  for (std::size_t k = 0; k < u0.size(); ++k) {
    if (u0[k] != p.w0.values[k]) throw std::invalid_argument("trajectory violates u(0) = w0");
    scale = std::max({scale, std::abs(u0[k]), std::abs(u1[k]), std::abs(u2[k])});
  }
  for (std::size_t k = 0; k < u0.size(); ++k) {
    const double slope = p.first_order_bc ? (u1[k] - u0[k]) / p.ds : (-3.0 * u0[k] + 4.0 * u1[k] - u2[k]) / (2.0 * p.ds);
    if (std::abs(slope - p.eps * p.w1.values[k]) > 1e-10 * scale / p.ds)
      throw std::invalid_argument("trajectory violates u'(0) = eps w1");
  }
}

}  // namespace

Trajectory affine_guess(const MinProblem& p) {
  Trajectory u(p.w0.grid, p.ds, p.count(), p.eps);
  for (std::size_t i = 0; i < u.count(); ++i) {
    auto f = u.frame(i);
    const double s = u.time(i);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = p.w0.values[k] + p.eps * s * p.w1.values[k];
  }
  // Frame 1 from the constraint so rounding matches the elimination exactly.
  const std::size_t M = p.w0.size();
  auto f1 = u.frame(1);
  const auto f2 = u.frame(2);
  for (std::size_t k = 0; k < M; ++k)
    f1[k] = p.first_order_bc ? p.w0.values[k] + p.eps * p.ds * p.w1.values[k]
                             : (3.0 * p.w0.values[k] + f2[k] + 2.0 * p.eps * p.ds * p.w1.values[k]) / 4.0;
  return u;
}

JValue assemble_J(const MinProblem& p, const Trajectory& u) {
  p.validate();
  check_shape(p, u);
  check_constraints(p, u);
  Functional F(p);
  Trajectory grad(u.grid(), u.ds(), u.count(), u.eps());
  const auto [h, s] = F.evaluate(u.data(), grad.data(), true);
  // Fold the eliminated rows into row 2.
  const std::size_t M = u.grid()->size();
  auto g = grad.data();
  if (!p.first_order_bc)
    for (std::size_t k = 0; k < M; ++k) g[2 * M + k] += 0.25 * g[M + k];
  std::fill(g.begin(), g.begin() + 2 * static_cast<std::ptrdiff_t>(M), 0.0);
  return JValue{h - s, h, s, grad};
}

MinimizeReport minimize(const MinProblem& p) {
  p.validate();
  Functional F(p);
  const Trajectory guess = affine_guess(p);
  std::vector<double> x = free_part(guess);
  std::vector<double> g(x.size());
  const double j_affine = F.value_grad(x, g);
  if (!std::isfinite(j_affine)) throw std::runtime_error("objective is not finite at the affine guess");

  OptimOptions opt;
  opt.memory = p.memory;
  opt.max_iter = p.max_iter;
  opt.c1 = p.wolfe_c1;
  opt.c2 = p.wolfe_c2;
  opt.tol = p.tol_grad > 0.0 ? p.tol_grad : 1e-8 * (1.0 + std::abs(j_affine));

  const ValueGrad fg = [&F](std::span<const double> xx, std::span<double> gg) { return F.value_grad(xx, gg); };
  const LinearOp pre = [&F](std::span<const double> in, std::span<double> out) { F.precond(in, out); };
  OptimResult res;
  std::string method;
  if (p.energy.is_quadratic()) {
    method = "pcg";
    const LinearOp hv = [&F](std::span<const double> in, std::span<double> out) { F.hess_vec(in, out); };
    res = pcg(fg, hv, pre, x, opt);
  } else {
    method = "lbfgs";
    res = lbfgs(fg, pre, x, opt);
  }

  Trajectory u(p.w0.grid, p.ds, p.count(), p.eps);
  F.expand(x, u.data(), false);
  const auto [h, s] = F.evaluate(u.data(), {}, true);
  return MinimizeReport{u,
                        h - s,
                        h,
                        s,
                        j_affine,
                        res.grad_norm,
                        opt.tol,
                        res.iterations,
                        res.converged,
                        eval_W(p.energy, p.w0) + p.level_C * p.eps - h,
                        method,
                        res.message};
}

bool admissible_direction(const MinProblem& p, const Trajectory& eta, double tol) {
  const auto e0 = eta.frame(0), e1 = eta.frame(1), e2 = eta.frame(2);
  double scale = 0.0;
  for (std::size_t k = 0; k < e0.size(); ++k) scale = std::max({scale, std::abs(e1[k]), std::abs(e2[k])});
  for (std::size_t k = 0; k < e0.size(); ++k) {
    if (e0[k] != 0.0) return false;
    const double slope = p.first_order_bc ? e1[k] : 4.0 * e1[k] - e2[k];
    if (std::abs(slope) > tol * (1.0 + scale)) return false;
  }
  return true;
}

double el_residual(const MinProblem& p, const Trajectory& u, const Trajectory& eta) {
  check_shape(p, u);
  check_shape(p, eta);
  if (!admissible_direction(p, eta)) throw std::invalid_argument("el_residual: eta violates eta(0) = eta'(0) = 0");
  Functional F(p);
  std::vector<double> G(u.data().size());
  F.evaluate(u.data(), G, true);
  const SpaceGrid& g = *u.grid();
  double total = 0.0;
  for (std::size_t i = 0; i < u.count(); ++i)
    total += g.inner(std::span<const double>(G.data() + i * g.size(), g.size()), eta.frame(i));
  return std::abs(total);
}

double precond_norm(const MinProblem& p, const Trajectory& eta) {
  check_shape(p, eta);
  Functional F(p);
  const std::vector<double> x = free_part(eta);
  return std::sqrt(std::max(0.0, F.precond_quadratic(x)));
}

void second_difference(const Trajectory& u, std::size_t i, std::span<double> out) {
  const std::size_t N = u.count() - 1;
  if (N < 3) throw std::invalid_argument("second_difference: need at least 4 frames");
  const StencilRow row = d2_row(i, N, 1.0 / (u.ds() * u.ds()));
  std::fill(out.begin(), out.end(), 0.0);
  for (int a = 0; a < row.len; ++a) {
    const auto f = u.frame(row.first + a);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += row.c[a] * f[k];
  }
}

void first_difference(const Trajectory& u, std::size_t i, std::span<double> out) {
  const std::size_t N = u.count() - 1;
  const double h = u.ds();
  if (i == 0 || i == N) {
    const double sgn = i == 0 ? 1.0 : -1.0;
    const auto a = u.frame(i), b = u.frame(i == 0 ? 1 : N - 1), c = u.frame(i == 0 ? 2 : N - 2);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = sgn * (-3.0 * a[k] + 4.0 * b[k] - c[k]) / (2.0 * h);
    return;
  }
  const auto a = u.frame(i - 1), b = u.frame(i + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (b[k] - a[k]) / (2.0 * h);
}

std::pair<double, double> representation_check(const MinProblem& p, const Trajectory& u, const Field& h,
                                               double tau) {
  check_shape(p, u);
  require_same_grid(*h.grid, *u.grid());
  const double x = tau / p.ds;
  const long i = std::lround(x);
  if (std::abs(x - static_cast<double>(i)) > 1e-9 || i < 1 || static_cast<std::size_t>(i) >= u.count() - 1)
    throw std::invalid_argument("representation_check: tau must be an interior node");
  const SpaceGrid& g = *u.grid();
  std::vector<double> d2(g.size());
  second_difference(u, static_cast<std::size_t>(i), d2);
  const double lhs = g.inner(d2, h.values) / (p.eps * p.eps);

  std::vector<double> nodes(u.count()), w1(u.count()), w2(u.count());
  std::vector<double> gw(g.size()), ph(g.size());
  for (std::size_t j = 0; j < u.count(); ++j) {
    nodes[j] = u.time(j);
    detail::energy_value_grad(p.energy, g, u.frame(j), gw);
    w1[j] = g.inner(gw, h.values);
    p.source.phi(nodes[j], ph);
    w2[j] = g.inner(ph, h.values);
  }
  const double rhs = -avg2(TimeSeries(nodes, w1), tau) + avg2(TimeSeries(nodes, w2), tau);
  return {lhs, rhs};
}

}  // namespace wide
