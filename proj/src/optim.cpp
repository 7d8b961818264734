#include "wide/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace wide {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace {

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// Minimizer of the cubic matching values and slopes at a and b.
double cubic_min(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (disc < 0.0) return 0.5 * (a + b);
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
  return std::isfinite(t) ? t : 0.5 * (a + b);
}

struct LinePoint {
  double alpha, f, d;
};

class LineSearch {
public:
  LineSearch(const ValueGrad& fg, std::span<const double> x, std::span<const double> dir,
             const OptimOptions& opt, int& evals)
      : fg_(fg), x_(x), dir_(dir), opt_(opt), evals_(evals), trial_(x.size()), g_(x.size()) {}

  // Returns true on success; x_out/g_out/f_out receive the accepted point.
  bool run(double f0, double d0, double alpha0, std::vector<double>& x_out, std::vector<double>& g_out,
           double& f_out) {
    f0_ = f0;
    d0_ = d0;
    noise_ = 1e-12 * std::abs(f0) + 1e-300;
    LinePoint prev{0.0, f0, d0};
    double alpha = alpha0;
    for (int i = 0; i < opt_.max_line_search; ++i) {
      LinePoint cur = eval(alpha);
      if (!std::isfinite(cur.f)) {
        alpha = 0.5 * (prev.alpha + alpha);
        continue;
      }
      if (cur.f > f0 + opt_.c1 * alpha * d0 || (i > 0 && cur.f >= prev.f)) {
        if (approx_ok(cur)) return accept(x_out, g_out, f_out);
        return zoom(prev, cur, x_out, g_out, f_out);
      }
      if (std::abs(cur.d) <= -opt_.c2 * d0) return accept(x_out, g_out, f_out);
      if (cur.d >= 0.0) return zoom(cur, prev, x_out, g_out, f_out);
      prev = cur;
      alpha *= 2.0;
    }
    return false;
  }

private:
  LinePoint eval(double alpha) {
    for (std::size_t i = 0; i < x_.size(); ++i) trial_[i] = x_[i] + alpha * dir_[i];
    const double f = fg_(trial_, g_);
    ++evals_;
    last_f_ = f;
    if (std::isnan(f)) throw std::runtime_error("objective returned NaN");
    return {alpha, f, dot(g_, dir_)};
  }

  bool approx_ok(const LinePoint& p) const {
    return p.f <= f0_ + noise_ && std::abs(p.d) <= opt_.c2 * std::abs(d0_);
  }

  bool accept(std::vector<double>& x_out, std::vector<double>& g_out, double& f_out) {
    x_out = trial_;
    g_out = g_;
    f_out = last_f_;
    return true;
  }

  bool zoom(LinePoint lo, LinePoint hi, std::vector<double>& x_out, std::vector<double>& g_out, double& f_out) {
    for (int j = 0; j < opt_.max_line_search; ++j) {
      const double a = std::min(lo.alpha, hi.alpha), b = std::max(lo.alpha, hi.alpha);
      double t = cubic_min(lo.alpha, lo.f, lo.d, hi.alpha, hi.f, hi.d);
      const double margin = 0.1 * (b - a);
      t = std::clamp(t, a + margin, b - margin);
      if (b - a < 1e-16 * std::max(1.0, b)) break;
      LinePoint cur = eval(t);
      if (cur.f > f0_ + opt_.c1 * t * d0_ || cur.f >= lo.f) {
        if (approx_ok(cur)) return accept(x_out, g_out, f_out);
        hi = cur;
      } else {
        if (std::abs(cur.d) <= -opt_.c2 * d0_) return accept(x_out, g_out, f_out);
        if (cur.d * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
    }
    // Fall back to the best bracket end if it decreased the objective.
    if (lo.alpha > 0.0 && lo.f < f0_) {
      eval(lo.alpha);
      return accept(x_out, g_out, f_out);
    }
    return false;
  }

  const ValueGrad& fg_;
  std::span<const double> x_, dir_;
  const OptimOptions& opt_;
  int& evals_;
  std::vector<double> trial_, g_;
  double f0_ = 0.0, d0_ = 0.0, noise_ = 0.0, last_f_ = 0.0;
};

}  // namespace

OptimResult lbfgs(const ValueGrad& fg, const LinearOp& precond, std::vector<double>& x, const OptimOptions& opt) {
  const std::size_t n = x.size();
  OptimResult res;
  std::vector<double> g(n), pg(n), dir(n), xn(n), gn(n);
  double f = fg(x, g);
  res.evaluations = 1;
  if (!std::isfinite(f)) throw std::runtime_error("objective is not finite at the initial point");

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> mem;
  double gamma = 1.0;
  std::vector<double> alpha(static_cast<std::size_t>(opt.memory));

  for (int it = 0;; ++it) {
    precond(g, pg);
    res.grad_norm = std::sqrt(std::max(0.0, dot(g, pg)));
    res.value = f;
    res.iterations = it;
    if (res.grad_norm <= opt.tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }
    if (it >= opt.max_iter) {
      res.message = "iteration limit reached";
      return res;
    }

    // Two-loop recursion.
    std::vector<double> q = g;
    for (std::size_t i = mem.size(); i-- > 0;) {
      alpha[i] = mem[i].rho * dot(mem[i].s, q);
      axpy(-alpha[i], mem[i].y, q);
    }
    precond(q, dir);
    for (double& v : dir) v *= gamma;
    for (std::size_t i = 0; i < mem.size(); ++i) {
      const double beta = mem[i].rho * dot(mem[i].y, dir);
      axpy(alpha[i] - beta, mem[i].s, dir);
    }
    for (double& v : dir) v = -v;
    double d0 = dot(g, dir);
    if (!(d0 < 0.0)) {
      mem.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -pg[i];
      d0 = -res.grad_norm * res.grad_norm;
    }

    double fn = 0.0;
    bool ok = false;
    {
      LineSearch ls(fg, x, dir, opt, res.evaluations);
      ok = ls.run(f, d0, 1.0, xn, gn, fn);
    }
    if (!ok && !mem.empty()) {
      mem.clear();
      gamma = 1.0;
      for (std::size_t i = 0; i < n; ++i) dir[i] = -pg[i];
      d0 = -res.grad_norm * res.grad_norm;
      LineSearch ls(fg, x, dir, opt, res.evaluations);
      ok = ls.run(f, d0, 1.0, xn, gn, fn);
    }
    if (!ok) {
      res.message = "line search failed";
      return res;
    }

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = xn[i] - x[i];
      p.y[i] = gn[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-14 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y))) {
      std::vector<double> py(n);
      precond(p.y, py);
      gamma = sy / dot(p.y, py);
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > opt.memory) mem.pop_front();
    }
    x.swap(xn);
    g.swap(gn);
    f = fn;
  }
}

OptimResult pcg(const ValueGrad& fg, const LinearOp& hess, const LinearOp& precond, std::vector<double>& x,
                const OptimOptions& opt) {
  const std::size_t n = x.size();
  OptimResult res;
  std::vector<double> g(n), r(n), z(n), p(n), hp(n);
  int total = 0;
  for (int restart = 0; restart < 4; ++restart) {
    res.value = fg(x, g);
    ++res.evaluations;
    for (std::size_t i = 0; i < n; ++i) r[i] = -g[i];
    precond(r, z);
    double rz = dot(r, z);
    res.grad_norm = std::sqrt(std::max(0.0, rz));
    if (res.grad_norm <= opt.tol) {
      res.converged = true;
      res.iterations = total;
      res.message = "gradient tolerance reached";
      return res;
    }
    p = z;
    bool inner_done = false;
    for (; total < opt.max_iter; ++total) {
      hess(p, hp);
      const double php = dot(p, hp);
      if (!(php > 0.0)) {
        res.message = "nonpositive curvature";
        res.iterations = total;
        return res;
      }
      const double a = rz / php;
      axpy(a, p, x);
      axpy(-a, hp, r);
      precond(r, z);
      const double rz_new = dot(r, z);
      if (std::sqrt(std::max(0.0, rz_new)) <= 0.5 * opt.tol) {
        ++total;
        inner_done = true;
        break;
      }
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (!inner_done) break;
  }
  res.value = fg(x, g);
  ++res.evaluations;
  precond(g, z);
  res.grad_norm = std::sqrt(std::max(0.0, dot(g, z)));
  res.iterations = total;
  res.converged = res.grad_norm <= opt.tol;
  res.message = res.converged ? "gradient tolerance reached" : "iteration limit reached";
  return res;
}

BandedCholesky::BandedCholesky(std::size_t n, std::size_t bandwidth)
    : n_(n), bw_(bandwidth), a_(n * (bandwidth + 1), 0.0) {}

void BandedCholesky::factor() {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i > bw_ ? i - bw_ : 0;
    for (std::size_t j = j0; j <= i; ++j) {
      double s = at(i, j);
      const std::size_t k0 = std::max(j0, j > bw_ ? j - bw_ : 0);
      for (std::size_t k = k0; k < j; ++k) s -= at(i, k) * at(j, k);
      if (j == i) {
        if (!(s > 0.0)) throw std::runtime_error("band matrix is not positive definite");
        at(i, i) = std::sqrt(s);
      } else {
        at(i, j) = s / at(j, j);
      }
    }
  }
  factored_ = true;
}

void BandedCholesky::solve(double* b, std::size_t stride) const {
  if (!factored_) throw std::logic_error("BandedCholesky: solve before factor");
  for (std::size_t i = 0; i < n_; ++i) {
    double s = b[i * stride];
    const std::size_t j0 = i > bw_ ? i - bw_ : 0;
    for (std::size_t j = j0; j < i; ++j) s -= at(i, j) * b[j * stride];
    b[i * stride] = s / at(i, i);
  }
  for (std::size_t i = n_; i-- > 0;) {
    double s = b[i * stride];
    for (std::size_t j = i + 1; j < std::min(n_, i + bw_ + 1); ++j) s -= at(j, i) * b[j * stride];
    b[i * stride] = s / at(i, i);
  }
}

}  // namespace wide
