#include "wide/source.hpp"
#include "wide/timeweight.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wide {

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 15, 1e-12);
}

// Integral of g over [a, b], split at the breakpoints of f.
double split_integral(const SourceSpec& f, const std::function<double(double)>& g, double a, double b) {
  double total = 0.0, lo = a;
  for (double x : f.breakpoints()) {
    if (x <= lo) continue;
    if (x >= b) break;
    total += gk(g, lo, x);
    lo = x;
  }
  return total + gk(g, lo, b);
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

SourceSpec SourceSpec::zero(GridPtr grid) {
  SourceSpec s;
  s.grid_ = std::move(grid);
  s.zero_ = true;
  s.f_ = [](double, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  return s;
}

SourceSpec SourceSpec::analytic(GridPtr grid, Sampler f, std::vector<double> breakpoints) {
  if (!grid || !f) throw std::invalid_argument("SourceSpec: null grid or sampler");
  std::sort(breakpoints.begin(), breakpoints.end());
  SourceSpec s;
  s.grid_ = std::move(grid);
  s.f_ = std::move(f);
  s.breaks_ = std::move(breakpoints);
  return s;
}

SourceSpec SourceSpec::tabulated(GridPtr grid, std::vector<double> times, std::vector<std::vector<double>> frames) {
  if (!grid) throw std::invalid_argument("SourceSpec: null grid");
  if (times.size() < 2 || times.size() != frames.size())
    throw std::invalid_argument("tabulated source: need at least 2 times matching the frames");
  if (times.front() != 0.0) throw std::invalid_argument("tabulated source: times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("tabulated source: times must increase");
  for (const auto& fr : frames) {
    if (fr.size() != grid->size()) throw std::invalid_argument("tabulated source: frame size mismatch");
    for (double x : fr)
      if (!std::isfinite(x)) throw std::invalid_argument("tabulated source: non-finite value");
  }
  auto t = std::make_shared<const std::vector<double>>(times);
  auto fr = std::make_shared<const std::vector<std::vector<double>>>(std::move(frames));
  Sampler sampler = [t, fr](double s, std::span<double> out) {
    const auto& ts = *t;
    if (s > ts.back()) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    auto it = std::upper_bound(ts.begin(), ts.end(), s);
    std::size_t j = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    if (j + 1 >= ts.size()) j = ts.size() - 2;
    const double w = (s - ts[j]) / (ts[j + 1] - ts[j]);
    const auto& a = (*fr)[j];
    const auto& b = (*fr)[j + 1];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
  };
  return analytic(std::move(grid), std::move(sampler), std::move(times));
}

SourceSpec SourceSpec::load_csv(GridPtr grid, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open source CSV: " + path);
  std::string line;
  bool header_seen = false;
  std::vector<double> times;
  std::vector<std::vector<double>> frames;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != grid->size() + 1)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(grid->size() + 1) + " columns");
    if (!header_seen) {
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      if (end != cells[0].c_str()) throw std::runtime_error(path + ": header row is mandatory");
      header_seen = true;
      continue;
    }
    std::vector<double> row(grid->size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number");
      if (c == 0)
        times.push_back(v);
      else
        row[c - 1] = v;
    }
    frames.push_back(std::move(row));
  }
  if (!header_seen) throw std::runtime_error(path + ": header row is mandatory");
  return tabulated(std::move(grid), std::move(times), std::move(frames));
}

void SourceSpec::sample(double t, std::span<double> out) const {
  if (!(t >= 0.0)) throw std::invalid_argument("source: negative or non-finite time");
  if (out.size() != grid_->size()) throw std::invalid_argument("source: output size mismatch");
  f_(t, out);
}

Field SourceSpec::at(double t) const {
  Field out(grid_);
  sample(t, out.values);
  return out;
}

double SourceSpec::norm2(double t) const {
  if (zero_) return 0.0;
  std::vector<double> v(grid_->size());
  sample(t, v);
  return grid_->inner(v, v);
}

SourceSpec pulse_source(GridPtr grid, double amplitude, double t_end) {
  const double k = kTwoPi / grid->length();
  const Field shape = Field::from_function(grid, [&](double x, double y) {
    return grid->dim() == 1 ? std::sin(k * x) : std::sin(k * x) * std::sin(k * y);
  });
  return SourceSpec::analytic(
      grid,
      [shape, amplitude, t_end](double t, std::span<double> out) {
        const double a = t <= t_end ? amplitude : 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * shape.values[i];
      },
      {t_end});
}

SourceSpec smooth_source(GridPtr grid, double amplitude) {
  const double k = kTwoPi / grid->length();
  const Field shape = Field::from_function(grid, [&](double x, double y) {
    return grid->dim() == 1 ? std::cos(2.0 * k * x) : std::cos(2.0 * k * x) * std::cos(k * y);
  });
  return SourceSpec::analytic(grid, [shape, amplitude](double t, std::span<double> out) {
    const double a = amplitude * std::sin(t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * shape.values[i];
  });
}

namespace {
Field unit_shape(const GridPtr& grid) {
  const double k = kTwoPi / grid->length();
  Field shape = Field::from_function(grid, [&](double x, double y) {
    return grid->dim() == 1 ? std::sin(k * x) : std::sin(k * x) * std::sin(k * y);
  });
  const double n = shape.norm();
  for (double& v : shape.values) v /= n;
  return shape;
}
}  // namespace

SourceSpec unit_norm_source(GridPtr grid) {
  const Field shape = unit_shape(grid);
  return SourceSpec::analytic(grid, [shape](double, std::span<double> out) {
    std::copy(shape.values.begin(), shape.values.end(), out.begin());
  });
}

SourceSpec decaying_source(GridPtr grid) {
  const Field shape = unit_shape(grid);
  return SourceSpec::analytic(grid, [shape](double t, std::span<double> out) {
    const double a = std::sqrt(2.0) * std::exp(-t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * shape.values[i];
  });
}

double gamma_of(const SourceSpec& f, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("gamma: negative time");
  if (f.is_zero() || t == 0.0) return 0.0;
  return split_integral(f, [&](double s) { return f.norm2(s); }, 0.0, t);
}

double gamma_inverse(const SourceSpec& f, double y) {
  if (!(y >= 0.0) || !std::isfinite(y)) throw std::invalid_argument("gamma_inverse: bad argument");
  auto Gamma = [&](double t) { return t + gamma_of(f, t); };
  double lo = 0.0, hi = 1.0;
  while (Gamma(hi) <= y) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (Gamma(mid) <= y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ApproxSource::ApproxSource(SourceSpec base, double eps, double k_cut, double t_eps, double T_eps)
    : base_(std::move(base)), eps_(eps), k_cut_(k_cut), t_eps_(t_eps), T_eps_(T_eps) {}

void ApproxSource::f_eps(double t, std::span<double> out) const {
  if (!active(t) || base_.is_zero()) {
    if (out.size() != base_.grid()->size()) throw std::invalid_argument("source: output size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  base_.sample(t, out);
}

Field ApproxSource::f_eps(double t) const {
  Field out(base_.grid());
  f_eps(t, out.values);
  return out;
}

double ApproxSource::phi_norm2(double s) const {
  const double t = eps_ * s;
  return active(t) ? base_.norm2(t) : 0.0;
}

SourceSpec ApproxSource::windowed() const {
  if (base_.is_zero()) return SourceSpec::zero(base_.grid());
  auto self = std::make_shared<const ApproxSource>(*this);
  std::vector<double> br = base_.breakpoints();
  br.push_back(t_eps_);
  br.push_back(T_eps_);
  return SourceSpec::analytic(
      base_.grid(), [self](double t, std::span<double> out) { self->f_eps(t, out); }, br);
}

ApproxSource build_approx(const SourceSpec& f, double eps, double k_cut) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("build_approx: eps must lie in (0,1)");
  if (!(k_cut > 0.0)) throw std::invalid_argument("build_approx: k_cut must be positive");
  const double t_eps = k_cut * std::sqrt(eps);
  const double T_eps = std::min(gamma_inverse(f, 1.0 / eps), 1.0 / std::sqrt(eps));
  return ApproxSource(f, eps, k_cut, t_eps, T_eps);
}

Report verify_fapp_properties(const ApproxSource& a, double T) {
  Report r;
  const SourceSpec& f = a.base();
  const double eps = a.eps(), te = a.t_eps(), Te = a.T_eps();

  // (i) at this eps: distance to f on [0, T] and norm bounded by f's.
  const double gT = gamma_of(f, T);
  const double inside = gamma_of(f, std::clamp(Te, 0.0, T)) - gamma_of(f, std::min(te, T));
  const double dist = std::sqrt(std::max(0.0, gT - std::max(0.0, inside)));
  r.add("fapp_i_norm", std::sqrt(std::max(0.0, inside)) <= std::sqrt(gT) + 1e-12,
        std::sqrt(gT) - std::sqrt(std::max(0.0, inside)), fmt("distance %.6g, window end %.6g", dist, Te));

  // (ii) support inside [t_eps, T_eps]
  std::vector<double> probe(f.grid()->size());
  double outside = 0.0;
  for (double t : {0.0, 0.5 * te, te, Te, Te + 0.5, 2.0 * Te + 1.0}) {
    a.f_eps(t, probe);
    for (double v : probe) outside = std::max(outside, std::abs(v));
  }
  r.add("fapp_ii_support", outside == 0.0, -outside);

  // (iii)
  r.add_margin("fapp_iii_horizon", std::sqrt(eps) - eps * Te, 1e-12 * std::sqrt(eps));
  r.add_margin("fapp_iii_cutoff", eps * eps * eps - std::exp(-te / eps) * (1.0 + Te / eps));

  // (iv)
  r.add_margin("fapp_iv_mass", 1.0 / eps - (gamma_of(f, Te) - gamma_of(f, std::min(te, Te))));

  // (v): (1/eps) int e^{-t/eps} ||f(t)||^2 over the window; the proof's
  // chain bound e^{-t_eps/eps}/eps^2 is reported alongside.
  double weighted = 0.0;
  if (!f.is_zero() && Te > te)
    weighted = split_integral(f, [&](double t) { return std::exp(-t / eps) * f.norm2(t); }, te, Te) / eps;
  const double chain = std::exp(-te / eps) / (eps * eps);
  r.add_margin("fapp_v_weighted", eps * eps * eps - weighted, 0.0, fmt("value %.6g, chain bound %.6g", weighted, chain));
  return r;
}

Report verify_fapp_sweep(const SourceSpec& f, const std::vector<double>& eps_list, double T, double k_cut) {
  Report r;
  double prev_dist = INFINITY, prev_norm = -1.0;
  const double gT = gamma_of(f, T);
  for (double eps : eps_list) {
    const ApproxSource a = build_approx(f, eps, k_cut);
    const double inside = gamma_of(f, std::clamp(a.T_eps(), 0.0, T)) - gamma_of(f, std::min(a.t_eps(), T));
    const double dist = std::sqrt(std::max(0.0, gT - inside));
    const double norm = std::sqrt(std::max(0.0, inside));
    const double tol = 1e-10 * (1.0 + std::sqrt(gT));
    r.add("fapp_i_distance_eps=" + std::to_string(eps), dist <= prev_dist + tol,
          std::isfinite(prev_dist) ? prev_dist - dist : 0.0);
    r.add("fapp_i_norm_eps=" + std::to_string(eps), norm >= prev_norm - tol && norm <= std::sqrt(gT) + tol,
          std::sqrt(gT) - norm);
    prev_dist = dist;
    prev_norm = norm;
  }
  return r;
}

Report verify_phi_assumptions(const ApproxSource& a, double horizon) {
  Report r;
  const double eps = a.eps();
  const double s_a = a.t_eps() / eps;
  const double s_b = a.support_end();

  // Support in fast time.
  std::vector<double> probe(a.base().grid()->size());
  double beyond = 0.0;
  for (double s : {s_b, s_b + 1e-6, s_b + 1.0, 2.0 * s_b + 5.0}) {
    a.phi(s, probe);
    for (double v : probe) beyond = std::max(beyond, std::abs(v));
  }
  r.add("phi_support", beyond == 0.0 && eps * eps * s_b <= std::sqrt(eps) * (1.0 + 1e-12),
        std::sqrt(eps) - eps * eps * s_b);

  // Weighted norm.
  double w = 0.0;
  if (!a.is_zero() && s_b > s_a) {
    std::vector<double> br;
    for (double t : a.base().breakpoints()) br.push_back(t / eps);
    double lo = s_a;
    auto g = [&](double s) { return std::exp(-s) * a.phi_norm2(s); };
    for (double x : br) {
      if (x <= lo) continue;
      if (x >= s_b) break;
      w += gk(g, lo, x);
      lo = x;
    }
    w += gk(g, lo, s_b);
  }
  r.add_margin("phi_weighted_norm", eps - std::sqrt(w));

  // Integrated A^2 growth bound, exact kernels on a fine interpolant.
  if (a.is_zero()) {
    r.add_margin("phi_avg2_growth", eps * eps);
    return r;
  }
  const double end = std::max(horizon, s_b) + 1.0;
  const double step = 0.02;
  const double jump = 1e-7;
  std::vector<double> nodes;
  for (double s = 0.0; s <= end; s += step) nodes.push_back(s);
  for (double s : {s_a, s_a + jump, s_b - jump, s_b})
    if (s > 0.0 && s < end) nodes.push_back(s);
  for (double t : a.base().breakpoints())
    if (t / eps > 0.0 && t / eps < end) {
      nodes.push_back(t / eps);
      nodes.push_back(t / eps + jump);
    }
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> uniq;
  for (double s : nodes)
    if (uniq.empty() || s > uniq.back() + 1e-12) uniq.push_back(s);
  std::vector<double> vals(uniq.size());
  for (std::size_t i = 0; i < uniq.size(); ++i) vals[i] = a.phi_norm2(uniq[i]);
  const TimeSeries series(uniq, vals, Tail::Zero);

  double worst = INFINITY;
  const int checks = 100;
  for (int i = 1; i <= checks; ++i) {
    const double t = horizon * i / checks;
    const double lhs = eps * integral_of_avg2(series, 0.0, t);
    const double rhs = a.gamma(eps * t + a.t_eps()) + eps * eps;
    worst = std::min(worst, rhs - lhs);
  }
  r.add_margin("phi_avg2_growth", worst, 1e-12);
  return r;
}

void require_cutoff_admissible(const SourceSpec& f, const std::vector<double>& eps_list, double k_cut) {
  for (double eps : eps_list) {
    if (!(eps > 0.0 && eps <= 0.25))
      throw std::invalid_argument("eps sweep must lie in (0, 0.25]; got " + std::to_string(eps));
    if (std::exp(-k_cut / std::sqrt(eps)) > std::pow(eps, 5))
      throw std::invalid_argument("k_cut too small for eps = " + std::to_string(eps));
    const ApproxSource a = build_approx(f, eps, k_cut);
    if (std::exp(-a.t_eps() / eps) * (1.0 + a.T_eps() / eps) > eps * eps * eps)
      throw std::invalid_argument("cutoff inequality e^{-t/eps}(1+T/eps) <= eps^3 fails at eps = " +
                                  std::to_string(eps));
  }
}

}  // namespace wide
