#include "wide/timeweight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wide {

namespace detail {

double exp_moment(int n, double length) {
  if (n < 0 || n > 3) throw std::invalid_argument("exp_moment: order must be in 0..3");
  if (!(length >= 0.0)) throw std::invalid_argument("exp_moment: negative length");
  static constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0};
  if (std::isinf(length)) return kFactorial[n];
  if (length < 1.0) {
    // I_n(L) = sum_j (-1)^j L^{n+1+j} / (j! (n+1+j))
    double term = std::pow(length, n + 1);  // L^{n+1+j} / j!
    double sum = 0.0;
    for (int j = 0; j < 30; ++j) {
      const double contrib = term / (n + 1 + j);
      sum += (j % 2 == 0) ? contrib : -contrib;
      term *= length / (j + 1);
      if (term < 1e-20 * std::abs(sum)) break;
    }
    return sum;
  }
  const double e = std::exp(-length);
  const double l = length;
  switch (n) {
    case 0: return -std::expm1(-l);
    case 1: return 1.0 - e * (1.0 + l);
    case 2: return 2.0 - e * (l * l + 2.0 * l + 2.0);
    default: return 6.0 - e * (l * l * l + 3.0 * l * l + 6.0 * l + 6.0);
  }
}

}  // namespace detail

using detail::exp_moment;

// ---------------------------------------------------------------------------
// TimeSeries

TimeSeries::TimeSeries(std::vector<double> nodes, std::vector<double> values, Tail tail)
    : nodes_(std::move(nodes)), values_(std::move(values)), tail_(tail) {
  if (nodes_.size() < 2) throw std::invalid_argument("TimeSeries: at least 2 nodes required");
  if (nodes_.size() != values_.size())
    throw std::invalid_argument("TimeSeries: nodes and values differ in length");
  if (nodes_.front() != 0.0) throw std::invalid_argument("TimeSeries: first node must be 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i]))
      throw std::invalid_argument("TimeSeries: nodes must be finite and strictly increasing");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("TimeSeries: non-finite value");
  }
}

TimeSeries TimeSeries::uniform(double step, std::vector<double> values, Tail tail) {
  if (!(step > 0.0)) throw std::invalid_argument("TimeSeries::uniform: step must be positive");
  std::vector<double> nodes(values.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = static_cast<double>(i) * step;
  return TimeSeries(std::move(nodes), std::move(values), tail);
}

std::size_t TimeSeries::segment_of(double t) const {
  if (t <= nodes_.front()) return 0;
  if (t >= nodes_.back()) return nodes_.size() - 2;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

double TimeSeries::operator()(double t) const {
  if (t > nodes_.back()) return tail_ == Tail::Zero ? 0.0 : values_.back();
  if (t <= 0.0) return values_.front();
  const std::size_t j = segment_of(t);
  const double len = nodes_[j + 1] - nodes_[j];
  const double w = (t - nodes_[j]) / len;
  return (1.0 - w) * values_[j] + w * values_[j + 1];
}

double TimeSeries::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// Piecewise polynomial view used by the kernels.

namespace {

// p(x) = c0 + c1 x + c2 x^2 for x = s - start in [0, len].
struct Piece {
  double start;
  double len;
  double c[3];
};

struct Piecewise {
  std::vector<Piece> pieces;
  double last = 0.0;
  double tail = 0.0;
};

double tail_value(const TimeSeries& h) {
  return h.tail() == Tail::Zero ? 0.0 : h.values().back();
}

Piecewise linear_pieces(const TimeSeries& h) {
  Piecewise pw;
  const auto s = h.nodes();
  const auto v = h.values();
  pw.pieces.reserve(s.size() - 1);
  for (std::size_t j = 0; j + 1 < s.size(); ++j) {
    const double len = s[j + 1] - s[j];
    pw.pieces.push_back({s[j], len, {v[j], (v[j + 1] - v[j]) / len, 0.0}});
  }
  pw.last = s.back();
  pw.tail = tail_value(h);
  return pw;
}

Piecewise square_pieces(const TimeSeries& h) {
  Piecewise pw;
  const auto s = h.nodes();
  const auto v = h.values();
  pw.pieces.reserve(s.size() - 1);
  for (std::size_t j = 0; j + 1 < s.size(); ++j) {
    const double len = s[j + 1] - s[j];
    const double m = (v[j + 1] - v[j]) / len;
    pw.pieces.push_back({s[j], len, {v[j] * v[j], 2.0 * v[j] * m, m * m}});
  }
  pw.last = s.back();
  const double t = tail_value(h);
  pw.tail = t * t;
  return pw;
}

Piecewise derivative_square_pieces(const TimeSeries& h) {
  Piecewise pw;
  const auto s = h.nodes();
  const auto v = h.values();
  pw.pieces.reserve(s.size() - 1);
  for (std::size_t j = 0; j + 1 < s.size(); ++j) {
    const double len = s[j + 1] - s[j];
    const double m = (v[j + 1] - v[j]) / len;
    pw.pieces.push_back({s[j], len, {m * m, 0.0, 0.0}});
  }
  pw.last = s.back();
  pw.tail = 0.0;
  return pw;
}

// Sum of e^{-(s-t)} (s-t)^k p(s) over s >= t for k = 0 (A) or 1 (A^2).
double kernel_sum(const Piecewise& pw, double t, int k) {
  if (!std::isfinite(t)) throw std::invalid_argument("average: non-finite time");
  if (t < 0.0) throw std::invalid_argument("average: negative time");
  if (t >= pw.last) {
    if (t == pw.last) return pw.tail;  // e^{0} (0 + 1) = 1 for both kernels
    return pw.tail;
  }
  auto it = std::upper_bound(pw.pieces.begin(), pw.pieces.end(), t,
                             [](double x, const Piece& p) { return x < p.start; });
  std::size_t j = static_cast<std::size_t>(it - pw.pieces.begin());
  j = j == 0 ? 0 : j - 1;

  double total = 0.0;
  for (; j < pw.pieces.size(); ++j) {
    const Piece& p = pw.pieces[j];
    double c0 = p.c[0], c1 = p.c[1], c2 = p.c[2];
    double len = p.len;
    double d = p.start - t;
    if (d < 0.0) {
      const double y0 = -d;
      c0 = p.c[0] + p.c[1] * y0 + p.c[2] * y0 * y0;
      c1 = p.c[1] + 2.0 * p.c[2] * y0;
      len = p.len - y0;
      d = 0.0;
    }
    const double weight = std::exp(-d);
    if (weight == 0.0) break;
    const double i0 = exp_moment(0, len), i1 = exp_moment(1, len), i2 = exp_moment(2, len);
    double seg = c0 * i0 + c1 * i1 + c2 * i2;
    if (k == 1) seg = d * seg + c0 * i1 + c1 * i2 + c2 * exp_moment(3, len);
    total += weight * seg;
  }
  const double d = pw.last - t;
  total += pw.tail * std::exp(-d) * (k == 0 ? 1.0 : d + 1.0);
  return total;
}

double piece_integral(const Piece& p, double x0, double x1) {
  auto prim = [&](double x) { return x * (p.c[0] + x * (p.c[1] / 2.0 + x * p.c[2] / 3.0)); };
  return prim(x1) - prim(x0);
}

void check_order(int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
}

void check_interval(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < a)
    throw std::invalid_argument("integration interval must satisfy 0 <= a <= b < inf");
}

// Integral over [a, b] of A h (level 1) or A^2 h (level 2), from the closed
// forms on each linear piece and the node values of A h, A^2 h.
double integral_of_average(const TimeSeries& h, double a, double b, int level) {
  check_interval(a, b);
  const auto s = h.nodes();
  const auto v = h.values();
  const auto a1 = avg_at_nodes(h);
  const auto a2 = level == 2 ? avg2_at_nodes(h) : std::vector<double>{};
  double total = 0.0;
  const double last = s.back();
  if (a < last) {
    std::size_t j = h.segment_of(a);
    for (; j + 1 < s.size() && s[j] < b; ++j) {
      const double t1 = std::max(a, s[j]);
      const double t2 = std::min(b, s[j + 1]);
      if (t2 <= t1) continue;
      const double end = s[j + 1];
      const double m = (v[j + 1] - v[j]) / (end - s[j]);
      const double x1 = end - t1;  // >= x2
      const double x2 = end - t2;
      const double dx = x1 - x2;
      const double lin = v[j] * (t2 - t1) + 0.5 * m * ((t2 - s[j]) * (t2 - s[j]) - (t1 - s[j]) * (t1 - s[j]));
      const double exp_diff = std::exp(-x2) * exp_moment(0, dx);  // e^{t2-b} - e^{t1-b}
      const double k1 = a1[j + 1] - v[j + 1] - m;
      if (level == 1) {
        total += lin + m * (t2 - t1) + k1 * exp_diff;
      } else {
        const double k2 = a2[j + 1] - v[j + 1] - 2.0 * m;
        // int (end - t) e^{t - end} dt = e^{-x2} (x2 I0(dx) + I1(dx))
        const double lin_exp = std::exp(-x2) * (x2 * exp_moment(0, dx) + exp_moment(1, dx));
        total += lin + 2.0 * m * (t2 - t1) + k1 * lin_exp + k2 * exp_diff;
      }
    }
  }
  if (b > last) total += tail_value(h) * (b - std::max(a, last));
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------

double avg(const TimeSeries& h, double t) { return kernel_sum(linear_pieces(h), t, 0); }

double avg2(const TimeSeries& h, double t) { return kernel_sum(linear_pieces(h), t, 1); }

std::vector<double> avg_at_nodes(const TimeSeries& h) {
  const auto s = h.nodes();
  const auto v = h.values();
  const std::size_t n = s.size();
  std::vector<double> out(n);
  out[n - 1] = tail_value(h);
  for (std::size_t j = n - 1; j-- > 0;) {
    const double len = s[j + 1] - s[j];
    const double m = (v[j + 1] - v[j]) / len;
    out[j] = v[j] * exp_moment(0, len) + m * exp_moment(1, len) + std::exp(-len) * out[j + 1];
  }
  return out;
}

std::vector<double> avg2_at_nodes(const TimeSeries& h) {
  const auto s = h.nodes();
  const auto v = h.values();
  const auto a1 = avg_at_nodes(h);
  const std::size_t n = s.size();
  std::vector<double> out(n);
  out[n - 1] = tail_value(h);
  for (std::size_t j = n - 1; j-- > 0;) {
    const double len = s[j + 1] - s[j];
    const double m = (v[j + 1] - v[j]) / len;
    out[j] = v[j] * exp_moment(1, len) + m * exp_moment(2, len) +
             std::exp(-len) * (out[j + 1] + len * a1[j + 1]);
  }
  return out;
}

double integral(const TimeSeries& h, double a, double b) {
  check_interval(a, b);
  const auto pw = linear_pieces(h);
  double total = 0.0;
  for (const Piece& p : pw.pieces) {
    const double lo = std::max(a, p.start);
    const double hi = std::min(b, p.start + p.len);
    if (hi > lo) total += piece_integral(p, lo - p.start, hi - p.start);
  }
  if (b > pw.last) total += pw.tail * (b - std::max(a, pw.last));
  return total;
}

double integral_of_avg(const TimeSeries& h, double a, double b) {
  return integral_of_average(h, a, b, 1);
}

double integral_of_avg2(const TimeSeries& h, double a, double b) {
  return integral_of_average(h, a, b, 2);
}

double avg_identity_defect(const TimeSeries& h, double tau, double delta, int order) {
  check_order(order);
  if (!(delta > 0.0)) throw std::invalid_argument("avg_identity_defect: delta must be positive");
  if (!(tau >= 0.0)) throw std::invalid_argument("avg_identity_defect: tau must be nonnegative");
  for (double v : h.values()) {
    if (v < 0.0) throw std::invalid_argument("avg_identity_defect: h must be nonnegative");
  }
  const double end = tau + delta;
  const double rhs1 = integral(h, tau, end) + avg(h, end) - avg(h, tau);
  if (order == 1) return std::abs(integral_of_avg(h, tau, end) - rhs1);
  const double rhs2 = rhs1 + avg2(h, end) - avg2(h, tau);
  return std::abs(integral_of_avg2(h, tau, end) - rhs2);
}

double weighted_l2(const TimeSeries& squared_norms) {
  for (double v : squared_norms.values()) {
    if (v < 0.0) throw std::invalid_argument("weighted_l2: squared norms must be nonnegative");
  }
  return avg(squared_norms, 0.0);
}

double poincare_constant(double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("poincare: alpha must exceed 1");
  return alpha * alpha / (alpha - 1.0);
}

double poincare_defect(const TimeSeries& h, const std::optional<TimeSeries>& h_prime, double t,
                       double alpha, int order) {
  check_order(order);
  const double c_alpha = poincare_constant(alpha);
  if (h.tail() == Tail::Zero && h.values().back() != 0.0 && !h_prime)
    throw std::invalid_argument("poincare_defect: Zero tail with nonzero last value is not H^1");
  const Piecewise sq = square_pieces(h);
  const Piecewise dsq = h_prime ? square_pieces(*h_prime) : derivative_square_pieces(h);
  const double ht = h(t);
  if (order == 1) {
    const double lhs = kernel_sum(sq, t, 0);
    const double rhs = alpha * ht * ht + c_alpha * kernel_sum(dsq, t, 0);
    return rhs - lhs;
  }
  const double beta = alpha * alpha;
  const double c_beta = alpha * c_alpha;
  const double lhs = kernel_sum(sq, t, 1);
  const double rhs = beta * ht * ht + c_beta * (kernel_sum(dsq, t, 0) + kernel_sum(dsq, t, 1));
  return rhs - lhs;
}

GronwallReport gronwall_bound(const TimeSeries& u, const TimeSeries& v, const TimeSeries& c,
                              bool assume_hypothesis) {
  const auto s = u.nodes();
  auto same = [&](const TimeSeries& x) {
    return std::equal(s.begin(), s.end(), x.nodes().begin(), x.nodes().end());
  };
  if (!same(v) || !same(c)) throw std::invalid_argument("gronwall_bound: series must share nodes");
  const auto uv = u.values();
  const auto vv = v.values();
  const auto cv = c.values();
  for (double x : cv) {
    if (!(x > 0.0)) throw std::invalid_argument("gronwall_bound: c must be positive");
  }

  GronwallReport rep;
  double scale = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) scale = std::max({scale, std::abs(uv[i]), cv[i] * cv[i]});
  const double tol = 1e-9 * scale;

  for (std::size_t i = 0; i < s.size(); ++i) {
    if (uv[i] < 0.0 || vv[i] < 0.0) {
      rep.hypothesis_holds = false;
      rep.first_violation = i;
      rep.message = "u and v must be nonnegative";
      return rep;
    }
  }

  if (!assume_hypothesis) {
    rep.hypothesis_checked = true;
    rep.hypothesis_margin = std::numeric_limits<double>::infinity();
    double integral_vr = 0.0;  // int v sqrt(u), Simpson on linear v and linear sqrt(u)
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i > 0) {
        const double len = s[i] - s[i - 1];
        const double r0 = std::sqrt(uv[i - 1]), r1 = std::sqrt(uv[i]);
        const double mid = 0.25 * (vv[i - 1] + vv[i]) * (r0 + r1);
        integral_vr += len / 6.0 * (vv[i - 1] * r0 + 4.0 * mid + vv[i] * r1);
        if (cv[i] < cv[i - 1] && rep.hypothesis_holds) {
          rep.hypothesis_holds = false;
          rep.first_violation = i;
          rep.message = "c is not nondecreasing";
        }
      }
      const double margin = cv[i] * cv[i] + 2.0 * integral_vr - uv[i];
      rep.hypothesis_margin = std::min(rep.hypothesis_margin, margin);
      if (margin < -tol && rep.hypothesis_holds) {
        rep.hypothesis_holds = false;
        rep.first_violation = i;
        rep.message = "hypothesis u <= c^2 + 2 int v sqrt(u) violated";
      }
    }
    if (!rep.hypothesis_holds) return rep;
  }

  rep.conclusion_margin = std::numeric_limits<double>::infinity();
  double integral_v = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) integral_v += 0.5 * (s[i] - s[i - 1]) * (vv[i - 1] + vv[i]);
    const double margin = cv[i] + integral_v - std::sqrt(uv[i]);
    rep.conclusion_margin = std::min(rep.conclusion_margin, margin);
    if (margin < -tol && rep.conclusion_holds) {
      rep.conclusion_holds = false;
      rep.first_violation = i;
      rep.message = "conclusion sqrt(u) <= c + int v violated";
    }
  }
  return rep;
}

double y_of(double z) {
  if (z >= 0.0) return exp_moment(1, z);
  return 1.0 - std::exp(-z) * (1.0 + z);
}

}  // namespace wide
