#include "wide/reference.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace wide {

void RefConfig::validate() const {
  require_same_grid(*w0.grid, *w1.grid);
  require_same_grid(*w0.grid, *source.grid());
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("RefConfig: dt and T must be positive");
  const double omega = std::sqrt(stiffness_bound(energy, w0));
  if (dt * omega > 1.8) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "RefConfig: dt * omega = %.3g exceeds 1.8", dt * omega);
    throw std::invalid_argument(buf);
  }
}

double stable_step(const EnergySpec& energy, const Field& w0, double safety) {
  const double omega = std::sqrt(stiffness_bound(energy, w0));
  return omega > 0.0 ? safety * 1.8 / omega : 1.0;
}

RefSolution integrate_with_velocity(const RefConfig& c) {
  c.validate();
  const SpaceGrid& g = *c.w0.grid;
  const std::size_t M = g.size();
  const auto steps = static_cast<std::size_t>(std::ceil(c.T / c.dt - 1e-9));
  Trajectory pos(c.w0.grid, c.dt, steps + 1), vel(c.w0.grid, c.dt, steps + 1);
  std::vector<double> w(c.w0.values), v(c.w1.values), acc(M), f(M);

  auto force = [&](double t, std::span<const double> state) {
    detail::energy_value_grad(c.energy, g, state, acc);
    c.source.sample(t, f);
    for (std::size_t k = 0; k < M; ++k) acc[k] = f[k] - acc[k];
  };

  std::copy(w.begin(), w.end(), pos.frame(0).begin());
  std::copy(v.begin(), v.end(), vel.frame(0).begin());
  force(0.0, w);
  const double h = c.dt;
  for (std::size_t n = 0; n < steps; ++n) {
    for (std::size_t k = 0; k < M; ++k) {
      v[k] += 0.5 * h * acc[k];
      w[k] += h * v[k];
    }
    const double t = static_cast<double>(n + 1) * h;
    force(t, w);
    for (std::size_t k = 0; k < M; ++k) v[k] += 0.5 * h * acc[k];
    const double size = g.norm(w);
    if (!(size <= 1e12)) throw std::runtime_error("reference solver blew up at step " + std::to_string(n + 1));
    std::copy(w.begin(), w.end(), pos.frame(n + 1).begin());
    std::copy(v.begin(), v.end(), vel.frame(n + 1).begin());
  }
  return {pos, vel};
}

Trajectory integrate(const RefConfig& c) { return integrate_with_velocity(c).position; }

TimeSeries energy_identity_defect(const RefSolution& sol, const RefConfig& c) {
  const SpaceGrid& g = *sol.position.grid();
  const std::size_t n = sol.position.count();
  std::vector<double> nodes(n), defect(n), f(g.size());
  std::vector<double> power(n), energy(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = sol.position.time(i);
    const auto v = sol.velocity.frame(i);
    energy[i] = 0.5 * g.inner(v, v) + detail::energy_value_grad(c.energy, g, sol.position.frame(i), {});
    c.source.sample(nodes[i], f);
    power[i] = g.inner(f, v);
  }
  double work = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) work += 0.5 * (nodes[i] - nodes[i - 1]) * (power[i - 1] + power[i]);
    defect[i] = std::abs(energy[i] - energy[0] - work);
  }
  return TimeSeries(nodes, defect);
}

}  // namespace wide
