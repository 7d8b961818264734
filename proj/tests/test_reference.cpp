#include "doctest.h"

#include <cmath>

#include "wide/reference.hpp"

using namespace wide;

namespace {

Field mode(const GridPtr& g, double k, double a = 1.0) {
  return Field::from_function(g, [=](double x, double) { return a * std::sin(k * x); });
}

// Sup over nodes up to T of |w(t) - exact(t)|.
template <class Exact>
double max_error(const Trajectory& w, Exact exact, double T) {
  const SpaceGrid& g = *w.grid();
  std::vector<double> diff(g.size());
  double err = 0.0;
  for (std::size_t i = 0; i < w.count() && w.time(i) <= T + 1e-12; ++i) {
    const auto fr = w.frame(i);
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = fr[k] - exact(w.time(i), g.coord(static_cast<int>(k)));
    err = std::max(err, g.norm(diff));
  }
  return err;
}

double max_abs(const TimeSeries& s) {
  double m = 0.0;
  for (double v : s.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("standing waves converge at second order") {
  const GridPtr g = make_grid(1, 32);
  struct Case {
    EnergySpec e;
    double k, omega;
  };
  const Case cases[] = {{EnergySpec(GeneralSemilinear{1.0, {}}), 1.0, 1.0},
                        {EnergySpec(GeneralSemilinear{1.0, {{0, 1.0, 2.0}}}), 2.0, std::sqrt(5.0)},
                        {EnergySpec(GeneralSemilinear{2.0, {}}), 2.0, 4.0}};
  for (const auto& c : cases) {
    double err[2];
    int j = 0;
    const double dt0 = std::min(0.01, stable_step(c.e, mode(g, c.k)));
    for (double dt : {dt0, dt0 / 2}) {
      const Trajectory w = integrate(RefConfig{c.e, SourceSpec::zero(g), mode(g, c.k), Field(g), dt, 1.0});
      err[j++] = max_error(w, [&](double t, double x) { return std::cos(c.omega * t) * std::sin(c.k * x); }, 1.0);
    }
    CHECK(err[0] < 1e-3);
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("energy identity defect is second order, forced and unforced") {
  const GridPtr g = make_grid(1, 32);
  const EnergySpec kg(GeneralSemilinear{1.0, {{0, 1.0, 2.0}}});
  for (const SourceSpec& f : {SourceSpec::zero(g), smooth_source(g, 1.0)}) {
    double def[2];
    int j = 0;
    for (double dt : {0.01, 0.005}) {
      const RefConfig c{kg, f, mode(g, 2.0), mode(g, 1.0, 0.3), dt, 1.0};
      def[j++] = max_abs(energy_identity_defect(integrate_with_velocity(c), c));
    }
    CHECK(def[0] / def[1] == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("nonlinear run conserves energy to second order") {
  const GridPtr g = make_grid(1, 64);
  const EnergySpec nlw(GeneralSemilinear{1.0, {{0, 1.0, 4.0}}});
  const RefConfig c{nlw, SourceSpec::zero(g), mode(g, 1.0), Field(g), 1e-3, 2.0};
  const RefSolution sol = integrate_with_velocity(c);
  CHECK(sol.position.count() == sol.velocity.count());
  CHECK(sol.position.end_time() == doctest::Approx(2.0));
  CHECK(max_abs(energy_identity_defect(sol, c)) <= 1e-5);
}

TEST_CASE("step restriction and blow-up guard") {
  const GridPtr g = make_grid(1, 64);
  const EnergySpec bih(GeneralSemilinear{2.0, {}});
  const Field w0 = mode(g, 1.0);
  const double dt = stable_step(bih, w0);
  CHECK(dt > 0.0);
  CHECK_NOTHROW(RefConfig({bih, SourceSpec::zero(g), w0, Field(g), dt, 0.01}).validate());
  CHECK_THROWS_AS(RefConfig({bih, SourceSpec::zero(g), w0, Field(g), 3.0 * dt, 0.01}).validate(),
                  std::invalid_argument);
  CHECK_THROWS(RefConfig({bih, SourceSpec::zero(make_grid(1, 32)), w0, Field(g), dt, 0.01}).validate());

  // Every energy is defocusing, so drive growth with a huge source.
  const SourceSpec huge = SourceSpec::analytic(g, [](double, std::span<double> out) {
    for (double& v : out) v = 1e16;
  });
  CHECK_THROWS_AS(integrate(RefConfig{EnergySpec(GeneralSemilinear{1.0, {}}), huge, Field(g), Field(g), 0.01, 1.0}),
                  std::runtime_error);
}
