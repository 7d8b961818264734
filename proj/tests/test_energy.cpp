#include "doctest.h"
#include "catalog.hpp"

#include <cmath>
#include <random>

using namespace wide;

namespace {

double riemann(int n, const std::function<double(double)>& f) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f(kTwoPi * (i + 0.5) / n);
  return s * kTwoPi / n;
}

double max_diff(const Field& a, const Field& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a.values[i] - b.values[i]));
  return e;
}

Field shifted(const Field& v, int by) {
  Field out(v.grid);
  const int n = v.grid->points_per_axis();
  if (v.grid->dim() == 1) {
    for (int i = 0; i < n; ++i) out.values[(i + by) % n] = v.values[i];
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.values[((i + by) % n) * n + (j + 2 * by) % n] = v.values[i * n + j];
  }
  return out;
}

}  // namespace

TEST_CASE("zero field has zero energy and gradient") {
  for (int dim : {1, 2}) {
    const auto g = make_grid(dim, 16);
    const Field zero(g);
    for (const auto& spec : testcat::all_specs()) {
      CHECK(eval_W(spec, zero) == doctest::Approx(0.0).epsilon(1e-14));
      CHECK(grad_W(spec, zero).norm() <= 1e-12);
    }
  }
}

TEST_CASE("worked values for sin x on the 2 pi torus") {
  const auto g = make_grid(1, 64);
  const Field v = Field::from_function(g, [](double x, double) { return std::sin(x); });
  const double dirichlet = riemann(20000, [](double x) { return std::cos(x) * std::cos(x); });
  CHECK(dirichlet == doctest::Approx(M_PI).epsilon(1e-12));

  const EnergySpec linear(GeneralSemilinear{1.0, {}});
  CHECK(eval_W(linear, v) == doctest::Approx(0.5 * dirichlet).epsilon(1e-12));
  CHECK(max_diff(grad_W(linear, v), v) < 1e-12);

  const EnergySpec kirch(Kirchhoff{});
  CHECK(eval_W(kirch, v) == doctest::Approx(0.25 * dirichlet * dirichlet).epsilon(1e-12));
  CHECK(eval_W(kirch, v) == doctest::Approx(2.4674).epsilon(1e-4));
  Field pis(v.grid, v.values);
  for (double& x : pis.values) x *= M_PI;
  CHECK(max_diff(grad_W(kirch, v), pis) < 1e-11);

  const EnergySpec sg(SineGordon{});
  const double ref = riemann(20000, [](double x) { return 0.5 * std::cos(x) * std::cos(x) + 1.0 - std::cos(std::sin(x)); });
  CHECK(eval_W(sg, v) == doctest::Approx(ref).epsilon(1e-10));

  const EnergySpec nlw(GeneralSemilinear{1.0, {{0, 1.0, 4.0}}});
  const double quartic = riemann(20000, [](double x) { return std::pow(std::sin(x), 4) / 4.0; });
  CHECK(eval_W(nlw, v) == doctest::Approx(0.5 * dirichlet + quartic).epsilon(1e-12));

  const EnergySpec frac(FractionalNLW{0.5, 0.0, 4.0});
  CHECK(eval_W(frac, v) == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
}

TEST_CASE("theta prescriptions") {
  CHECK(theta_for(GeneralSemilinear{1.0, {}}) == 0.5);
  CHECK(theta_for(GeneralSemilinear{1.0, {{0, 1.0, 4.0}}}) == doctest::Approx(0.75));
  CHECK(theta_for(GeneralSemilinear{1.0, {{0, 1.0, 1.5}}}) == 0.5);
  CHECK(theta_for(SineGordon{}) == 0.5);
  CHECK(theta_for(PLaplacian{3.0, std::nullopt, 1e-8}) == doctest::Approx(2.0 / 3.0));
  CHECK(theta_for(PLaplacian{3.0, PLaplacian::Lower{5.0, 1.0}, 1e-8}) == doctest::Approx(0.8));
  CHECK(theta_for(GeneralSemilinear{2.0, {{1, 1.0, 3.0}, {0, 1.0, 6.0}}}) == doctest::Approx(5.0 / 6.0));
  CHECK(theta_for(Kirchhoff{}) == 0.75);
  CHECK(theta_for(FractionalNLW{0.5, 1.0, 3.0}) == doctest::Approx(2.0 / 3.0));
  CHECK(theta_for(FractionalNLW{0.5, 0.0, 3.0}) == 0.5);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(EnergySpec(GeneralSemilinear{1.0, {{1, 1.0, 4.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(EnergySpec(GeneralSemilinear{0.0, {}}), std::invalid_argument);
  CHECK_THROWS_AS(EnergySpec(GeneralSemilinear{1.0, {{0, -1.0, 4.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(EnergySpec(GeneralSemilinear{1.0, {{0, 1.0, 1.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(EnergySpec(FractionalNLW{1.0, 1.0, 4.0}), std::invalid_argument);
  CHECK_THROWS_AS(EnergySpec(PLaplacian{1.0, std::nullopt, 1e-8}), std::invalid_argument);
  CHECK_FALSE(EnergySpec(Kirchhoff{}).weak_solution_applicable());
  CHECK_FALSE(EnergySpec(PLaplacian{}).weak_solution_applicable());
  CHECK(EnergySpec(SineGordon{}).weak_solution_applicable());
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(21);
  const auto specs = testcat::all_specs();
  const double delta = 1e-5;
  for (int c = 0; c < 200; ++c) {
    const auto g = make_grid(c % 4 == 3 ? 2 : 1, c % 4 == 3 ? 16 : 32);
    const EnergySpec& spec = specs[c % specs.size()];
    const Field v = testcat::random_field(g, rng, 1.5);
    const Field h = testcat::random_field(g, rng, 1.0);
    Field plus(g, v.values), minus(g, v.values);
    for (std::size_t i = 0; i < v.size(); ++i) {
      plus.values[i] += delta * h.values[i];
      minus.values[i] -= delta * h.values[i];
    }
    const double fd = (eval_W(spec, plus) - eval_W(spec, minus)) / (2.0 * delta);
    const double an = grad_W(spec, v).inner(h);
    const double scale = 1.0 + std::abs(an) + eval_W(spec, v);
    INFO(spec.name());
    CHECK(std::abs(fd - an) <= 1e-5 * (1.0 + h.norm()) * scale);
  }
}

TEST_CASE("energy is nonnegative on random fields") {
  std::mt19937_64 rng(22);
  const auto specs = testcat::all_specs();
  const auto g = make_grid(1, 32);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int c = 0; c < 1000; ++c) {
    Field v(g);
    if (c % 2 == 0) {
      v = testcat::random_field(g, rng, 3.0);
    } else {
      for (double& x : v.values) x = n(rng);
    }
    for (const auto& spec : specs) REQUIRE(eval_W(spec, v) >= 0.0);
  }
}

TEST_CASE("translation equivariance") {
  std::mt19937_64 rng(23);
  for (int dim : {1, 2}) {
    const auto g = make_grid(dim, 16);
    const Field v = testcat::random_field(g, rng, 1.2);
    const Field sv = shifted(v, 3);
    for (const auto& spec : testcat::all_specs()) {
      INFO(spec.name());
      const double w = eval_W(spec, v);
      CHECK(std::abs(eval_W(spec, sv) - w) <= 1e-10 * (1.0 + w));
      CHECK(max_diff(grad_W(spec, sv), shifted(grad_W(spec, v), 3)) <= 1e-10 * (1.0 + w));
    }
  }
}

TEST_CASE("quadratic homogeneity") {
  std::mt19937_64 rng(24);
  const auto g = make_grid(1, 32);
  const Field v = testcat::random_field(g, rng);
  for (double m : {0.5, 1.0, 2.0, 3.0}) {
    const EnergySpec spec(GeneralSemilinear{m, {}});
    for (double a : {-3.0, 0.1, 7.0}) {
      Field av(g, v.values);
      for (double& x : av.values) x *= a;
      CHECK(eval_W(spec, av) == doctest::Approx(a * a * eval_W(spec, v)).epsilon(1e-10));
    }
  }
}

TEST_CASE("growth surrogate") {
  const auto g = make_grid(1, 64);
  const EnergySpec linear(GeneralSemilinear{1.0, {}}, 2.0);
  const auto [l0, r0] = growth_check(linear, Field(g));
  CHECK(l0 == 0.0);
  CHECK(r0 == 2.0);

  const Field s = Field::from_function(g, [](double x, double) { return std::sin(x); });
  const auto [l1, r1] = growth_check(linear, s);
  CHECK(l1 <= r1);

  const EnergySpec nlw(GeneralSemilinear{1.0, {{0, 1.0, 4.0}}}, 1.0);
  double worst = 0.0, first = 0.0;
  for (int a = 1; a <= 32; a *= 2) {
    Field v(g, s.values);
    for (double& x : v.values) x *= a;
    const auto [l, r] = growth_check(nlw, v);
    if (a == 1) first = l / r;
    worst = std::max(worst, l / r);
  }
  CHECK(worst <= 10.0 * first + 1.0);
}

TEST_CASE("grid mismatch and resolution are rejected") {
  const auto g = make_grid(1, 8);
  const Field v = Field::from_function(g, [](double x, double) { return std::sin(x); });
  const EnergySpec high(GeneralSemilinear{5.0, {}});
  CHECK_THROWS_AS(eval_W(high, v), std::invalid_argument);
}
