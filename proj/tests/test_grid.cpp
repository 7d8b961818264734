#include "doctest.h"

#include <cmath>
#include <random>

#include "wide/grid.hpp"

using namespace wide;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(SpaceGrid(3, 16), std::invalid_argument);
  CHECK_THROWS_AS(SpaceGrid(1, 12), std::invalid_argument);
  CHECK_THROWS_AS(SpaceGrid(1, 4), std::invalid_argument);
  CHECK_THROWS_AS(SpaceGrid(1, 16, -1.0), std::invalid_argument);
  SpaceGrid g(2, 16, 3.0);
  CHECK(g.size() == 256);
  CHECK(g.cell_volume() == doctest::Approx(3.0 * 3.0 / 256.0));
  CHECK(g.spectral_size() == 16 * 9);
}

TEST_CASE("forward then inverse is the identity") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int dim : {1, 2}) {
    const auto g = make_grid(dim, 32, 5.0);
    std::vector<double> v(g->size());
    for (double& x : v) x = n(rng);
    std::vector<std::complex<double>> spec(g->spectral_size());
    std::vector<double> back(g->size());
    g->forward(v, spec);
    g->inverse(spec, back);
    double err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) err = std::max(err, std::abs(back[i] - v[i]));
    CHECK(err <= 1e-12 * g->norm(v));

    // Parseval with the r2c multiplicities.
    double sp = 0.0;
    for (std::size_t m = 0; m < spec.size(); ++m) sp += g->mode_multiplicity(m) * std::norm(spec[m]);
    sp *= g->cell_volume() / static_cast<double>(g->size());
    CHECK(sp == doctest::Approx(g->inner(v, v)).epsilon(1e-12));
  }
}

TEST_CASE("spectral derivatives of trigonometric fields") {
  const auto g = make_grid(2, 32);
  const Field v = Field::from_function(g, [](double x, double y) { return std::sin(2 * x) * std::cos(3 * y); });
  std::vector<double> d(g->size());
  g->derivative(v.values, d, 1, 1);
  const Field ref = Field::from_function(g, [](double x, double y) { return -6.0 * std::cos(2 * x) * std::sin(3 * y); });
  double err = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) err = std::max(err, std::abs(d[i] - ref.values[i]));
  CHECK(err < 1e-11);

  g->laplace_power(v.values, d, 1.0);
  err = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) err = std::max(err, std::abs(d[i] - 13.0 * v.values[i]));
  CHECK(err < 1e-11);
}

TEST_CASE("odd derivatives are skew-adjoint") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto g = make_grid(1, 16);
  std::vector<double> a(16), b(16), da(16), db(16);
  for (int i = 0; i < 16; ++i) {
    a[i] = n(rng);
    b[i] = n(rng);
  }
  g->derivative(a, da, 1, 0);
  g->derivative(b, db, 1, 0);
  CHECK(g->inner(da, b) == doctest::Approx(-g->inner(a, db)).epsilon(1e-12));
}

TEST_CASE("fields") {
  const auto g = make_grid(1, 16);
  CHECK_THROWS_AS(Field(g, std::vector<double>(15)), std::invalid_argument);
  CHECK_THROWS_AS(Field(g, std::vector<double>(16, NAN)), std::invalid_argument);
  const Field one(g, std::vector<double>(16, 1.0));
  CHECK(one.norm() == doctest::Approx(std::sqrt(kTwoPi)));
  const Field other(make_grid(1, 32), std::vector<double>(32, 1.0));
  CHECK_THROWS_AS(one.inner(other), std::invalid_argument);
}
