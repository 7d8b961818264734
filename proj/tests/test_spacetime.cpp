#include "doctest.h"
#include "catalog.hpp"
#include "problems.hpp"

#include <cmath>
#include <random>

#include "wide/optim.hpp"
#include "wide/spacetime.hpp"

using namespace wide;

using namespace testprob;

TEST_CASE("affine guess obeys the constraints and J splits as H - S") {
  const auto g = make_grid(1, 16);
  std::mt19937_64 rng(5);
  const Field w0 = testcat::random_field(g, rng), w1 = testcat::random_field(g, rng);
  const MinProblem p = small_problem(EnergySpec(GeneralSemilinear{1.0, {{0, 1.0, 4.0}}}), smooth_source(g), 0.25, w0, w1);
  const Trajectory psi = affine_guess(p);
  CHECK(psi.count() == p.count());
  CHECK(static_cast<double>(p.intervals()) * p.ds >= 1.0 / p.eps + p.tail_pad);
  const JValue j = assemble_J(p, psi);
  CHECK(j.value == doctest::Approx(j.h_value - j.s_value));
  CHECK(std::isfinite(j.value));
}

TEST_CASE("constraint violations are rejected") {
  const auto g = make_grid(1, 16);
  std::mt19937_64 rng(6);
  const Field w0 = testcat::random_field(g, rng), w1 = testcat::random_field(g, rng);
  const MinProblem p = small_problem(EnergySpec(GeneralSemilinear{1.0, {}}), SourceSpec::zero(g), 0.25, w0, w1);
  Trajectory bad = affine_guess(p);
  bad.frame(0)[3] += 1e-6;
  CHECK_THROWS_AS(assemble_J(p, bad), std::invalid_argument);
  Trajectory bad2 = affine_guess(p);
  bad2.frame(1)[2] += 1e-6;
  CHECK_THROWS_AS(assemble_J(p, bad2), std::invalid_argument);
  MinProblem q = p;
  q.eps = 0.5;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("gradient matches central differences across the catalog") {
  const auto cases = gradient_cases(17);
  for (const auto& c : cases) {
    INFO(c.label);
    CHECK(c.relative() <= 1e-6);
    // el_residual uses the same pairing.
    CHECK(c.el == doctest::Approx(std::abs(c.analytic)).epsilon(1e-9).scale(1.0));
  }
  CHECK(cases.size() >= 200);
}

TEST_CASE("quadratic single-mode minimizer matches a dense solve") {
  for (bool first_order : {false, true}) {
    for (double eps : {0.25, 0.1}) {
      const QuadraticComparison q = quadratic_single_mode(first_order, eps);
      INFO("eps " << eps << " first_order " << first_order);
      CHECK(q.converged);
      CHECK(q.method == "pcg");
      CHECK(q.j_value <= q.j_affine);
      CHECK(q.error <= 1e-8 * (1.0 + q.scale));
    }
  }
}

TEST_CASE("stationarity of the minimizer") {
  std::mt19937_64 rng(23);
  const auto g = make_grid(1, 32);
  const std::vector<EnergySpec> specs = {EnergySpec(GeneralSemilinear{1.0, {{0, 1.0, 4.0}}}), EnergySpec(SineGordon{}),
                                         EnergySpec(GeneralSemilinear{1.0, {}})};
  for (const EnergySpec& e : specs) {
    const Field w0 = testcat::random_field(g, rng, 0.5), w1 = testcat::random_field(g, rng, 0.5);
    const MinProblem p = small_problem(e, smooth_source(g), 0.25, w0, w1, 0.1, 8.0);
    const MinimizeReport r = minimize(p);
    INFO(e.name() << " " << r.message);
    REQUIRE(r.converged);
    CHECK(r.grad_norm <= r.tol_grad);
    CHECK(r.j_value <= r.j_affine + 1e-12 * std::abs(r.j_affine));
    const JValue j = assemble_J(p, r.trajectory);
    CHECK(j.value == doctest::Approx(r.j_value).epsilon(1e-12));
    for (int k = 0; k < 5; ++k) {
      const Trajectory eta = admissible(p, rng);
      const double res = el_residual(p, r.trajectory, eta);
      CHECK(res <= r.grad_norm * precond_norm(p, eta) * (1.0 + 1e-6) + 1e-14);
      // Any admissible perturbation raises J (convex or near a strict minimum).
      CHECK(assemble_J(p, axpy(r.trajectory, 1e-3, eta)).value >= r.j_value - 1e-12 * std::abs(r.j_value));
    }
    CHECK_THROWS_AS(el_residual(p, r.trajectory, r.trajectory), std::invalid_argument);
  }
}

TEST_CASE("representation formula at interior nodes") {
  std::mt19937_64 rng(29);
  const auto g = make_grid(1, 32);
  const Field w0 = testcat::random_field(g, rng, 0.5), w1 = testcat::random_field(g, rng, 0.5);
  MinProblem p = small_problem(EnergySpec(GeneralSemilinear{1.0, {{0, 1.0, 4.0}}}), smooth_source(g), 0.25, w0, w1,
                               0.05, 12.0);
  const MinimizeReport r = minimize(p);
  REQUIRE(r.converged);
  const Field h = testcat::random_field(g, rng, 1.0);
  for (double tau : {0.5, 1.0, 2.0, 3.0}) {
    const auto [lhs, rhs] = representation_check(p, r.trajectory, h, tau);
    INFO("tau " << tau << " lhs " << lhs << " rhs " << rhs);
    CHECK(std::abs(lhs - rhs) <= 1e-2 * std::abs(lhs) + 1e-6);
  }
  CHECK_THROWS_AS(representation_check(p, r.trajectory, h, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(representation_check(p, r.trajectory, h, 0.525), std::invalid_argument);
}

TEST_CASE("banded Cholesky against a dense solve") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 30, bw = 3;
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i >= bw ? i - bw : 0); j < i; ++j) A[i][j] = A[j][i] = u(rng);
  for (std::size_t i = 0; i < n; ++i) A[i][i] = 8.0 + u(rng);
  BandedCholesky c(n, bw);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i >= bw ? i - bw : 0); j <= i; ++j) c.at(i, j) = A[i][j];
  c.factor();
  std::vector<double> b(2 * n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) b[2 * i] = rhs[i] = u(rng);
  c.solve(b.data(), 2);
  const std::vector<double> x = dense_solve(A, rhs);
  for (std::size_t i = 0; i < n; ++i) CHECK(b[2 * i] == doctest::Approx(x[i]).epsilon(1e-12));
  BandedCholesky bad(2, 1);
  bad.at(0, 0) = 1.0;
  bad.at(1, 0) = 2.0;
  bad.at(1, 1) = 1.0;
  CHECK_THROWS_AS(bad.factor(), std::runtime_error);
}

TEST_CASE("L-BFGS on a Rosenbrock valley") {
  const ValueGrad fg = [](std::span<const double> x, std::span<double> g) {
    double f = 0.0;
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double a = x[i + 1] - x[i] * x[i], b = 1.0 - x[i];
      f += 100.0 * a * a + b * b;
      g[i] += -400.0 * a * x[i] - 2.0 * b;
      g[i + 1] += 200.0 * a;
    }
    return f;
  };
  const LinearOp id = [](std::span<const double> in, std::span<double> out) { std::copy(in.begin(), in.end(), out.begin()); };
  std::vector<double> x(6, -1.0);
  OptimOptions opt;
  opt.tol = 1e-9;
  const OptimResult r = lbfgs(fg, id, x, opt);
  CHECK(r.converged);
  for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}
