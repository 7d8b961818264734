#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wide {

// Objective value; writes the gradient into g.
using ValueGrad = std::function<double(std::span<const double> x, std::span<double> g)>;
// out = M^{-1} in for an SPD preconditioner M.
using LinearOp = std::function<void(std::span<const double> in, std::span<double> out)>;

struct OptimOptions {
  int memory = 10;
  int max_iter = 2000;
  double c1 = 1e-4;
  double c2 = 0.9;
  // Stop once sqrt(g . M^{-1} g) <= tol.
  double tol = 1e-8;
  int max_line_search = 40;
};

struct OptimResult {
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

// Limited-memory BFGS with initial inverse Hessian gamma M^{-1} and a
// strong-Wolfe line search (with an approximate-Wolfe fallback once the
// decrease falls under rounding of the objective).
OptimResult lbfgs(const ValueGrad& fg, const LinearOp& precond, std::vector<double>& x,
                  const OptimOptions& opt);

// Preconditioned CG for the quadratic with Hessian H whose gradient at x is
// provided by fg. Same stopping rule as lbfgs.
OptimResult pcg(const ValueGrad& fg, const LinearOp& hess, const LinearOp& precond, std::vector<double>& x,
                const OptimOptions& opt);

double dot(std::span<const double> a, std::span<const double> b);

// Cholesky factor of a symmetric positive definite band matrix.
class BandedCholesky {
public:
  BandedCholesky(std::size_t n, std::size_t bandwidth);
  std::size_t size() const { return n_; }
  // Lower-triangle entry (i, j) with i - bandwidth <= j <= i.
  double& at(std::size_t i, std::size_t j) { return a_[i * (bw_ + 1) + (i - j)]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * (bw_ + 1) + (i - j)]; }
  // Throws std::runtime_error if the matrix is not positive definite.
  void factor();
  // Solves in place (after factor()); stride selects every stride-th entry.
  void solve(double* b, std::size_t stride = 1) const;

private:
  std::size_t n_, bw_;
  std::vector<double> a_;
  bool factored_ = false;
};

}  // namespace wide
