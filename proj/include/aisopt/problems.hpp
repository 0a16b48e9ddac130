#pragma once

// Concrete problem instances: the two 1-D quantile problems, a multivariate
// constrained quadratic with analytic solution, and helpers for
// finite-support instances used by exact-oracle comparisons.

#include <functional>
#include <optional>

#include "aisopt/is_families.hpp"
#include "aisopt/linalg.hpp"

namespace aisopt {

struct Problem {
  int dim = 1;
  Polytope domain = Polytope::unconstrained(1);
  BaseDistribution nominal;
  // Stochastic gradient G(theta, x).
  std::function<Vector(const Vector& theta, const Vector& x)> grad;
  // Optional analytic pieces.
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> grad_f;
  std::optional<Vector> theta_star;
  std::optional<Matrix> hessian_at_opt;
};

// min E[alpha*theta + max(X - theta, 0)], X ~ N(0,1).
// G(theta, x) = gradient_scale * (alpha_tail - 1{x >= theta});
// theta* = Phi^{-1}(1 - alpha_tail) by bisection on erfc to 1e-12.
// gradient_scale rescales the loss (same minimizer); the shipped presets use
// 1/alpha_tail so the step sizes they pin act on an O(1) gradient.
Problem normal_quantile_problem(double alpha_tail, const Polytope& Theta,
                                double gradient_scale = 1.0);

// Same loss with the symmetric-exponential base p(x) = exp(-|x|)/2;
// tail P[X >= theta] = exp(-theta)/2 for theta > 0.
Problem exponential_quantile_problem(double alpha_tail, const Polytope& Theta,
                                     double gradient_scale = 1.0);

// f(theta) = 1/2 theta^T H theta, G(theta, x) = H theta + x, x ~ N(0, Sigma).
// theta* computed by the exact QP oracle.
Problem constrained_quadratic_problem(const Matrix& H, const Matrix& Sigma_noise,
                                      const Polytope& Theta);

// Quantile-like instance on a finite support: G(theta, x) = alpha - 1{x >= theta}.
Problem finite_support_quantile_problem(double alpha_tail, const BaseDistribution& support,
                                        const Polytope& Theta);

// Empirical (1 - alpha_tail)-quantile: order statistic at index
// ceil((1 - alpha_tail) * n), 1-based. Throws on an empty sample.
double saa_quantile_baseline(std::vector<double> samples, double alpha_tail);

// Phibar^{-1}: solves 0.5*erfc(t/sqrt(2)) = tail by bisection to 1e-12.
double normal_upper_quantile(double tail);

}  // namespace aisopt
