#include "aisopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aisopt {

namespace {

double normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); }
double normal_tail(double t) { return 0.5 * std::erfc(t / std::sqrt(2.0)); }

void check_alpha(double alpha_tail) {
  if (!(alpha_tail > 0.0 && alpha_tail < 0.5))
    throw std::domain_error("quantile problem: alpha_tail must lie in (0, 1/2)");
}

// G(theta, x) = scale * (alpha - 1{x >= theta}) for a 1-D sample.
std::function<Vector(const Vector&, const Vector&)> quantile_grad(double alpha, double scale) {
  return [alpha, scale](const Vector& theta, const Vector& x) {
    return Vector::Constant(1, scale * (alpha - (x(0) >= theta(0) ? 1.0 : 0.0)));
  };
}

}  // namespace

double normal_upper_quantile(double tail) {
  if (!(tail > 0.0 && tail < 1.0))
    throw std::domain_error("normal_upper_quantile: tail must lie in (0, 1)");
  double lo = -40.0, hi = 40.0;
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    (normal_tail(mid) > tail ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Problem normal_quantile_problem(double alpha_tail, const Polytope& Theta,
                                double gradient_scale) {
  check_alpha(alpha_tail);
  if (Theta.dim() != 1)
    throw std::invalid_argument("normal_quantile_problem: Theta must be 1-D");
  Problem p;
  p.dim = 1;
  p.domain = Theta;
  p.nominal = BaseDistribution::standard_normal();
  p.grad = quantile_grad(alpha_tail, gradient_scale);
  p.f = [alpha_tail, gradient_scale](const Vector& th) {
    double t = th(0);
    // E max(X - t, 0) = pdf(t) - t * tail(t)
    return gradient_scale * (alpha_tail * t + normal_pdf(t) - t * normal_tail(t));
  };
  p.grad_f = [alpha_tail, gradient_scale](const Vector& th) {
    return Vector::Constant(1, gradient_scale * (alpha_tail - normal_tail(th(0))));
  };
  double star = normal_upper_quantile(alpha_tail);
  p.theta_star = Vector::Constant(1, star);
  p.hessian_at_opt = Matrix::Constant(1, 1, gradient_scale * normal_pdf(star));
  return p;
}

Problem exponential_quantile_problem(double alpha_tail, const Polytope& Theta,
                                     double gradient_scale) {
  check_alpha(alpha_tail);
  if (Theta.dim() != 1)
    throw std::invalid_argument("exponential_quantile_problem: Theta must be 1-D");
  Problem p;
  p.dim = 1;
  p.domain = Theta;
  p.nominal = BaseDistribution::symmetric_exponential();
  p.grad = quantile_grad(alpha_tail, gradient_scale);
  auto tail = [](double t) {
    return t >= 0 ? 0.5 * std::exp(-t) : 1.0 - 0.5 * std::exp(t);
  };
  p.grad_f = [alpha_tail, gradient_scale, tail](const Vector& th) {
    return Vector::Constant(1, gradient_scale * (alpha_tail - tail(th(0))));
  };
  // tail = exp(-theta)/2 = alpha has the root theta* = log(1/(2 alpha)) > 0
  double star = std::log(1.0 / (2.0 * alpha_tail));
  p.theta_star = Vector::Constant(1, star);
  p.hessian_at_opt = Matrix::Constant(1, 1, gradient_scale * 0.5 * std::exp(-star));
  return p;
}

Problem constrained_quadratic_problem(const Matrix& H, const Matrix& Sigma_noise,
                                      const Polytope& Theta) {
  const int s = static_cast<int>(H.rows());
  if (H.cols() != s || Theta.dim() != s || Sigma_noise.rows() != s)
    throw std::invalid_argument("constrained_quadratic_problem: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::domain_error("constrained_quadratic_problem: H must be SPD");
  Eigen::LLT<Matrix> llt(Sigma_noise);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("constrained_quadratic_problem: Sigma_noise must be SPD");
  Matrix L = llt.matrixL();

  Problem p;
  p.dim = s;
  p.domain = Theta;
  p.nominal = BaseDistribution::standard_normal(s);
  p.grad = [H, L](const Vector& theta, const Vector& z) -> Vector {
    return H * theta + L * z;
  };
  p.f = [H](const Vector& theta) { return 0.5 * theta.dot(H * theta); };
  p.grad_f = [H](const Vector& theta) -> Vector { return H * theta; };
  // theta* by projected gradient descent with the exact prox oracle;
  // step 1/lambda_max gives a contraction for this strictly convex quadratic.
  Vector x = dual_average_step(Vector::Zero(s), Vector::Zero(s), Theta);
  double t = 1.0 / es.eigenvalues().maxCoeff();
  for (int it = 0; it < 20000; ++it) {
    Vector next = dual_average_step(t * (H * x), x, Theta);
    if ((next - x).norm() < 1e-14) {
      x = next;
      break;
    }
    x = next;
  }
  p.theta_star = x;
  p.hessian_at_opt = H;
  return p;
}

Problem finite_support_quantile_problem(double alpha_tail, const BaseDistribution& support,
                                        const Polytope& Theta) {
  check_alpha(alpha_tail);
  if (support.kind() != BaseKind::FiniteSupport || support.dim() != 1)
    throw std::invalid_argument("finite_support_quantile_problem: needs 1-D finite support");
  Problem p;
  p.dim = 1;
  p.domain = Theta;
  p.nominal = support;
  p.grad = quantile_grad(alpha_tail, 1.0);
  p.grad_f = [alpha_tail, support](const Vector& th) {
    double tail = 0.0;
    for (int j = 0; j < support.atoms().rows(); ++j)
      if (support.atoms()(j, 0) >= th(0)) tail += support.probs()(j);
    return Vector::Constant(1, alpha_tail - tail);
  };
  return p;
}

double saa_quantile_baseline(std::vector<double> samples, double alpha_tail) {
  if (samples.empty()) throw std::invalid_argument("saa_quantile_baseline: empty sample");
  check_alpha(alpha_tail);
  const size_t n = samples.size();
  size_t k = static_cast<size_t>(std::ceil((1.0 - alpha_tail) * double(n)));  // 1-based
  k = std::min(std::max<size_t>(k, 1), n);
  std::nth_element(samples.begin(), samples.begin() + (k - 1), samples.end());
  return samples[k - 1];
}

}  // namespace aisopt
