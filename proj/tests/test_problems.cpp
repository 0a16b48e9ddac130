#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aisopt/problems.hpp"

using namespace aisopt;

namespace {

Vector vec1(double v) { return Vector::Constant(1, v); }

// MC-vs-analytic gradient consistency at random feasible points (4 SE).
void check_gradient_consistency(const Problem& p, std::uint64_t seed, long draws = 100000) {
  RngStream rng(seed);
  for (int rep = 0; rep < 10; ++rep) {
    Vector theta(p.dim);
    for (int i = 0; i < p.dim; ++i) theta(i) = 3.0 * (rng.uniform() - 0.5);
    theta = dual_average_step(Vector::Zero(p.dim), theta, p.domain);  // make feasible
    Vector analytic = p.grad_f(theta);
    for (int i = 0; i < p.dim; ++i) {
      double sum = 0, sum2 = 0;
      RngStream draw_rng(seed + 17 * rep + 131 * i);
      for (long k = 0; k < draws; ++k) {
        Vector g = p.grad(theta, p.nominal.sample(draw_rng));
        sum += g(i);
        sum2 += g(i) * g(i);
      }
      double mean = sum / draws;
      double se = std::sqrt(std::max(0.0, sum2 / draws - mean * mean) / draws);
      CHECK(std::abs(mean - analytic(i)) <= 4.0 * se + 1e-12);
    }
  }
}

}  // namespace

TEST_CASE("normal quantile problem") {
  auto p = normal_quantile_problem(1e-4, Polytope::box(-10.0, 10.0));
  REQUIRE(p.theta_star.has_value());
  double star = (*p.theta_star)(0);
  CHECK(star == doctest::Approx(3.719).epsilon(1e-3));
  CHECK(std::abs(p.grad_f(*p.theta_star)(0)) < 1e-12);
  // indicator variance at the optimum: alpha (1 - alpha)
  CHECK(0.5 * std::erfc(star / std::sqrt(2.0)) == doctest::Approx(1e-4).epsilon(1e-8));

  // G = alpha - 1{x >= theta}, closed at theta
  CHECK(p.grad(vec1(1.0), vec1(2.0))(0) == doctest::Approx(1e-4 - 1.0));
  CHECK(p.grad(vec1(1.0), vec1(1.0))(0) == doctest::Approx(1e-4 - 1.0));
  CHECK(p.grad(vec1(1.0), vec1(0.5))(0) == doctest::Approx(1e-4));

  CHECK_THROWS_AS(normal_quantile_problem(0.7, Polytope::box(-10.0, 10.0)), std::domain_error);
  CHECK_THROWS_AS(normal_quantile_problem(0.0, Polytope::box(-10.0, 10.0)), std::domain_error);
}

TEST_CASE("normal upper quantile bisection accuracy") {
  CHECK(normal_upper_quantile(0.1) == doctest::Approx(1.2815515655446004).epsilon(1e-10));
  CHECK(normal_upper_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(normal_upper_quantile(1e-4) == doctest::Approx(3.7190164854557084).epsilon(1e-10));
}

TEST_CASE("exponential quantile problem") {
  auto p = exponential_quantile_problem(0.05, Polytope::box(-10.0, 10.0));
  double star = (*p.theta_star)(0);
  CHECK(star == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  // root definition: tail at theta* equals alpha
  CHECK(0.5 * std::exp(-star) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(std::abs(p.grad_f(*p.theta_star)(0)) < 1e-14);

  // mean-translation ratio of the same base at x = theta*, mu = theta*:
  // exp(-(|x| - |x - mu|)) = exp(-theta*)
  auto mt = ISFamily::mean_translation(BaseDistribution::symmetric_exponential(),
                                       Polytope::box(-5.0, 5.0));
  CHECK(mt.likelihood_ratio(vec1(star), vec1(star)) ==
        doctest::Approx(std::exp(-star)).epsilon(1e-12));
}

TEST_CASE("quantile gradient bound |G| <= 1") {
  auto p = normal_quantile_problem(0.2, Polytope::box(-10.0, 10.0));
  RngStream rng(3);
  for (int i = 0; i < 1000; ++i) {
    Vector theta = vec1(8.0 * (rng.uniform() - 0.5));
    CHECK(std::abs(p.grad(theta, p.nominal.sample(rng))(0)) <= 1.0);
  }
}

TEST_CASE("gradient scale rescales the loss without moving the minimizer") {
  auto unit = normal_quantile_problem(1e-4, Polytope::box(-10.0, 10.0), 1.0);
  auto scaled = normal_quantile_problem(1e-4, Polytope::box(-10.0, 10.0), 1e4);
  CHECK((*unit.theta_star)(0) == (*scaled.theta_star)(0));
  CHECK(scaled.grad(vec1(1.0), vec1(2.0))(0) ==
        doctest::Approx(1e4 * unit.grad(vec1(1.0), vec1(2.0))(0)).epsilon(1e-14));
  CHECK(scaled.grad_f(vec1(2.0))(0) == doctest::Approx(1e4 * unit.grad_f(vec1(2.0))(0)));
}

TEST_CASE("constrained quadratic problem") {
  Matrix I2 = Matrix::Identity(2, 2);
  auto free_p = constrained_quadratic_problem(I2, I2, Polytope::unconstrained(2));
  CHECK((*free_p.theta_star).norm() < 1e-10);

  // theta_1 >= 1 active at the optimum (1, 0)
  Matrix A(1, 2);
  A << -1, 0;
  Polytope half(A, Vector::Constant(1, -1.0));
  auto p = constrained_quadratic_problem(I2, I2, half);
  CHECK((*p.theta_star - (Vector(2) << 1, 0).finished()).cwiseAbs().maxCoeff() < 1e-9);
  auto act = active_set(*p.theta_star, half);
  REQUIRE(act.indices == std::vector<int>{0});

  // optimality: projected gradient vanishes, multiplier strictly positive
  Matrix P = projector_onto_nullspace(half.active_rows(act.indices), 2).P;
  CHECK((P * p.grad_f(*p.theta_star)).norm() < 1e-8);
  // -grad f(theta*) = A_a^T lambda => lambda = 1 > 0
  Vector lambda = pseudoinverse(half.active_rows(act.indices).transpose()) *
                  (-p.grad_f(*p.theta_star));
  CHECK(lambda(0) > 1e-6);

  Matrix notspd(2, 2);
  notspd << 1, 0, 0, -1;
  CHECK_THROWS_AS(constrained_quadratic_problem(notspd, I2, Polytope::unconstrained(2)),
                  std::domain_error);
}

TEST_CASE("MC gradient consistency for shipped problems") {
  check_gradient_consistency(normal_quantile_problem(0.1, Polytope::box(-10.0, 10.0)), 1001);
  check_gradient_consistency(exponential_quantile_problem(0.1, Polytope::box(-10.0, 10.0)),
                             1002);
  Matrix H(2, 2);
  H << 2, 0.5, 0.5, 1;
  Matrix S(2, 2);
  S << 1, 0.2, 0.2, 0.5;
  check_gradient_consistency(constrained_quadratic_problem(H, S, Polytope::unconstrained(2)),
                             1003, 20000);
}

TEST_CASE("saa quantile baseline") {
  std::vector<double> ramp;
  for (int i = 0; i < 10; ++i) ramp.push_back(i);
  CHECK(saa_quantile_baseline(ramp, 0.2) == doctest::Approx(7.0));
  CHECK(saa_quantile_baseline({5.0}, 0.1) == doctest::Approx(5.0));
  CHECK_THROWS_AS(saa_quantile_baseline({}, 0.1), std::invalid_argument);

  // consistency: 1e6 standard normal draws, alpha = 0.1
  RngStream rng(2024);
  std::vector<double> draws(1000000);
  for (auto& d : draws) d = rng.normal();
  CHECK(std::abs(saa_quantile_baseline(std::move(draws), 0.1) - 1.2815515655446004) < 0.02);
}

TEST_CASE("finite support quantile problem gradient mean") {
  Matrix atoms(4, 1);
  atoms << -1, 0, 1, 3;
  Vector probs(4);
  probs << 0.4, 0.3, 0.2, 0.1;
  auto p = finite_support_quantile_problem(0.15, BaseDistribution::finite_support(atoms, probs),
                                           Polytope::box(-5.0, 5.0));
  // exact: grad f(theta) = alpha - P[X >= theta]
  CHECK(p.grad_f(vec1(2.0))(0) == doctest::Approx(0.15 - 0.1).epsilon(1e-12));
  CHECK(p.grad_f(vec1(0.5))(0) == doctest::Approx(0.15 - 0.3).epsilon(1e-12));
  check_gradient_consistency(p, 1004, 50000);
}
