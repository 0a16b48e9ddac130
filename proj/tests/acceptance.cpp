// Acceptance gate: one line per criterion (A1..A8), PASS or FAIL with the
// measured numbers; exit status is the number of failed criteria. Long-running
// by design -- A1-A3 replay the full sec6_quantile experiment (200
// trajectories, 1e5 iterations) for the joint engine and two baselines.

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <fmt/core.h>

#include "aisopt/experiment.hpp"

using namespace aisopt;

namespace {

int g_failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  fmt::print("{} {} {}\n", id, pass ? "PASS" : "FAIL", detail);
  if (!pass) ++g_failures;
}

void info(const std::string& detail) { fmt::print("info {}\n", detail); }

Vector vec1(double v) { return Vector::Constant(1, v); }

double phi_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double normal_tail(double c) { return 0.5 * std::erfc(c / std::sqrt(2.0)); }

std::vector<TrajectoryRecord> run_preset(const std::string& name,
                                         BuiltExperiment& built_out) {
  auto cfg = parse_config_text(*preset_text(name), name);
  built_out = build_experiment(cfg);
  built_out.spec.plan.forced.push_back(50000);  // A2 checkpoint
  std::vector<TrajectoryRecord> records;
  records.reserve(cfg.trajectories);
  for (long t = 0; t < cfg.trajectories; ++t)
    records.push_back(run(built_out.spec, built_out.problem,
                          built_out.family ? &*built_out.family : nullptr,
                          cfg.seed + static_cast<std::uint64_t>(t)));
  return records;
}

bool bitwise_equal(const std::vector<TrajectoryRecord>& a,
                   const std::vector<TrajectoryRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t t = 0; t < a.size(); ++t) {
    const auto& pa = a[t].points;
    const auto& pb = b[t].points;
    if (pa.size() != pb.size()) return false;
    for (size_t i = 0; i < pa.size(); ++i) {
      if (pa[i].n != pb[i].n) return false;
      if (std::memcmp(pa[i].theta.data(), pb[i].theta.data(),
                      sizeof(double) * pa[i].theta.size()) != 0)
        return false;
      if (std::memcmp(pa[i].theta_sum.data(), pb[i].theta_sum.data(),
                      sizeof(double) * pa[i].theta_sum.size()) != 0)
        return false;
    }
  }
  return true;
}

// Independent QP oracle for A5: enumerate every active subset, solve the full
// KKT system with a rank-checked LU factorization, and keep the feasible
// candidate with the smallest objective.
std::optional<Vector> oracle_qp(const Vector& g, const Vector& x0, const Matrix& A,
                                const Vector& b) {
  const int s = static_cast<int>(x0.size());
  const int p = static_cast<int>(b.size());
  auto objective = [&](const Vector& x) {
    return g.dot(x) + 0.5 * (x - x0).squaredNorm();
  };
  std::optional<Vector> best;
  double best_val = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < p; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    const int m = static_cast<int>(idx.size());
    Matrix K = Matrix::Zero(s + m, s + m);
    Vector rhs(s + m);
    K.topLeftCorner(s, s) = Matrix::Identity(s, s);
    rhs.head(s) = x0 - g;
    for (int j = 0; j < m; ++j) {
      K.block(j + s, 0, 1, s) = A.row(idx[j]);
      K.block(0, j + s, s, 1) = A.row(idx[j]).transpose();
      rhs(s + j) = b(idx[j]);
    }
    Eigen::FullPivLU<Matrix> lu(K);
    if (lu.rank() < s + m) continue;
    Vector sol = lu.solve(rhs);
    Vector x = sol.head(s);
    bool feasible = true;
    for (int i = 0; i < p; ++i)
      if (A.row(i).dot(x) > b(i) + 1e-8) feasible = false;
    if (!feasible) continue;
    double val = objective(x);
    if (val < best_val - 1e-12) {
      best_val = val;
      best = x;
    }
  }
  return best;
}

std::vector<MixtureComponent> gaussian_components(std::vector<double> means) {
  std::vector<MixtureComponent> comps;
  for (double m : means) {
    MixtureComponent c;
    c.sample = [m](RngStream& rng) { return vec1(m + rng.normal()); };
    c.log_likelihood_ratio = [m](const Vector& x) {
      double xm = x(0) - m;
      return -0.5 * (x(0) * x(0) - xm * xm);
    };
    comps.push_back(c);
  }
  return comps;
}

}  // namespace

int main() {
  // ---- A1-A3: shared sec6 experiment runs -------------------------------
  BuiltExperiment joint_built, vanilla_built, psgd_built;
  auto joint = run_preset("sec6_quantile", joint_built);
  auto vanilla = run_preset("sec6_quantile_vanilla", vanilla_built);
  auto psgd = run_preset("sec6_quantile_psgd", psgd_built);
  const Vector theta_star = *joint_built.problem.theta_star;
  const long horizon = 100000, burn = 40000, mid = 50000;

  // A1: burn-in-restarted scaled-error variance, joint vs projected SGD.
  {
    double vj = scaled_error_variance(joint, theta_star, {horizon}, burn)
                    .at(horizon)
                    .trace();
    double vp = scaled_error_variance(psgd, theta_star, {horizon}, burn)
                    .at(horizon)
                    .trace();
    double vv = scaled_error_variance(vanilla, theta_star, {horizon}, burn)
                    .at(horizon)
                    .trace();
    double ratio = vj / vp;
    report("A1", ratio <= 0.01,
           fmt::format("scaled-variance trace joint={:.4g} psgd={:.4g} "
                       "ratio={:.4g} (require <= 0.01; vanilla NDA {:.4g})",
                       vj, vp, ratio, vv));

    // informational: stationary prediction sigma^2(mu_bar) / pdf(theta*)^2
    // versus the measured joint trace (scale cancels between numerator and
    // denominator).
    double mu_bar_mean = 0.0;
    for (const auto& r : joint) mu_bar_mean += r.points.back().mu_bar(0);
    mu_bar_mean /= static_cast<double>(joint.size());
    RngStream rng(777);
    auto est = variance_objective_estimate(joint_built.problem, *joint_built.family,
                                           theta_star, vec1(mu_bar_mean), 200000, rng);
    double scale = 1e4;
    double predicted = est.mean / (scale * phi_pdf(theta_star(0))) /
                       (scale * phi_pdf(theta_star(0)));
    info(fmt::format("A1 trace identity: measured={:.4g} stationary-prediction={:.4g} "
                     "factor={:.3g} (mu_bar_final mean {:.4f})",
                     vj, predicted, vj / predicted, mu_bar_mean));
  }

  // A2: the upper bound of M (row 0) becomes and stays active by n = 5e4 in
  // at least 95% of trajectories.
  {
    long hits = 0;
    for (const auto& r : joint) {
      auto t = active_set_hit_time(r, {0}, true);
      if (t.has_value() && *t <= mid) ++hits;
    }
    double frac = static_cast<double>(hits) / static_cast<double>(joint.size());
    report("A2", frac >= 0.95,
           fmt::format("mu upper bound active by n={} and persisting in "
                       "{}/{} trajectories ({:.4f}, require >= 0.95)",
                       mid, hits, joint.size(), frac));
  }

  // A3: 10-90% band of the raw iterate theta_n at the horizon: joint width
  // <= 0.2, each baseline at least 5x wider.
  {
    auto width = [&](const std::vector<TrajectoryRecord>& recs) {
      Band b = quantile_band(recs, horizon, TrackField::Theta);
      return b.hi - b.lo;
    };
    double wj = width(joint), wv = width(vanilla), wp = width(psgd);
    bool pass = wj <= 0.2 && wv >= 5.0 * wj && wp >= 5.0 * wj;
    report("A3", pass,
           fmt::format("theta band widths at n={}: joint={:.4g} "
                       "vanilla={:.4g} psgd={:.4g} (require joint <= 0.2, "
                       "baselines >= 5x joint)",
                       horizon, wj, wv, wp));
  }

  // ---- A4: IS gradient estimator G_mu is unbiased for grad f ------------
  {
    const long draws = 100000;
    int checked = 0, bad = 0;
    double worst = 0.0;
    // E[G(theta, X^{(mu)}) l(X^{(mu)}, mu)] vs the analytic gradient, plus
    // E[l] = 1, each within 4 standard errors
    auto check = [&](const Problem& prob, const ISFamily& f, double theta,
                     const Vector& mu, std::uint64_t seed) {
      RngStream rng(seed);
      double s = 0, s2 = 0, l1 = 0, l2 = 0;
      for (long k = 0; k < draws; ++k) {
        Vector x = f.sample(mu, rng);
        double ell = f.likelihood_ratio(x, mu);
        double g = prob.grad(vec1(theta), x)(0) * ell;
        s += g;
        s2 += g * g;
        l1 += ell;
        l2 += ell * ell;
      }
      double mean = s / draws;
      double se = std::sqrt(std::max(0.0, s2 / draws - mean * mean) / draws);
      double lm = l1 / draws;
      double ls = std::sqrt(std::max(0.0, l2 / draws - lm * lm) / draws);
      double truth = prob.grad_f(vec1(theta))(0);
      double z = std::abs(mean - truth) / std::max(se, 1e-300);
      double zl = std::abs(lm - 1.0) / std::max(ls, 1e-300);
      worst = std::max({worst, z, zl});
      ++checked;
      if (z > 4.0 || zl > 4.0) ++bad;
    };

    // exponential tilting on the standard normal base, normal quantile loss
    auto nq = normal_quantile_problem(0.1, Polytope::box(-10.0, 10.0));
    auto et_normal = ISFamily::exponential_tilting(BaseDistribution::standard_normal(),
                                                   Polytope::box(-1.7, 1.7));
    // mean translation on the symmetric exponential base, exponential tail loss
    auto eq = exponential_quantile_problem(0.1, Polytope::box(-10.0, 10.0));
    auto mt_symexp = ISFamily::mean_translation(BaseDistribution::symmetric_exponential(),
                                                Polytope::box(-3.0, 3.0));
    // mixture over N(0,1), N(2,1) with the normal quantile loss
    auto mixture = ISFamily::mixture(BaseDistribution::standard_normal(),
                                     gaussian_components({0.0, 2.0}));

    int idx = 0;
    for (double theta : {0.5, 1.0, 1.5, 2.0, 2.5}) {
      for (double m : {0.3, 0.9})
        check(nq, et_normal, theta, vec1(m), 4000 + idx++);
      for (double m : {0.5, 1.0})
        check(eq, mt_symexp, theta, vec1(m), 4100 + idx++);
      for (double w : {0.3, 0.7}) {
        Vector mu(2);
        mu << 1.0 - w, w;
        check(nq, mixture, theta, mu, 4200 + idx++);
      }
    }

    report("A4", bad == 0,
           fmt::format("{} (theta, mu) grid points across ET/MT/mixture, {} "
                       "outside 4 SE (worst z = {:.2f}; E[l] = 1 checked "
                       "jointly)",
                       checked, bad, worst));
  }

  // ---- A5: proximal-step oracle agreement on random polytopes ------------
  {
    auto t0 = std::chrono::steady_clock::now();
    RngStream rng(505);
    int mismatches = 0;
    double worst = 0.0;
    const int instances = 1000;
    for (int rep = 0; rep < instances; ++rep) {
      int s = 2 + static_cast<int>(rng.uniform() * 3);  // 2..4
      int p = 1 + static_cast<int>(rng.uniform() * 6);  // 1..6
      Matrix A(p, s);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < s; ++j) A(i, j) = rng.normal();
      Vector interior(s);
      for (int j = 0; j < s; ++j) interior(j) = rng.normal();
      Vector b(p);
      for (int i = 0; i < p; ++i) b(i) = A.row(i).dot(interior) + 0.1 + rng.uniform();
      Vector g(s), x0(s);
      for (int j = 0; j < s; ++j) {
        g(j) = 2.0 * rng.normal();
        x0(j) = 2.0 * rng.normal();
      }
      Polytope K(A, b);
      Vector got = dual_average_step(g, x0, K);
      auto want = oracle_qp(g, x0, A, b);
      if (!want.has_value()) {
        ++mismatches;
        continue;
      }
      double err = (got - *want).norm();
      worst = std::max(worst, err);
      if (err > 1e-7) ++mismatches;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    report("A5", mismatches == 0 && secs < 10.0,
           fmt::format("{} random QP instances vs KKT-enumeration oracle, "
                       "{} mismatches, worst error {:.3g}, {:.2f}s "
                       "(require 0 mismatches in < 10s)",
                       instances, mismatches, worst, secs));
  }

  // ---- A6: finite-difference checks of the likelihood-ratio gradient -----
  {
    const double h = 1e-6;
    int checked = 0, bad = 0;
    double worst = 0.0;
    auto fd_check = [&](const ISFamily& f, const Vector& x, const Vector& mu) {
      Vector analytic = f.likelihood_ratio_grad(x, mu);
      for (int j = 0; j < mu.size(); ++j) {
        Vector mp = mu, mm = mu;
        mp(j) += h;
        mm(j) -= h;
        double fd = (f.likelihood_ratio(x, mp) - f.likelihood_ratio(x, mm)) / (2 * h);
        double denom = std::max({1.0, std::abs(analytic(j)),
                                 f.likelihood_ratio(x, mu)});
        double rel = std::abs(fd - analytic(j)) / denom;
        worst = std::max(worst, rel);
        ++checked;
        if (rel > 1e-5) ++bad;
      }
    };
    auto et_normal = ISFamily::exponential_tilting(BaseDistribution::standard_normal(),
                                                   Polytope::box(-1.7, 1.7));
    auto et_symexp = ISFamily::exponential_tilting(
        BaseDistribution::symmetric_exponential(), Polytope::box(-0.9, 0.9));
    auto mt_normal = ISFamily::mean_translation(BaseDistribution::standard_normal(),
                                                Polytope::box(-3.0, 3.0));
    auto mt_symexp = ISFamily::mean_translation(BaseDistribution::symmetric_exponential(),
                                                Polytope::box(-3.0, 3.0));
    RngStream rng(606);
    for (int i = 0; i < 100; ++i) {
      Vector x = vec1(2.5 * rng.normal());
      fd_check(et_normal, x, vec1(1.6 * (rng.uniform() - 0.5) * 2.0));
      fd_check(et_symexp, x, vec1(0.8 * (rng.uniform() - 0.5) * 2.0));
      fd_check(mt_normal, x, vec1(2.5 * (rng.uniform() - 0.5) * 2.0));
      Vector mu = vec1(2.5 * (rng.uniform() - 0.5) * 2.0);
      if (std::abs(x(0) - mu(0)) > 1e-3) fd_check(mt_symexp, x, mu);  // skip the kink
    }
    std::vector<MixtureComponent> comps;
    for (double m : {0.0, 2.0}) {
      MixtureComponent c;
      c.sample = [m](RngStream& r) { return vec1(m + r.normal()); };
      c.log_likelihood_ratio = [m](const Vector& x) {
        double xm = x(0) - m;
        return -0.5 * (x(0) * x(0) - xm * xm);
      };
      comps.push_back(c);
    }
    auto mixture =
        ISFamily::mixture(BaseDistribution::standard_normal(), std::move(comps));
    for (int i = 0; i < 100; ++i) {
      double w = 0.05 + 0.9 * rng.uniform();
      Vector mu(2);
      mu << 1.0 - w, w;
      fd_check(mixture, vec1(2.5 * rng.normal()), mu);
    }
    report("A6", bad == 0,
           fmt::format("{} finite-difference gradient checks, {} above "
                       "relative 1e-5 (worst {:.3g})",
                       checked, bad, worst));
  }

  // ---- A7: discrete optimal IS lower-bounds the tilting family -----------
  // P* minimizes the second moment of the importance-sampled estimator of
  // the variance objective; compare that second moment under P* (via the
  // self-normalized plug-in estimator) against every tilting parameter on a
  // grid: E[V^2] under P* = (E||PG||^2)^2 <= E[||PG||^4 l_mu] for all mu.
  {
    const int n_atoms = 20;
    Matrix atoms(n_atoms, 1);
    Vector probs(n_atoms);
    double z = 0;
    for (int j = 0; j < n_atoms; ++j) {
      atoms(j, 0) = 0.25 * j;
      probs(j) = std::exp(-0.5 * j);
      z += probs(j);
    }
    probs /= z;
    auto base = BaseDistribution::finite_support(atoms, probs);
    auto problem = finite_support_quantile_problem(0.05, base, Polytope::box(-10.0, 10.0));
    Vector theta = vec1(3.0);
    Projector ident{Matrix::Identity(1, 1)};
    Vector pstar = optimal_is_discrete(problem, theta, ident);

    // self-normalized plug-in: sample the atom index from P*, weight by
    // p/P*, normalize by the weight sum
    const long draws = 200000;
    RngStream rng(7100);
    double num = 0, wsum = 0;
    std::vector<double> v(draws), w(draws);
    for (long k = 0; k < draws; ++k) {
      double u = rng.uniform(), acc = 0;
      int j = n_atoms - 1;
      for (int i = 0; i < n_atoms; ++i) {
        acc += pstar(i);
        if (u <= acc) { j = i; break; }
      }
      double g2 = problem.grad(theta, atoms.row(j).transpose()).squaredNorm();
      w[k] = probs(j) / pstar(j);
      v[k] = g2;
      num += v[k] * w[k];
      wsum += w[k];
    }
    double c_hat = num / wsum;  // plug-in estimate of E||PG||^2
    double var_sn = 0;          // standard self-normalized IS variance estimate
    for (long k = 0; k < draws; ++k)
      var_sn += w[k] * w[k] * (v[k] - c_hat) * (v[k] - c_hat);
    double se_c = std::sqrt(var_sn) / wsum;
    double w_star = c_hat * c_hat;
    double se_w = 2.0 * c_hat * se_c;

    auto family = ISFamily::exponential_tilting(base, Polytope::box(-3.0, 3.0));
    double best = std::numeric_limits<double>::infinity(), best_se = 0.0, best_mu = 0.0;
    for (int i = 0; i <= 24; ++i) {
      double m = -3.0 + 0.25 * i;
      RngStream grid_rng(7200 + i);
      double s = 0, s2 = 0;
      for (long k = 0; k < draws; ++k) {
        Vector x = problem.nominal.sample(grid_rng);
        double g2 = problem.grad(theta, x).squaredNorm();
        double val = g2 * g2 * family.likelihood_ratio(x, vec1(m));
        s += val;
        s2 += val * val;
      }
      double mean = s / draws;
      double se = std::sqrt(std::max(0.0, s2 / draws - mean * mean) / draws);
      if (mean < best) {
        best = mean;
        best_se = se;
        best_mu = m;
      }
    }
    double slack = 4.0 * std::sqrt(best_se * best_se + se_w * se_w);
    report("A7", w_star <= best + slack,
           fmt::format("20-atom instance: E[V^2] under P* = {:.4g} (+- {:.2g}), "
                       "best tilting mu={:.2f} gives {:.4g} (+- {:.2g}) "
                       "(require P* value <= best + 4 SE)",
                       w_star, se_w, best_mu, best, best_se));
  }

  // ---- A8: bit-exact engine degeneracies ---------------------------------
  {
    const long n = 10000;
    auto make_spec = [&](EngineKind kind, const Polytope& domain, bool freeze) {
      RunSpec spec;
      spec.engine = kind;
      spec.schedule = StepSchedule(0.05, 3e-6, 0.55);
      spec.theta0 = vec1(7.0);
      spec.mu0 = vec1(0.0);
      spec.horizon = n;
      spec.plan.stride = 50;
      spec.freeze_mu = freeze;
      (void)domain;
      return spec;
    };
    auto box_problem =
        normal_quantile_problem(1e-4, Polytope::box(-10.0, 10.0), 1e4);
    auto family = ISFamily::exponential_tilting(BaseDistribution::standard_normal(),
                                                Polytope::box(-1.7, 1.7));
    std::vector<TrajectoryRecord> frozen, plain_nda;
    for (std::uint64_t s : {1, 2, 3}) {
      frozen.push_back(run(make_spec(EngineKind::JointNda, box_problem.domain, true),
                           box_problem, &family, s));
      plain_nda.push_back(run(make_spec(EngineKind::VanillaNda, box_problem.domain, false),
                              box_problem, nullptr, s));
    }
    bool eq1 = bitwise_equal(frozen, plain_nda);

    auto free_problem =
        normal_quantile_problem(1e-4, Polytope::unconstrained(1), 1e4);
    std::vector<TrajectoryRecord> nda_free, prsa;
    for (std::uint64_t s : {1, 2, 3}) {
      nda_free.push_back(
          run(make_spec(EngineKind::VanillaNda, free_problem.domain, false),
              free_problem, nullptr, s));
      prsa.push_back(run(make_spec(EngineKind::PrSa, free_problem.domain, false),
                         free_problem, nullptr, s));
    }
    bool eq2 = bitwise_equal(nda_free, prsa);
    report("A8", eq1 && eq2,
           fmt::format("bit-exact over {} iterations x 3 seeds: frozen-mu "
                       "joint == vanilla NDA: {}; unconstrained NDA == PR-SA: {}",
                       n, eq1 ? "yes" : "no", eq2 ? "yes" : "no"));
  }

  if (g_failures > 0)
    fmt::print("{} criterion(s) failed\n", g_failures);
  else
    fmt::print("all criteria passed\n");
  return g_failures;
}
