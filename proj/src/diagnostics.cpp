#include "aisopt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aisopt {

namespace {

const RecordPoint& point_at(const TrajectoryRecord& rec, long n) {
  auto it = std::lower_bound(rec.points.begin(), rec.points.end(), n,
                             [](const RecordPoint& p, long v) { return p.n < v; });
  if (it == rec.points.end() || it->n != n)
    throw std::invalid_argument("diagnostics: iteration " + std::to_string(n) +
                                " is not recorded");
  return *it;
}

}  // namespace

std::map<long, Matrix> scaled_error_variance(const std::vector<TrajectoryRecord>& records,
                                             const Vector& theta_star,
                                             const std::vector<long>& checkpoints,
                                             long burn_in) {
  if (records.size() < 2)
    throw std::invalid_argument("scaled_error_variance: needs >= 2 trajectories");
  const int s = static_cast<int>(theta_star.size());
  std::map<long, Matrix> out;
  for (long n : checkpoints) {
    if (n <= burn_in)
      throw std::invalid_argument("scaled_error_variance: checkpoint <= burn-in");
    std::vector<Vector> errs;
    errs.reserve(records.size());
    for (const auto& rec : records) {
      const RecordPoint& pn = point_at(rec, n);
      Vector bar;
      if (burn_in > 0) {
        // averaging restarted at the burn-in: (sum_n - sum_b) / (n - b)
        const RecordPoint& pb = point_at(rec, burn_in);
        bar = (pn.theta_sum - pb.theta_sum) / double(n - burn_in);
      } else {
        bar = pn.theta_bar;
      }
      errs.push_back(std::sqrt(double(n - burn_in)) * (bar - theta_star));
    }
    Vector mean = Vector::Zero(s);
    for (const auto& e : errs) mean += e;
    mean /= double(errs.size());
    Matrix cov = Matrix::Zero(s, s);
    for (const auto& e : errs) cov += (e - mean) * (e - mean).transpose();
    cov /= double(errs.size() - 1);
    out[n] = 0.5 * (cov + cov.transpose());
  }
  return out;
}

std::optional<long> active_set_hit_time(const TrajectoryRecord& record,
                                        const std::vector<int>& target_rows, bool mu_track) {
  if (record.points.empty())
    throw std::invalid_argument("active_set_hit_time: empty record");
  auto covered = [&](const RecordPoint& p) {
    const auto& act = mu_track ? p.active_mu_rows : p.active_theta_rows;
    return std::includes(act.begin(), act.end(), target_rows.begin(), target_rows.end());
  };
  std::optional<long> hit;
  for (auto it = record.points.rbegin(); it != record.points.rend(); ++it) {
    if (!covered(*it)) break;
    hit = it->n;  // persistence: active at every recorded point from here on
  }
  return hit;
}

Vector optimal_is_discrete(const Problem& problem, const Vector& theta_star,
                           const Projector& P_active) {
  if (problem.nominal.kind() != BaseKind::FiniteSupport)
    throw std::invalid_argument("optimal_is_discrete: problem must have finite support");
  const Matrix& atoms = problem.nominal.atoms();
  const Vector& p = problem.nominal.probs();
  Vector w(p.size());
  for (int j = 0; j < p.size(); ++j)
    w(j) = (P_active.P * problem.grad(theta_star, atoms.row(j).transpose())).squaredNorm() * p(j);
  double z = w.sum();
  if (z <= 0.0)
    throw std::domain_error("optimal_is_discrete: projected gradient vanishes on the support");
  return w / z;
}

McEstimate variance_objective_estimate(const Problem& problem, const ISFamily& family,
                                       const Vector& theta, const Vector& mu, long n_samples,
                                       RngStream& rng) {
  if (!family.domain().contains(mu, 1e-9))
    throw std::domain_error("variance_objective_estimate: mu outside M");
  Matrix P = projector_onto_nullspace(
                 problem.domain.active_rows(active_set(theta, problem.domain).indices),
                 problem.dim)
                 .P;
  double sum = 0.0, sum2 = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    Vector x = problem.nominal.sample(rng);
    double v = (P * problem.grad(theta, x)).squaredNorm() * family.likelihood_ratio(x, mu);
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / double(n_samples);
  double var = std::max(0.0, sum2 / double(n_samples) - mean * mean);
  return {mean, std::sqrt(var / double(n_samples))};
}

double projected_gradient_residual(const Vector& theta_bar, const Problem& problem) {
  if (!problem.grad_f || !problem.theta_star)
    throw std::invalid_argument("projected_gradient_residual: analytic gradient required");
  auto act = active_set(*problem.theta_star, problem.domain);
  Matrix P = projector_onto_nullspace(problem.domain.active_rows(act.indices), problem.dim).P;
  return (P * problem.grad_f(theta_bar)).norm();
}

Band quantile_band(const std::vector<TrajectoryRecord>& records, long checkpoint,
                   TrackField field, int coord, double lo, double hi) {
  std::vector<double> vals;
  vals.reserve(records.size());
  for (const auto& rec : records) {
    const RecordPoint& p = point_at(rec, checkpoint);
    switch (field) {
      case TrackField::Theta: vals.push_back(p.theta(coord)); break;
      case TrackField::Mu: vals.push_back(p.mu(coord)); break;
      case TrackField::ThetaBar: vals.push_back(p.theta_bar(coord)); break;
      case TrackField::MuBar: vals.push_back(p.mu_bar(coord)); break;
    }
  }
  std::sort(vals.begin(), vals.end());
  auto quantile = [&](double q) {
    double idx = q * double(vals.size() - 1);
    size_t i = static_cast<size_t>(idx);
    double frac = idx - double(i);
    return i + 1 < vals.size() ? (1.0 - frac) * vals[i] + frac * vals[i + 1] : vals[i];
  };
  Band b;
  b.lo = quantile(lo);
  b.hi = quantile(hi);
  double sum = 0.0;
  for (double v : vals) sum += v;
  b.mean = sum / double(vals.size());
  return b;
}

}  // namespace aisopt
