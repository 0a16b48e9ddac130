#include "aisopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aisopt {

namespace {

[[noreturn]] void abort_nonfinite(const char* who, long n, const Vector& x, const Vector& mu) {
  std::ostringstream msg;
  msg << who << ": non-finite gradient at iteration " << n << " (sample = [";
  for (int i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x(i);
  msg << "], mu = [";
  for (int i = 0; i < mu.size(); ++i) msg << (i ? ", " : "") << mu(i);
  msg << "])";
  throw std::runtime_error(msg.str());
}

using ProjectorProvider = std::function<Matrix(const std::vector<int>&)>;

void joint_step_impl(JointState& s, const Problem& p, const ISFamily& f,
                     const StepSchedule& sched, RngStream& grad_rng, RngStream& aux_rng,
                     const Vector& theta_center, const Vector& mu_center, bool freeze_mu,
                     bool secondary, const ProjectorProvider& projector, long* samples) {
  const long n1 = s.n + 1;
  // theta block: IS-weighted gradient from the tilted draw
  Vector x_tilt = f.sample(s.mu, grad_rng);
  double ell = freeze_mu ? 1.0 : f.likelihood_ratio(x_tilt, s.mu);
  Vector G = p.grad(s.theta, x_tilt) * ell;
  if (!G.allFinite() || !std::isfinite(ell))
    abort_nonfinite("joint_nda_step", n1, x_tilt, s.mu);
  if (samples) ++*samples;

  // mu block: independent draw, projected-gradient magnitude times the
  // likelihood-ratio gradient
  Vector H = Vector::Zero(s.mu.size());
  if (!freeze_mu) {
    Matrix P = projector(active_set(s.theta, p.domain).indices);
    Vector x2;
    if (secondary) {
      Vector nu = -s.mu;
      x2 = f.sample(nu, aux_rng);
      auto [phi_mu, dphi_mu] = cumulant(f.base(), s.mu);
      double phi_nu = cumulant(f.base(), nu).first;
      double w = (P * p.grad(s.theta, x2)).squaredNorm() * std::exp(phi_mu + phi_nu);
      H = (dphi_mu - x2) * w;
    } else {
      x2 = f.base().sample(aux_rng);
      H = (P * p.grad(s.theta, x2)).squaredNorm() * f.likelihood_ratio_grad(x2, s.mu);
    }
    if (!H.allFinite()) abort_nonfinite("joint_nda_step", n1, x2, s.mu);
    if (samples) ++*samples;
  }

  s.g_accum += sched.theta_step(n1) * G;
  s.h_accum += sched.mu_step(n1) * H;
  s.theta_sum += s.theta;
  s.mu_sum += s.mu;
  s.theta = dual_average_step(s.g_accum, theta_center, p.domain);
  if (!freeze_mu) s.mu = dual_average_step(s.h_accum, mu_center, f.domain());
  s.n = n1;
}

// Shared theta-only baseline scaffolding: draw a nominal sample, hand the
// gradient to `update`, advance sums and the counter.
template <class Update>
void baseline_step_impl(JointState& s, const Problem& p, RngStream& rng, Update update) {
  const long n1 = s.n + 1;
  Vector x = p.nominal.sample(rng);
  Vector G = p.grad(s.theta, x);
  if (!G.allFinite()) abort_nonfinite("baseline_step", n1, x, s.mu);
  s.theta_sum += s.theta;
  update(n1, G);
  s.n = n1;
}

}  // namespace

StepSchedule::StepSchedule(double a_theta, double a_mu, double g)
    : alpha0_theta(a_theta), alpha0_mu(a_mu), gamma(g) {
  if (!(a_theta > 0.0) || !(a_mu > 0.0))
    throw std::invalid_argument("StepSchedule: alpha0 must be positive");
  if (!(g > 0.5 && g < 1.0))
    throw std::invalid_argument("StepSchedule: gamma must lie in the open interval (1/2, 1)");
}

double StepSchedule::theta_step(long n) const { return alpha0_theta * std::pow(double(n), -gamma); }
double StepSchedule::mu_step(long n) const { return alpha0_mu * std::pow(double(n), -gamma); }

bool RecordingPlan::record(long n, long horizon) const {
  if (n == 0 || n == horizon) return true;
  if (stride > 0 && n % stride == 0) return true;
  if (dense_window > 0 && n > horizon - dense_window) return true;
  return std::binary_search(forced.begin(), forced.end(), n);
}

void joint_nda_step(JointState& s, const Problem& p, const ISFamily& f,
                    const StepSchedule& sched, RngStream& grad_rng, RngStream& aux_rng,
                    const Vector& theta_center, const Vector& mu_center, bool freeze_mu) {
  auto projector = [&](const std::vector<int>& rows) {
    return projector_onto_nullspace(p.domain.active_rows(rows), p.dim).P;
  };
  joint_step_impl(s, p, f, sched, grad_rng, aux_rng, theta_center, mu_center, freeze_mu,
                  false, projector, nullptr);
}

void joint_nda_secondary_step(JointState& s, const Problem& p, const ISFamily& f,
                              const StepSchedule& sched, RngStream& grad_rng,
                              RngStream& aux_rng, const Vector& theta_center,
                              const Vector& mu_center) {
  if (f.kind() != FamilyKind::ExponentialTilting)
    throw std::invalid_argument("joint_nda_secondary_step: family must be exponential tilting");
  auto projector = [&](const std::vector<int>& rows) {
    return projector_onto_nullspace(p.domain.active_rows(rows), p.dim).P;
  };
  joint_step_impl(s, p, f, sched, grad_rng, aux_rng, theta_center, mu_center, false, true,
                  projector, nullptr);
}

void rm_sa_step(JointState& s, const Problem& p, const StepSchedule& sched, RngStream& rng,
                const Matrix& gain) {
  baseline_step_impl(s, p, rng, [&](long n1, const Vector& G) {
    if (gain.size() > 0)
      s.theta -= sched.theta_step(n1) * (gain * G);
    else
      s.theta -= sched.theta_step(n1) * G;
  });
}

void pr_sa_step(JointState& s, const Problem& p, const StepSchedule& sched, RngStream& rng,
                const Vector& theta_center) {
  // Unconstrained update kept in accumulator form (algebraically the
  // textbook recursion theta_{n+1} = theta_n - alpha_{n+1} G_n, with the sum
  // associated identically to NDA's so the degeneracy equivalence is exact).
  baseline_step_impl(s, p, rng, [&](long n1, const Vector& G) {
    s.g_accum += sched.theta_step(n1) * G;
    s.theta = theta_center - s.g_accum;
  });
}

void vanilla_nda_step(JointState& s, const Problem& p, const StepSchedule& sched,
                      RngStream& rng, const Vector& theta_center) {
  baseline_step_impl(s, p, rng, [&](long n1, const Vector& G) {
    s.g_accum += sched.theta_step(n1) * G;
    s.theta = dual_average_step(s.g_accum, theta_center, p.domain);
  });
}

void projected_sgd_step(JointState& s, const Problem& p, const StepSchedule& sched,
                        RngStream& rng) {
  baseline_step_impl(s, p, rng, [&](long n1, const Vector& G) {
    s.theta = dual_average_step(sched.theta_step(n1) * G, s.theta, p.domain);
  });
}

Engine::Engine(const RunSpec& spec, const Problem& problem, const ISFamily* family,
               std::uint64_t seed)
    : spec_(spec),
      problem_(problem),
      family_(family),
      grad_rng_(seed),
      aux_rng_(mix_seed(seed, 1)) {
  const bool joint =
      spec.engine == EngineKind::JointNda || spec.engine == EngineKind::JointNdaSecondary;
  if (joint && family == nullptr)
    throw std::invalid_argument("Engine: joint engines need an IS family");
  if (spec.engine == EngineKind::JointNdaSecondary) {
    if (family->kind() != FamilyKind::ExponentialTilting)
      throw std::invalid_argument("Engine: secondary IS requires exponential tilting");
    if (!family->domain().contains(-spec.mu0))
      throw std::invalid_argument("Engine: secondary IS requires a sign-symmetric M");
  }
  state_.theta = spec.theta0;
  if (!problem.domain.contains(state_.theta))
    throw std::invalid_argument("Engine: theta0 is infeasible");
  state_.g_accum = Vector::Zero(problem.dim);
  state_.theta_sum = Vector::Zero(problem.dim);
  if (joint) {
    state_.mu = spec.freeze_mu ? Vector::Zero(family->param_dim()) : spec.mu0;
    if (!family->domain().contains(state_.mu))
      throw std::invalid_argument("Engine: mu0 is infeasible");
    state_.h_accum = Vector::Zero(family->param_dim());
    state_.mu_sum = Vector::Zero(family->param_dim());
    mu_center_ = state_.mu;
  } else {
    state_.mu = state_.h_accum = state_.mu_sum = Vector();
  }
}

const Matrix& Engine::projector_for(const std::vector<int>& rows) {
  for (const auto& [key, P] : projector_cache_)
    if (key == rows) return P;
  projector_cache_.emplace_back(
      rows, projector_onto_nullspace(problem_.domain.active_rows(rows), problem_.dim).P);
  return projector_cache_.back().second;
}

void Engine::joint_step(bool secondary) {
  auto projector = [this](const std::vector<int>& rows) { return projector_for(rows); };
  joint_step_impl(state_, problem_, *family_, spec_.schedule, grad_rng_, aux_rng_,
                  spec_.theta0, mu_center_, spec_.freeze_mu, secondary, projector, &samples_);
}

void Engine::baseline_step() {
  switch (spec_.engine) {
    case EngineKind::VanillaNda:
      vanilla_nda_step(state_, problem_, spec_.schedule, grad_rng_, spec_.theta0);
      break;
    case EngineKind::ProjectedSgd:
      projected_sgd_step(state_, problem_, spec_.schedule, grad_rng_);
      break;
    case EngineKind::PrSa:
      pr_sa_step(state_, problem_, spec_.schedule, grad_rng_, spec_.theta0);
      break;
    case EngineKind::RmSa:
      rm_sa_step(state_, problem_, spec_.schedule, grad_rng_, spec_.gain);
      break;
    default:
      throw std::logic_error("Engine::baseline_step: not a baseline engine");
  }
  ++samples_;
}

void Engine::step() {
  switch (spec_.engine) {
    case EngineKind::JointNda:
      joint_step(false);
      break;
    case EngineKind::JointNdaSecondary:
      joint_step(true);
      break;
    default:
      baseline_step();
  }
}

TrajectoryRecord run(const RunSpec& spec, const Problem& problem, const ISFamily* family,
                     std::uint64_t seed) {
  if (spec.horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");
  RunSpec local = spec;
  std::sort(local.plan.forced.begin(), local.plan.forced.end());
  Engine engine(local, problem, family, seed);

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.thinning = local.plan.stride;
  rec.horizon = local.horizon;

  auto snapshot = [&]() {
    const JointState& s = engine.state();
    RecordPoint pt;
    pt.n = s.n;
    pt.theta = s.theta;
    pt.mu = s.mu;
    pt.theta_bar = s.theta_bar();
    pt.mu_bar = s.mu_bar();
    pt.theta_sum = s.theta_sum;
    pt.mu_sum = s.mu_sum;
    pt.active_theta_rows = active_set(s.theta, problem.domain).indices;
    if (family && s.mu.size() > 0)
      pt.active_mu_rows = active_set(s.mu, family->domain()).indices;
    rec.points.push_back(std::move(pt));
  };

  snapshot();  // iteration 0 always recorded
  for (long n = 1; n <= local.horizon; ++n) {
    engine.step();
    if (local.plan.record(n, local.horizon)) snapshot();
  }
  rec.samples_drawn = engine.samples_drawn();
  return rec;
}

}  // namespace aisopt
