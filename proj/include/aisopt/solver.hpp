#pragma once

// Iteration engines: joint NDA with adaptive IS, its secondary-IS variant,
// and the baselines (RM-SA, PR-SA, vanilla NDA, projected SGD), sharing one
// step schedule and one trajectory-recording contract.
//
// Every engine owns two independent seeded streams: the gradient stream
// (theta-side samples) and an auxiliary stream (the joint engines' nominal /
// secondary H-sample). Baselines leave the auxiliary stream untouched, which
// is what makes the degeneracy equivalences (frozen-mu joint == vanilla NDA,
// unconstrained == PR-SA) hold bit-for-bit on a shared seed.

#include <cstdint>
#include <memory>
#include <vector>

#include "aisopt/is_families.hpp"
#include "aisopt/problems.hpp"
#include "aisopt/rng.hpp"

namespace aisopt {

// alpha_n = alpha0 * n^{-gamma}, n >= 1, with per-block alpha0 for the theta-
// and mu-updates and a shared gamma in (1/2, 1) (validated).
struct StepSchedule {
  double alpha0_theta;
  double alpha0_mu;
  double gamma;
  StepSchedule(double a_theta, double a_mu, double g);
  double theta_step(long n) const;
  double mu_step(long n) const;
};

enum class EngineKind { JointNda, JointNdaSecondary, VanillaNda, ProjectedSgd, PrSa, RmSa };

struct JointState {
  Vector theta, mu;
  Vector g_accum, h_accum;    // sum of alpha_{k+1} * (G_k, H_k)
  Vector theta_sum, mu_sum;   // sum of iterates theta_0..theta_{n-1}
  long n = 0;
  Vector theta_bar() const { return n > 0 ? Vector(theta_sum / double(n)) : theta; }
  Vector mu_bar() const {
    return (n > 0 && mu.size() > 0) ? Vector(mu_sum / double(n)) : mu;
  }
};

struct RecordPoint {
  long n = 0;
  Vector theta, mu, theta_bar, mu_bar;
  Vector theta_sum, mu_sum;  // prefix sums, for burn-in-restart averages
  std::vector<int> active_theta_rows, active_mu_rows;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  long thinning = 1;
  long horizon = 0;
  long samples_drawn = 0;
  std::vector<RecordPoint> points;  // strictly increasing n; first and last present
};

struct RecordingPlan {
  long stride = 100;
  std::vector<long> forced;  // checkpoint iterations, always recorded
  long dense_window = 200;   // stride-1 recording over the final iterations
  bool record(long n, long horizon) const;
};

struct RunSpec {
  EngineKind engine = EngineKind::JointNda;
  StepSchedule schedule{0.05, 3e-6, 0.55};
  Vector theta0, mu0;
  long horizon = 1;
  RecordingPlan plan;
  bool freeze_mu = false;  // joint engines: pin mu at 0 with l == 1
  Matrix gain;             // RM-SA gain K; empty means identity
};

class Engine {
public:
  Engine(const RunSpec& spec, const Problem& problem, const ISFamily* family,
         std::uint64_t seed);
  void step();
  const JointState& state() const { return state_; }
  long samples_drawn() const { return samples_; }

private:
  void joint_step(bool secondary);
  void baseline_step();
  const RunSpec spec_;
  const Problem& problem_;
  const ISFamily* family_;
  JointState state_;
  RngStream grad_rng_, aux_rng_;
  long samples_ = 0;
  Vector mu_center_;
  // projector cache keyed by active row set of theta
  std::vector<std::pair<std::vector<int>, Matrix>> projector_cache_;
  const Matrix& projector_for(const std::vector<int>& rows);
};

// Single steps against caller-owned state; the Engine methods are thin
// wrappers over the same code path.
void joint_nda_step(JointState& s, const Problem& p, const ISFamily& f,
                    const StepSchedule& sched, RngStream& grad_rng, RngStream& aux_rng,
                    const Vector& theta_center, const Vector& mu_center,
                    bool freeze_mu = false);
void joint_nda_secondary_step(JointState& s, const Problem& p, const ISFamily& f,
                              const StepSchedule& sched, RngStream& grad_rng,
                              RngStream& aux_rng, const Vector& theta_center,
                              const Vector& mu_center);
void rm_sa_step(JointState& s, const Problem& p, const StepSchedule& sched,
                RngStream& rng, const Matrix& gain);
void pr_sa_step(JointState& s, const Problem& p, const StepSchedule& sched,
                RngStream& rng, const Vector& theta_center);
void vanilla_nda_step(JointState& s, const Problem& p, const StepSchedule& sched,
                      RngStream& rng, const Vector& theta_center);
void projected_sgd_step(JointState& s, const Problem& p, const StepSchedule& sched,
                        RngStream& rng);

TrajectoryRecord run(const RunSpec& spec, const Problem& problem,
                     const ISFamily* family, std::uint64_t seed);

}  // namespace aisopt
