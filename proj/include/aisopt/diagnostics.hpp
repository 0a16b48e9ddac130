#pragma once

// Cross-trajectory statistics: scaled-error variance (with burn-in-restart
// averaging), quantile bands, active-set hit times, the exact optimal-IS
// distribution on finite support, Monte Carlo estimates of the variance
// objective, and projected-gradient residuals.

#include <map>
#include <optional>

#include "aisopt/problems.hpp"
#include "aisopt/solver.hpp"

namespace aisopt {

// Unbiased sample covariance of sqrt(n - b) * (theta_bar_n^{(b)} - theta*)
// across trajectories, where averaging restarts at the burn-in b:
// theta_bar_n^{(b)} = (n - b)^{-1} sum_{i=b}^{n-1} theta_i (computed exactly
// from recorded prefix sums). burn_in = 0 gives the plain scaled error.
// Requires >= 2 trajectories; every checkpoint (and b when b > 0) must be a
// recorded iteration and checkpoints must exceed the burn-in.
std::map<long, Matrix> scaled_error_variance(const std::vector<TrajectoryRecord>& records,
                                             const Vector& theta_star,
                                             const std::vector<long>& checkpoints,
                                             long burn_in = 0);

// Smallest recorded n such that the target rows are active at every recorded
// m >= n (persistence through the horizon); nullopt if never. `mu_track`
// selects the mu-side active flags instead of the theta-side ones.
std::optional<long> active_set_hit_time(const TrajectoryRecord& record,
                                        const std::vector<int>& target_rows,
                                        bool mu_track = false);

// P*(x_j) = ||P G(theta*, x_j)||^2 p_j / normalizer on the problem's finite
// support; throws if every projected gradient vanishes.
Vector optimal_is_discrete(const Problem& problem, const Vector& theta_star,
                           const Projector& P_active);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Monte Carlo mean of V(theta, mu, X) = ||P_{A(theta)} G(theta, X)||^2 l(X, mu)
// over nominal draws, with its standard error.
McEstimate variance_objective_estimate(const Problem& problem, const ISFamily& family,
                                       const Vector& theta, const Vector& mu,
                                       long n_samples, RngStream& rng);

// ||P_{A(theta*)} grad_f(theta_bar)|| with the active set taken at theta*.
// Requires the problem's analytic gradient and theta*.
double projected_gradient_residual(const Vector& theta_bar, const Problem& problem);

struct Band {
  double lo = 0.0, hi = 0.0, mean = 0.0;
};

// 10%-90% empirical quantile band (linear interpolation) of a scalar
// statistic across trajectories at a recorded iteration.
enum class TrackField { Theta, Mu, ThetaBar, MuBar };
Band quantile_band(const std::vector<TrajectoryRecord>& records, long checkpoint,
                   TrackField field, int coord = 0, double lo = 0.1, double hi = 0.9);

struct ExperimentSummary {
  std::vector<long> checkpoints;
  std::map<long, Band> theta_band, mu_band, theta_bar_band, mu_bar_band;
  std::map<long, Matrix> scaled_variance;  // empty when theta* unknown
  long burn_in = 0;
  std::vector<std::optional<long>> mu_hit_times;  // per trajectory; empty if no mu
  std::map<long, double> projected_gradient_residual_mean;
  long trajectories = 0;
  long samples_per_trajectory = 0;
};

}  // namespace aisopt
