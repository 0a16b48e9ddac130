#include <map>

#include "aisopt/experiment.hpp"

namespace aisopt {

namespace {

// The quantile experiment: 0.9999-quantile of N(0,1), exponential tilting
// learned jointly with the decision variable. gradient_scale = 1/alpha_tail
// puts the stochastic gradient on the O(1) scale the step sizes below are
// tuned for.
constexpr const char* kSec6Joint = R"(# joint NDA with adaptive importance sampling
[problem]
kind = normal_quantile
alpha_tail = 1e-4
gradient_scale = 1e4
theta_lower = -10
theta_upper = 10

[is]
kind = exponential_tilting
base = standard_normal
mu_lower = -1.7
mu_upper = 1.7

[run]
engine = joint-nda
gamma = 0.55
alpha0_theta = 0.05
alpha0_mu = 3e-6
theta0 = 7
mu0 = 0.2
horizon = 100000
trajectories = 200
seed = 1
thinning = 100
burn_in = 40000
out = runs/sec6_quantile
)";

constexpr const char* kSec6Secondary = R"(# secondary-IS variant (nu = -mu) of the joint engine
[problem]
kind = normal_quantile
alpha_tail = 1e-4
gradient_scale = 1e4
theta_lower = -10
theta_upper = 10

[is]
kind = exponential_tilting
base = standard_normal
mu_lower = -1.7
mu_upper = 1.7

[run]
engine = joint-nda-secondary
gamma = 0.55
alpha0_theta = 0.05
alpha0_mu = 3e-6
theta0 = 7
mu0 = 0.2
horizon = 100000
trajectories = 200
seed = 1
thinning = 100
burn_in = 40000
out = runs/sec6_quantile_secondary
)";

constexpr const char* kSec6Vanilla = R"(# vanilla NDA baseline (no importance sampling)
[problem]
kind = normal_quantile
alpha_tail = 1e-4
gradient_scale = 1e4
theta_lower = -10
theta_upper = 10

[run]
engine = vanilla-nda
gamma = 0.55
alpha0_theta = 0.05
theta0 = 7
horizon = 100000
trajectories = 200
seed = 1
thinning = 100
burn_in = 40000
out = runs/sec6_quantile_vanilla
)";

constexpr const char* kSec6Psgd = R"(# projected SGD baseline
[problem]
kind = normal_quantile
alpha_tail = 1e-4
gradient_scale = 1e4
theta_lower = -10
theta_upper = 10

[run]
engine = projected-sgd
gamma = 0.55
alpha0_theta = 0.05
theta0 = 7
horizon = 100000
trajectories = 200
seed = 1
thinning = 100
burn_in = 40000
out = runs/sec6_quantile_psgd
)";

constexpr const char* kExpQuantile = R"(# exponential-quantile problem with mean-translation IS
[problem]
kind = exponential_quantile
alpha_tail = 0.01
gradient_scale = 100
theta_lower = -10
theta_upper = 10

[is]
kind = mean_translation
base = symmetric_exponential
mu_lower = -3
mu_upper = 3

[run]
engine = joint-nda
gamma = 0.55
alpha0_theta = 0.05
alpha0_mu = 1e-4
theta0 = 6
mu0 = 0.2
horizon = 20000
trajectories = 100
seed = 1
thinning = 50
burn_in = 8000
out = runs/exp_quantile_mt
)";

constexpr const char* kQuadratic = R"(# constrained quadratic smoke problem
[problem]
kind = constrained_quadratic
quad_H = [[2, 0.5], [0.5, 1]]
quad_Sigma = [[1, 0], [0, 1]]
theta_A = [[-1, 0]]
theta_b = [-1]

[run]
engine = projected-sgd
gamma = 0.7
alpha0_theta = 0.5
theta0 = [2, 2]
horizon = 20000
trajectories = 50
seed = 1
thinning = 50
out = runs/quadratic_smoke
)";

const std::map<std::string, const char*>& presets() {
  static const std::map<std::string, const char*> kPresets = {
      {"sec6_quantile", kSec6Joint},
      {"sec6_quantile_secondary", kSec6Secondary},
      {"sec6_quantile_vanilla", kSec6Vanilla},
      {"sec6_quantile_psgd", kSec6Psgd},
      {"exp_quantile_mt", kExpQuantile},
      {"quadratic_smoke", kQuadratic},
  };
  return kPresets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : presets()) names.push_back(name);
  return names;
}

std::optional<std::string> preset_text(const std::string& name) {
  auto it = presets().find(name);
  if (it == presets().end()) return std::nullopt;
  return std::string(it->second);
}

}  // namespace aisopt
