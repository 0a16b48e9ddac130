#pragma once

// Parametric importance-sampling families: exponential tilting, mean
// translation, and mixtures, over the base laws used here (standard normal,
// the symmetric exponential density exp(-|x|)/2, finite support). Each family
// exposes sampling, the likelihood ratio l(x, mu) = dP/dP_mu, and its
// mu-gradient. All likelihood ratios are computed in log space and
// exponentiated last.

#include <functional>
#include <utility>

#include "aisopt/linalg.hpp"
#include "aisopt/rng.hpp"

namespace aisopt {

enum class BaseKind { StandardNormal, SymmetricExponential, FiniteSupport };

class BaseDistribution {
public:
  static BaseDistribution standard_normal(int dim = 1);
  static BaseDistribution symmetric_exponential();  // p(x) = exp(-|x|)/2, 1-D
  // atoms: one atom per row; probs positive, summing to 1 (checked to 1e-12).
  static BaseDistribution finite_support(Matrix atoms, Vector probs);

  BaseKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Matrix& atoms() const { return atoms_; }
  const Vector& probs() const { return probs_; }

  Vector sample(RngStream& rng) const;

private:
  BaseKind kind_ = BaseKind::StandardNormal;
  int dim_ = 1;
  Matrix atoms_;  // FiniteSupport only
  Vector probs_;
};

// phi(mu) = log E[exp(mu^T X)] and its gradient. StandardNormal:
// (|mu|^2/2, mu). FiniteSupport: max-shifted log-sum-exp and the tilted mean.
// SymmetricExponential: -log(1 - mu^2) for |mu| < 1, domain error otherwise.
std::pair<double, Vector> cumulant(const BaseDistribution& base, const Vector& mu);

enum class FamilyKind { ExponentialTilting, MeanTranslation, Mixture };

struct MixtureComponent {
  std::function<Vector(RngStream&)> sample;
  // log of l_i(x) = dP/dP_i(x)
  std::function<double(const Vector&)> log_likelihood_ratio;
};

class ISFamily {
public:
  static ISFamily exponential_tilting(BaseDistribution base, Polytope M);
  // Base must have a density (StandardNormal or SymmetricExponential).
  static ISFamily mean_translation(BaseDistribution base, Polytope M);
  // Parameter domain is the probability simplex over the components,
  // encoded as a Polytope (sum = 1 as two inequalities, mu_i >= 0).
  static ISFamily mixture(BaseDistribution base, std::vector<MixtureComponent> components);

  FamilyKind kind() const { return kind_; }
  const BaseDistribution& base() const { return base_; }
  const Polytope& domain() const { return M_; }
  int param_dim() const { return M_.dim(); }

  // Draw from P_mu; throws std::domain_error when mu is outside M.
  Vector sample(const Vector& mu, RngStream& rng) const;

  double log_likelihood_ratio(const Vector& x, const Vector& mu) const;
  double likelihood_ratio(const Vector& x, const Vector& mu) const;
  // Exact analytic gradient of mu -> l(x, mu). At the mean-translation kink
  // x = mu of the symmetric exponential the sign term takes the symmetric
  // subgradient value 0.
  Vector likelihood_ratio_grad(const Vector& x, const Vector& mu) const;

private:
  ISFamily() = default;
  FamilyKind kind_ = FamilyKind::ExponentialTilting;
  BaseDistribution base_;
  Polytope M_ = Polytope::unconstrained(1);
  std::vector<MixtureComponent> components_;
};

// Free-function views matching the operation names.
inline Vector sample(const ISFamily& f, const Vector& mu, RngStream& rng) {
  return f.sample(mu, rng);
}
inline double likelihood_ratio(const ISFamily& f, const Vector& x, const Vector& mu) {
  return f.likelihood_ratio(x, mu);
}
inline Vector likelihood_ratio_grad(const ISFamily& f, const Vector& x, const Vector& mu) {
  return f.likelihood_ratio_grad(x, mu);
}

}  // namespace aisopt
