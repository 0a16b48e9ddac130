#include "aisopt/is_families.hpp"

#include <cmath>
#include <stdexcept>

namespace aisopt {

namespace {

int categorical(const Vector& probs, RngStream& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u <= acc) return i;
  }
  return static_cast<int>(probs.size()) - 1;  // guard against rounding
}

}  // namespace

BaseDistribution BaseDistribution::standard_normal(int dim) {
  BaseDistribution b;
  b.kind_ = BaseKind::StandardNormal;
  b.dim_ = dim;
  return b;
}

BaseDistribution BaseDistribution::symmetric_exponential() {
  BaseDistribution b;
  b.kind_ = BaseKind::SymmetricExponential;
  b.dim_ = 1;
  return b;
}

BaseDistribution BaseDistribution::finite_support(Matrix atoms, Vector probs) {
  if (atoms.rows() != probs.size() || atoms.rows() == 0)
    throw std::invalid_argument("finite_support: atoms/probs mismatch");
  if ((probs.array() <= 0).any())
    throw std::invalid_argument("finite_support: probabilities must be positive");
  if (std::abs(probs.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("finite_support: probabilities must sum to 1");
  BaseDistribution b;
  b.kind_ = BaseKind::FiniteSupport;
  b.dim_ = static_cast<int>(atoms.cols());
  b.atoms_ = std::move(atoms);
  b.probs_ = std::move(probs);
  return b;
}

Vector BaseDistribution::sample(RngStream& rng) const {
  switch (kind_) {
    case BaseKind::StandardNormal: {
      Vector x(dim_);
      for (int i = 0; i < dim_; ++i) x(i) = rng.normal();
      return x;
    }
    case BaseKind::SymmetricExponential: {
      double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
      return Vector::Constant(1, side * rng.exponential());
    }
    case BaseKind::FiniteSupport:
      return atoms_.row(categorical(probs_, rng)).transpose();
  }
  throw std::logic_error("unreachable");
}

std::pair<double, Vector> cumulant(const BaseDistribution& base, const Vector& mu) {
  if (!mu.allFinite()) throw std::invalid_argument("cumulant: non-finite mu");
  switch (base.kind()) {
    case BaseKind::StandardNormal:
      return {0.5 * mu.squaredNorm(), mu};
    case BaseKind::SymmetricExponential: {
      double m = mu(0);
      if (std::abs(m) >= 1.0)
        throw std::domain_error("cumulant: symmetric exponential diverges for |mu| >= 1");
      return {-std::log1p(-m * m), Vector::Constant(1, 2.0 * m / (1.0 - m * m))};
    }
    case BaseKind::FiniteSupport: {
      // max-shifted log-sum-exp; gradient is the tilted mean of the atoms
      const Matrix& X = base.atoms();
      Vector e = X * mu;
      double shift = e.maxCoeff();
      Vector w = (base.probs().array() * (e.array() - shift).exp()).matrix();
      double z = w.sum();
      double phi = shift + std::log(z);
      Vector grad = X.transpose() * w / z;
      return {phi, grad};
    }
  }
  throw std::logic_error("unreachable");
}

ISFamily ISFamily::exponential_tilting(BaseDistribution base, Polytope M) {
  if (M.dim() != base.dim())
    throw std::invalid_argument("exponential_tilting: parameter/base dimension mismatch");
  ISFamily f;
  f.kind_ = FamilyKind::ExponentialTilting;
  f.base_ = std::move(base);
  f.M_ = std::move(M);
  return f;
}

ISFamily ISFamily::mean_translation(BaseDistribution base, Polytope M) {
  if (base.kind() == BaseKind::FiniteSupport)
    throw std::invalid_argument("mean_translation: base must have a density");
  if (M.dim() != base.dim())
    throw std::invalid_argument("mean_translation: parameter/base dimension mismatch");
  ISFamily f;
  f.kind_ = FamilyKind::MeanTranslation;
  f.base_ = std::move(base);
  f.M_ = std::move(M);
  return f;
}

ISFamily ISFamily::mixture(BaseDistribution base, std::vector<MixtureComponent> components) {
  const int m = static_cast<int>(components.size());
  if (m == 0) throw std::invalid_argument("mixture: needs at least one component");
  // probability simplex as a polytope: sum mu_i = 1 (two inequalities), mu_i >= 0
  Matrix A(m + 2, m);
  Vector b(m + 2);
  A.row(0) = Eigen::RowVectorXd::Ones(m);
  b(0) = 1.0;
  A.row(1) = -Eigen::RowVectorXd::Ones(m);
  b(1) = -1.0;
  for (int i = 0; i < m; ++i) {
    A.row(2 + i) = Eigen::RowVectorXd::Zero(m);
    A(2 + i, i) = -1.0;
    b(2 + i) = 0.0;
  }
  ISFamily f;
  f.kind_ = FamilyKind::Mixture;
  f.base_ = std::move(base);
  f.M_ = Polytope(std::move(A), std::move(b));
  f.components_ = std::move(components);
  return f;
}

Vector ISFamily::sample(const Vector& mu, RngStream& rng) const {
  if (mu.size() != param_dim() || !M_.contains(mu, 1e-9))
    throw std::domain_error("ISFamily::sample: mu outside parameter domain");
  switch (kind_) {
    case FamilyKind::ExponentialTilting:
      switch (base_.kind()) {
        case BaseKind::StandardNormal: {
          Vector x(base_.dim());
          for (int i = 0; i < x.size(); ++i) x(i) = rng.normal() + mu(i);
          return x;
        }
        case BaseKind::FiniteSupport: {
          // tilted categorical p_j exp(mu.x_j - phi)
          Vector e = base_.atoms() * mu;
          double shift = e.maxCoeff();
          Vector w = (base_.probs().array() * (e.array() - shift).exp()).matrix();
          w /= w.sum();
          return base_.atoms().row(categorical(w, rng)).transpose();
        }
        case BaseKind::SymmetricExponential: {
          // tilted density ~ exp(mu*x - |x|): two exponential lobes
          double m = mu(0);
          if (std::abs(m) >= 1.0)
            throw std::domain_error("ET sample: symmetric exponential needs |mu| < 1");
          // negative lobe first so the mu = 0 draw path matches the base
          // sampler's branch layout exactly
          double right = 1.0 / (1.0 - m), left = 1.0 / (1.0 + m);
          if (rng.uniform() < left / (right + left))
            return Vector::Constant(1, -rng.exponential() / (1.0 + m));
          return Vector::Constant(1, rng.exponential() / (1.0 - m));
        }
      }
      break;
    case FamilyKind::MeanTranslation:
      return base_.sample(rng) + mu;
    case FamilyKind::Mixture: {
      int i = categorical(mu, rng);
      return components_[i].sample(rng);
    }
  }
  throw std::logic_error("unreachable");
}

double ISFamily::log_likelihood_ratio(const Vector& x, const Vector& mu) const {
  switch (kind_) {
    case FamilyKind::ExponentialTilting:
      return -mu.dot(x) + cumulant(base_, mu).first;
    case FamilyKind::MeanTranslation:
      // -(Delta(x) - Delta(x - mu)), Delta the negative log-density
      if (base_.kind() == BaseKind::StandardNormal)
        return -0.5 * (x.squaredNorm() - (x - mu).squaredNorm());
      return -(std::abs(x(0)) - std::abs(x(0) - mu(0)));
    case FamilyKind::Mixture: {
      // l = (sum_i mu_i / l_i)^{-1}, accumulated in log space
      double best = -std::numeric_limits<double>::infinity();
      std::vector<double> terms;
      for (size_t i = 0; i < components_.size(); ++i) {
        if (mu(i) <= 0.0) continue;
        double t = std::log(mu(i)) - components_[i].log_likelihood_ratio(x);
        terms.push_back(t);
        best = std::max(best, t);
      }
      double acc = 0.0;
      for (double t : terms) acc += std::exp(t - best);
      return -(best + std::log(acc));
    }
  }
  throw std::logic_error("unreachable");
}

double ISFamily::likelihood_ratio(const Vector& x, const Vector& mu) const {
  return std::exp(log_likelihood_ratio(x, mu));
}

Vector ISFamily::likelihood_ratio_grad(const Vector& x, const Vector& mu) const {
  switch (kind_) {
    case FamilyKind::ExponentialTilting: {
      auto [phi, dphi] = cumulant(base_, mu);
      return (dphi - x) * std::exp(-mu.dot(x) + phi);
    }
    case FamilyKind::MeanTranslation: {
      double l = likelihood_ratio(x, mu);
      if (base_.kind() == BaseKind::StandardNormal) return -(x - mu) * l;
      double d = x(0) - mu(0);
      double sgn = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);  // subgradient 0 at the kink
      return Vector::Constant(1, -sgn * l);
    }
    case FamilyKind::Mixture: {
      double logl = log_likelihood_ratio(x, mu);
      Vector g(param_dim());
      for (size_t i = 0; i < components_.size(); ++i)
        g(i) = -std::exp(2.0 * logl - components_[i].log_likelihood_ratio(x));
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace aisopt
