#include "aisopt/linalg.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aisopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double row_tol(double b_i) { return 1e-9 * (1.0 + std::abs(b_i)); }

// min <g, x> + 1/2 ||x - x0||^2 s.t. A_S x = b_S for the row subset S,
// via the KKT system; the pseudoinverse absorbs degenerate/duplicated rows.
// Returns the stationary point, or nothing if the equality system is
// inconsistent.
std::optional<Vector> equality_qp(const Vector& g, const Vector& x0, const Matrix& A,
                                  const Vector& b, const std::vector<int>& subset) {
  Vector u = x0 - g;  // unconstrained minimizer
  if (subset.empty()) return u;
  const int k = static_cast<int>(subset.size());
  Matrix As(k, A.cols());
  Vector bs(k);
  for (int i = 0; i < k; ++i) {
    As.row(i) = A.row(subset[i]);
    bs(i) = b(subset[i]);
  }
  Matrix gram = As * As.transpose();
  Vector lambda = pseudoinverse(gram) * (As * u - bs);
  Vector x = u - As.transpose() * lambda;
  // Inconsistent subsets (e.g. parallel rows with different offsets) leave a
  // residual; skip them.
  if (((As * x - bs).cwiseAbs().array() > 1e-7 * (1.0 + bs.cwiseAbs().maxCoeff())).any())
    return std::nullopt;
  return x;
}

// Exhaustive active-subset enumeration: exact and O(2^p). Subsets are visited
// in ascending bitmask order, so ties break lexicographically.
std::optional<Vector> solve_polytope_qp(const Vector& g, const Vector& x0, const Matrix& A,
                                        const Vector& b) {
  const int p = static_cast<int>(b.size());
  if (p > 12)
    throw std::invalid_argument(
        "dual_average_step: exhaustive QP supports at most 12 non-box rows");
  std::optional<Vector> best;
  double best_val = kInf;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    std::vector<int> subset;
    for (int i = 0; i < p; ++i)
      if (mask & (1u << i)) subset.push_back(i);
    auto x = equality_qp(g, x0, A, b, subset);
    if (!x) continue;
    bool feasible = true;
    for (int i = 0; i < p; ++i)
      if (A.row(i).dot(*x) > b(i) + row_tol(b(i))) {
        feasible = false;
        break;
      }
    if (!feasible) continue;
    double val = g.dot(*x) + 0.5 * (*x - x0).squaredNorm();
    if (val < best_val - 1e-14) {
      best_val = val;
      best = x;
    }
  }
  return best;
}

}  // namespace

Matrix pseudoinverse(const Matrix& M) {
  if (!M.allFinite()) throw std::invalid_argument("pseudoinverse: non-finite input");
  if (M.rows() == 0 || M.cols() == 0) return Matrix::Zero(M.cols(), M.rows());
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cutoff = 1e-12 * (sv.size() > 0 ? sv(0) : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Projector projector_onto_nullspace(const Matrix& A_active, int s) {
  if (A_active.rows() == 0) return {Matrix::Identity(s, s)};
  if (A_active.cols() != s)
    throw std::invalid_argument("projector_onto_nullspace: column count mismatch");
  Matrix gram = A_active * A_active.transpose();
  Matrix P = Matrix::Identity(s, s) - A_active.transpose() * pseudoinverse(gram) * A_active;
  P = 0.5 * (P + P.transpose());  // keep exactly symmetric
  return {P};
}

Polytope Polytope::unconstrained(int s) {
  Polytope K;
  K.s_ = s;
  K.A_ = Matrix::Zero(0, s);
  K.b_ = Vector::Zero(0);
  K.box_ = true;
  K.box_lo_ = Vector::Constant(s, -kInf);
  K.box_hi_ = Vector::Constant(s, kInf);
  return K;
}

Polytope Polytope::box(const Vector& lo, const Vector& hi) {
  const int s = static_cast<int>(lo.size());
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int i = 0; i < s; ++i) {
    if (std::isfinite(hi(i))) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(s);
      r(i) = 1.0;
      rows.push_back(r);
      rhs.push_back(hi(i));
    }
    if (std::isfinite(lo(i))) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(s);
      r(i) = -1.0;
      rows.push_back(r);
      rhs.push_back(-lo(i));
    }
  }
  Matrix A(rows.size(), s);
  Vector b(rhs.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    A.row(i) = rows[i];
    b(i) = rhs[i];
  }
  return Polytope(std::move(A), std::move(b));
}

Polytope Polytope::box(double lo, double hi, int s) {
  return box(Vector::Constant(s, lo), Vector::Constant(s, hi));
}

Polytope::Polytope(Matrix A, Vector b, std::vector<std::string> row_names)
    : A_(std::move(A)), b_(std::move(b)), names_(std::move(row_names)) {
  if (A_.rows() != b_.size())
    throw std::invalid_argument("Polytope: A and b row counts differ");
  if (A_.cols() < 1) throw std::invalid_argument("Polytope: dimension must be >= 1");
  if (!A_.allFinite() || !b_.allFinite())
    throw std::invalid_argument("Polytope: non-finite entries");
  s_ = static_cast<int>(A_.cols());
  detect_box();
  // Feasibility witness: project the origin onto the set.
  if (box_) {
    for (int i = 0; i < s_; ++i)
      if (box_lo_(i) > box_hi_(i) + 1e-12)
        throw std::invalid_argument("Polytope: infeasible box bounds");
  } else {
    if (!solve_polytope_qp(Vector::Zero(s_), Vector::Zero(s_), A_, b_))
      throw std::invalid_argument("Polytope: no feasibility witness found");
  }
}

void Polytope::detect_box() {
  box_lo_ = Vector::Constant(s_, -kInf);
  box_hi_ = Vector::Constant(s_, kInf);
  for (int r = 0; r < rows(); ++r) {
    int nz = -1;
    for (int c = 0; c < s_; ++c) {
      if (A_(r, c) == 0.0) continue;
      if (nz >= 0 || (A_(r, c) != 1.0 && A_(r, c) != -1.0)) {
        box_ = false;
        return;
      }
      nz = c;
    }
    if (nz < 0) {  // all-zero row: 0 <= b, constant constraint
      if (b_(r) < 0) {
        box_ = false;
        return;
      }
      continue;
    }
    if (A_(r, nz) > 0)
      box_hi_(nz) = std::min(box_hi_(nz), b_(r));
    else
      box_lo_(nz) = std::max(box_lo_(nz), -b_(r));
  }
  box_ = true;
}

bool Polytope::contains(const Vector& x, double tol) const {
  for (int i = 0; i < rows(); ++i)
    if (A_.row(i).dot(x) > b_(i) + tol * (1.0 + std::abs(b_(i)))) return false;
  return true;
}

Matrix Polytope::active_rows(const std::vector<int>& idx) const {
  Matrix out(idx.size(), s_);
  for (size_t i = 0; i < idx.size(); ++i) out.row(i) = A_.row(idx[i]);
  return out;
}

Vector dual_average_step(const Vector& g_sum, const Vector& x0, const Polytope& K) {
  if (g_sum.size() != K.dim() || x0.size() != K.dim())
    throw std::invalid_argument("dual_average_step: dimension mismatch");
  if (K.is_box()) {
    Vector x = x0 - g_sum;
    for (int i = 0; i < x.size(); ++i)
      x(i) = std::min(std::max(x(i), K.box_lo_(i)), K.box_hi_(i));
    return x;
  }
  auto x = solve_polytope_qp(g_sum, x0, K.A(), K.b());
  if (!x) throw std::runtime_error("dual_average_step: no feasible minimizer found");
  return *x;
}

ActiveSet active_set(const Vector& x, const Polytope& K, double tol) {
  ActiveSet out;
  out.tol = tol;
  for (int i = 0; i < K.rows(); ++i) {
    double t = tol >= 0 ? tol : row_tol(K.b()(i));
    if (std::abs(K.A().row(i).dot(x) - K.b()(i)) <= t) out.indices.push_back(i);
  }
  return out;
}

}  // namespace aisopt
