#pragma once

// Small dense linear algebra and polytope machinery: Moore-Penrose
// pseudoinverse, orthogonal projectors onto active-constraint null spaces,
// the dual-averaging proximal step (a strictly convex QP over a polytope),
// and active-set detection.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace aisopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Feasible set {x : Ax <= b}. Zero rows means the whole space.
// Construction verifies a feasibility witness exists (by solving the proximal
// step with zero gradient from the origin) and throws std::invalid_argument
// otherwise.
class Polytope {
public:
  // Unconstrained R^s.
  static Polytope unconstrained(int s);
  // Coordinate box [lo_i, hi_i]; use +-infinity to drop a side.
  static Polytope box(const Vector& lo, const Vector& hi);
  static Polytope box(double lo, double hi, int s = 1);
  Polytope(Matrix A, Vector b, std::vector<std::string> row_names = {});

  int dim() const { return s_; }
  int rows() const { return static_cast<int>(b_.size()); }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  const std::vector<std::string>& row_names() const { return names_; }

  bool is_box() const { return box_; }
  bool contains(const Vector& x, double tol = 1e-9) const;

  // Rows of A restricted to the given index set (s columns preserved).
  Matrix active_rows(const std::vector<int>& idx) const;

private:
  Polytope() = default;
  void detect_box();
  Matrix A_;
  Vector b_;
  std::vector<std::string> names_;
  int s_ = 0;
  bool box_ = false;
  Vector box_lo_, box_hi_;  // valid when box_
  friend Vector dual_average_step(const Vector&, const Vector&, const Polytope&);
};

struct ActiveSet {
  std::vector<int> indices;  // sorted row indices of tight constraints
  double tol = 0.0;
};

struct Projector {
  Matrix P;  // symmetric, idempotent
};

// Moore-Penrose inverse via SVD; singular values below 1e-12 * sigma_max are
// treated as zero. Throws std::invalid_argument on non-finite input.
Matrix pseudoinverse(const Matrix& M);

// P = I - A_a^T (A_a A_a^T)^+ A_a; identity when A_active has zero rows.
Projector projector_onto_nullspace(const Matrix& A_active, int s);

// argmin_{x in K} <g_sum, x> + 1/2 ||x - x0||^2, solved exactly.
// Unconstrained: x0 - g_sum. Box: coordinate clipping in O(s). General
// polytope: exhaustive active-subset enumeration over the KKT systems —
// exact but O(2^p), intended for the small instances here (p <= 12).
Vector dual_average_step(const Vector& g_sum, const Vector& x0, const Polytope& K);

// Rows i with |<A_i, x> - b_i| <= tol. tol < 0 selects the per-row default
// 1e-9 * (1 + |b_i|).
ActiveSet active_set(const Vector& x, const Polytope& K, double tol = -1.0);

}  // namespace aisopt
