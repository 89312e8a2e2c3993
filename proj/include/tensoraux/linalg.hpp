#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace tensoraux {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Symmetric bilinear form mapping primal vectors to dual vectors
/// (Hessians, D3f(x)[h], ...). Stored densely.
using SymForm2 = Matrix;

/// Self-adjoint positive-definite operator B defining the primal norm
/// ||x|| = <Bx, x>^{1/2} and the conjugate dual norm ||s||_* = <s, B^{-1}s>^{1/2}.
///
/// The Cholesky factor B = L L^T is cached at construction; "whitened"
/// coordinates below are w = L^T x for primal vectors and L^{-1} s for duals,
/// in which both norms become Euclidean.
class MetricOperator {
 public:
  static MetricOperator identity(Index n);

  /// Validates symmetry (1e-12 relative) and strict positive-definiteness.
  explicit MetricOperator(Matrix B);

  Index dim() const noexcept { return n_; }
  bool is_identity() const noexcept { return identity_; }
  const Matrix& matrix() const noexcept { return B_; }

  Vector apply(const Vector& v) const;  // B v
  Vector solve(const Vector& s) const;  // B^{-1} s

  double primal_norm(const Vector& v) const;
  double dual_norm(const Vector& s) const;
  double inner(const Vector& u, const Vector& v) const;  // <Bu, v>

  Vector whiten_primal(const Vector& v) const;    // L^T v
  Vector unwhiten_primal(const Vector& w) const;  // L^{-T} w
  Vector whiten_dual(const Vector& s) const;      // L^{-1} s

  /// L^{-1} M L^{-T}: the matrix of a symmetric form in whitened coordinates.
  Matrix whiten_form(const SymForm2& M) const;

  /// max_{||h||=1} ||M h||_* for symmetric M.
  double operator_norm(const SymForm2& M) const;
  /// Smallest eigenvalue of M relative to B (min <Mh,h> over ||h|| = 1).
  double min_eigenvalue(const SymForm2& M) const;

 private:
  MetricOperator(Index n, bool identity);
  void require_dim(const Vector& v) const;

  Index n_ = 0;
  bool identity_ = false;
  Matrix B_;
  Eigen::LLT<Matrix> llt_;
};

/// Checks ||M - M^T||_max <= tol * max(1, ||M||_max).
bool is_symmetric(const Matrix& M, double rel_tol = 1e-12);

/// Solves (M + tB)s = c by Cholesky. Throws SingularShift when M + tB is not
/// numerically positive definite or the residual exceeds
/// 1e-10 * max(1, ||c||_*).
Vector shifted_solve(const SymForm2& M, const MetricOperator& B, double t, const Vector& c);

/// Symmetric trilinear form T[h1, h2, h3]. The primary representation is the
/// directional action h -> T[h] (an n x n symmetric matrix); a dense n^3
/// array may be attached for small n and cross-checks.
class SymForm3 {
 public:
  using Action = std::function<Matrix(const Vector&)>;

  static SymForm3 zero(Index n);
  static SymForm3 from_action(Index n, Action action);
  /// Row-major entries T(i,j,k) at i*n*n + j*n + k; must be fully symmetric.
  static SymForm3 from_dense(Index n, std::vector<double> entries);

  /// Same form with a dense copy attached (checked against the action).
  SymForm3 with_dense(std::vector<double> entries) const;

  Index dim() const noexcept { return n_; }
  bool is_zero() const noexcept { return zero_; }
  bool has_dense() const noexcept { return static_cast<bool>(dense_); }
  bool has_action() const noexcept { return static_cast<bool>(action_); }

  /// T[h], with <T[h]u, u> = T[h, u, u].
  Matrix apply(const Vector& h) const;
  Matrix apply_dense(const Vector& h) const;
  double cubic(const Vector& h) const;  // T[h]^3
  double trilinear(const Vector& a, const Vector& b, const Vector& c) const;

  /// Action of this - other.
  SymForm3 minus(const SymForm3& other) const;

 private:
  Index n_ = 0;
  bool zero_ = false;
  Action action_;
  std::shared_ptr<const std::vector<double>> dense_;
};

/// D3f(x)[h] for a third-derivative form.
inline Matrix d3_apply(const SymForm3& T, const Vector& h) { return T.apply(h); }

/// Lower estimate of ||T|| = max_{||h||<=1} |T[h]^3| by multistart projected
/// ascent on the unit sphere from every +-coordinate direction (whitened)
/// plus `n_starts` seeded random directions. Nondecreasing in n_starts for a
/// fixed seed.
double d3_norm_estimate(const SymForm3& T, const MetricOperator& B, int n_starts,
                        std::uint64_t seed = 42);

/// Upper bound on ||T||: Frobenius norm of T in whitened coordinates.
double d3_norm_upper(const SymForm3& T, const MetricOperator& B);

/// ||s + d||^q - ||s||^q, evaluated without cancellation when d is small
/// relative to s.
double power_norm_difference(const MetricOperator& B, const Vector& s, const Vector& d, double q);

/// Bregman distance of h(s) = ||s||^q between s and s + d:
/// ||s + d||^q - ||s||^q - q ||s||^{q-2} <Bs, d>, cancellation-free.
double power_norm_bregman(const MetricOperator& B, const Vector& s, const Vector& d, double q);

}  // namespace tensoraux
