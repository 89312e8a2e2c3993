#include "tensoraux/linalg.hpp"

#include "tensoraux/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace tensoraux {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ContractViolation(what);
}

}  // namespace

// ---------------------------------------------------------------------------
// MetricOperator

MetricOperator::MetricOperator(Index n, bool identity) : n_(n), identity_(identity) {}

MetricOperator MetricOperator::identity(Index n) {
  require(n >= 1, "metric dimension must be positive");
  MetricOperator m(n, true);
  m.B_ = Matrix::Identity(n, n);
  m.llt_.compute(m.B_);
  return m;
}

MetricOperator::MetricOperator(Matrix B) : n_(B.rows()), B_(std::move(B)) {
  require(B_.rows() == B_.cols() && n_ >= 1, "metric operator must be a nonempty square matrix");
  require(B_.allFinite(), "metric operator has non-finite entries");
  require(is_symmetric(B_), "metric operator is not symmetric");
  llt_.compute(B_);
  if (llt_.info() != Eigen::Success) throw ContractViolation("metric operator is not positive definite");
  const Matrix L = llt_.matrixL();
  for (Index i = 0; i < n_; ++i) {
    if (!(L(i, i) > 0.0)) throw ContractViolation("metric operator has a nonpositive pivot");
  }
  identity_ = B_.isIdentity(0.0);
}

void MetricOperator::require_dim(const Vector& v) const {
  if (v.size() != n_) {
    throw ContractViolation("dimension mismatch: expected " + std::to_string(n_) + ", got " +
                            std::to_string(v.size()));
  }
}

Vector MetricOperator::apply(const Vector& v) const {
  require_dim(v);
  return identity_ ? v : Vector(B_ * v);
}

Vector MetricOperator::solve(const Vector& s) const {
  require_dim(s);
  return identity_ ? s : Vector(llt_.solve(s));
}

double MetricOperator::primal_norm(const Vector& v) const {
  require_dim(v);
  if (identity_) return v.norm();
  return whiten_primal(v).norm();
}

double MetricOperator::dual_norm(const Vector& s) const {
  require_dim(s);
  if (identity_) return s.norm();
  return whiten_dual(s).norm();
}

double MetricOperator::inner(const Vector& u, const Vector& v) const {
  require_dim(u);
  require_dim(v);
  return identity_ ? u.dot(v) : u.dot(B_ * v);
}

Vector MetricOperator::whiten_primal(const Vector& v) const {
  require_dim(v);
  if (identity_) return v;
  return llt_.matrixU() * v;
}

Vector MetricOperator::unwhiten_primal(const Vector& w) const {
  require_dim(w);
  if (identity_) return w;
  return llt_.matrixU().solve(w);
}

Vector MetricOperator::whiten_dual(const Vector& s) const {
  require_dim(s);
  if (identity_) return s;
  return llt_.matrixL().solve(s);
}

Matrix MetricOperator::whiten_form(const SymForm2& M) const {
  require(M.rows() == n_ && M.cols() == n_, "symmetric form has wrong dimension");
  if (identity_) return M;
  const Matrix left = llt_.matrixL().solve(M);
  const Matrix both = llt_.matrixL().solve(left.transpose());
  return 0.5 * (both + both.transpose());
}

double MetricOperator::operator_norm(const SymForm2& M) const {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(whiten_form(M), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double MetricOperator::min_eigenvalue(const SymForm2& M) const {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(whiten_form(M), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

bool is_symmetric(const Matrix& M, double rel_tol) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Vector shifted_solve(const SymForm2& M, const MetricOperator& B, double t, const Vector& c) {
  require(t >= 0.0, "shift must be nonnegative");
  require(M.rows() == B.dim() && M.cols() == B.dim() && c.size() == B.dim(),
          "shifted_solve: dimension mismatch");
  const Matrix K = M + t * B.matrix();
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) throw SingularShift(t);
  Vector s = llt.solve(c);
  if (!s.allFinite()) throw SingularShift(t);
  const double residual = B.dual_norm(K * s - c);
  if (!(residual <= 1e-10 * std::max(1.0, B.dual_norm(c)))) throw SingularShift(t);
  return s;
}

// ---------------------------------------------------------------------------
// SymForm3

SymForm3 SymForm3::zero(Index n) {
  require(n >= 1, "form dimension must be positive");
  SymForm3 t;
  t.n_ = n;
  t.zero_ = true;
  return t;
}

SymForm3 SymForm3::from_action(Index n, Action action) {
  require(n >= 1, "form dimension must be positive");
  require(static_cast<bool>(action), "empty third-derivative action");
  SymForm3 t;
  t.n_ = n;
  t.action_ = std::move(action);
  return t;
}

namespace {

void check_dense_symmetry(Index n, const std::vector<double>& e) {
  if (static_cast<Index>(e.size()) != n * n * n) {
    throw ContractViolation("dense third-order form needs n^3 entries");
  }
  double scale = 1.0;
  for (double v : e) scale = std::max(scale, std::abs(v));
  auto at = [&](Index i, Index j, Index k) { return e[static_cast<std::size_t>((i * n + j) * n + k)]; };
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) {
        const double v = at(i, j, k);
        const double perms[] = {at(i, k, j), at(j, i, k), at(j, k, i), at(k, i, j), at(k, j, i)};
        for (double p : perms) {
          if (std::abs(p - v) > 1e-12 * scale) throw ContractViolation("dense third-order form is not symmetric");
        }
      }
}

}  // namespace

SymForm3 SymForm3::from_dense(Index n, std::vector<double> entries) {
  require(n >= 1, "form dimension must be positive");
  check_dense_symmetry(n, entries);
  SymForm3 t;
  t.n_ = n;
  t.dense_ = std::make_shared<const std::vector<double>>(std::move(entries));
  return t;
}

SymForm3 SymForm3::with_dense(std::vector<double> entries) const {
  check_dense_symmetry(n_, entries);
  SymForm3 t = *this;
  t.dense_ = std::make_shared<const std::vector<double>>(std::move(entries));
  return t;
}

Matrix SymForm3::apply(const Vector& h) const {
  if (h.size() != n_) throw ContractViolation("d3_apply: dimension mismatch");
  if (zero_) return Matrix::Zero(n_, n_);
  if (action_) return action_(h);
  return apply_dense(h);
}

Matrix SymForm3::apply_dense(const Vector& h) const {
  if (h.size() != n_) throw ContractViolation("d3_apply: dimension mismatch");
  if (zero_) return Matrix::Zero(n_, n_);
  if (!dense_) throw ContractViolation("form has no dense storage");
  Matrix out = Matrix::Zero(n_, n_);
  const auto& e = *dense_;
  for (Index i = 0; i < n_; ++i) {
    if (h(i) == 0.0) continue;
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k) out(j, k) += h(i) * e[static_cast<std::size_t>((i * n_ + j) * n_ + k)];
  }
  return out;
}

double SymForm3::cubic(const Vector& h) const {
  if (zero_) return 0.0;
  return h.dot(apply(h) * h);
}

double SymForm3::trilinear(const Vector& a, const Vector& b, const Vector& c) const {
  if (zero_) return 0.0;
  return b.dot(apply(a) * c);
}

SymForm3 SymForm3::minus(const SymForm3& other) const {
  require(other.n_ == n_, "forms of different dimension");
  if (other.zero_) return *this;
  SymForm3 lhs = *this;
  SymForm3 rhs = other;
  return from_action(n_, [lhs, rhs](const Vector& h) { return Matrix(lhs.apply(h) - rhs.apply(h)); });
}

// ---------------------------------------------------------------------------
// Norms of third-order forms

namespace {

struct SphereObjective {
  const SymForm3& T;
  const MetricOperator& B;

  double value(const Vector& w) const { return T.cubic(B.unwhiten_primal(w)); }
  // Gradient in whitened coordinates: 3 L^{-1} T[h] h.
  Vector gradient(const Vector& w) const {
    const Vector h = B.unwhiten_primal(w);
    return 3.0 * B.whiten_dual(T.apply(h) * h);
  }
};

double ascend_from(const SphereObjective& obj, Vector w) {
  w.normalize();
  double f = obj.value(w);
  double eta = 1.0;
  for (int it = 0; it < 300; ++it) {
    Vector g = obj.gradient(w);
    g -= g.dot(w) * w;
    if (g.norm() <= 1e-14 * std::max(1.0, std::abs(f))) break;
    bool improved = false;
    double f_new = f;
    Vector w_new;
    for (int bt = 0; bt < 60; ++bt) {
      w_new = (w + eta * g).normalized();
      f_new = obj.value(w_new);
      if (f_new > f) {
        improved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!improved) break;
    const double gain = f_new - f;
    w = w_new;
    f = f_new;
    eta *= 2.0;
    if (gain <= 1e-15 * std::max(1.0, std::abs(f))) break;
  }
  return f;
}

}  // namespace

double d3_norm_estimate(const SymForm3& T, const MetricOperator& B, int n_starts, std::uint64_t seed) {
  require(n_starts >= 1, "d3_norm_estimate needs at least one random start");
  require(T.dim() == B.dim(), "d3_norm_estimate: dimension mismatch");
  if (T.is_zero()) return 0.0;
  const Index n = T.dim();
  const SphereObjective obj{T, B};
  // T[-h]^3 = -T[h]^3, so max |T[h]^3| = max T[h]^3 over the sphere.
  double best = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vector w = Vector::Zero(n);
      w(i) = sign;
      best = std::max(best, ascend_from(obj, w));
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < n_starts; ++s) {
    Vector w(n);
    for (Index i = 0; i < n; ++i) w(i) = normal(rng);
    if (w.norm() == 0.0) continue;
    best = std::max(best, ascend_from(obj, w));
  }
  return best;
}

double d3_norm_upper(const SymForm3& T, const MetricOperator& B) {
  require(T.dim() == B.dim(), "d3_norm_upper: dimension mismatch");
  if (T.is_zero()) return 0.0;
  const Index n = T.dim();
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Vector h = B.unwhiten_primal(Vector::Unit(n, i));
    sum += B.whiten_form(T.apply(h)).squaredNorm();
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Cancellation-free power-norm differences

namespace {

// (1 + e)^a - 1 - a e for e >= -1.
double binomial_tail(double e, double a) {
  if (std::abs(e) < 0.25) {
    double term = a * (a - 1.0) / 2.0 * e * e;
    double sum = term;
    for (int k = 3; k < 200; ++k) {
      term *= (a - (k - 1)) / k * e;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::pow(1.0 + e, a) - 1.0 - a * e;
}

}  // namespace

double power_norm_difference(const MetricOperator& B, const Vector& s, const Vector& d, double q) {
  const Vector Bs = B.apply(s);
  const double v = s.dot(Bs);
  const double dd = B.inner(d, d);
  if (v == 0.0) return std::pow(dd, 0.5 * q);
  const double delta = 2.0 * Bs.dot(d) + dd;
  const double e = std::max(-1.0, delta / v);
  return std::pow(v, 0.5 * q) * std::expm1(0.5 * q * std::log1p(e));
}

double power_norm_bregman(const MetricOperator& B, const Vector& s, const Vector& d, double q) {
  const Vector Bs = B.apply(s);
  const double v = s.dot(Bs);
  const double dd = B.inner(d, d);
  if (v == 0.0) return std::pow(dd, 0.5 * q);
  const double a = 0.5 * q;
  const double delta = 2.0 * Bs.dot(d) + dd;
  const double e = std::max(-1.0, delta / v);
  return std::pow(v, a) * binomial_tail(e, a) + a * std::pow(v, a - 1.0) * dd;
}

}  // namespace tensoraux
