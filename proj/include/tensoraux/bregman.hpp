#pragma once

#include "tensoraux/linalg.hpp"
#include "tensoraux/tensor_model.hpp"

#include <cstdint>
#include <functional>

namespace tensoraux {

class SimpleFunction;

struct CompositeStep {
  Vector z;
  /// Multiplier of the active constraint (ball: lambda with
  /// g + M(grad rho(z) - grad rho(y)) + lambda B(z - c) = 0); 0 otherwise.
  double multiplier = 0.0;
};

/// Reference function rho(y) = 1/2 <H0 s, s> + ||s||^{3+nu} / (3+nu), s = y - x,
/// and the Bregman steps it induces.
///
/// H0 is diagonalized once in whitened coordinates (A = L^{-1} H0 L^{-T} =
/// Q diag(lambda) Q^T), which turns every step into a scalar equation in
/// r = ||z - x||.
class Geometry {
 public:
  /// H0 must be PSD up to -1e-10 max(1, lambda_max).
  Geometry(Vector center, SymForm2 H0, double nu, MetricOperator metric);
  static Geometry from_model(const ModelInstance& model);

  Index dim() const noexcept { return center_.size(); }
  const Vector& center() const noexcept { return center_; }
  const SymForm2& H0() const noexcept { return H0_; }
  double nu() const noexcept { return nu_; }
  double q() const noexcept { return 3.0 + nu_; }
  const MetricOperator& metric() const noexcept { return metric_; }

  double rho(const Vector& y) const;
  Vector rho_grad(const Vector& y) const;
  SymForm2 rho_hess(const Vector& y) const;

  /// beta(u, v) = rho(v) - rho(u) - <grad rho(u), v - u>, cancellation-free.
  double bregman(const Vector& u, const Vector& v) const;

  /// argmin_z <g, z - y> + M beta(y, z), i.e. the solution of
  /// grad rho(z) = grad rho(y) - g / M. Returns y itself when g = 0.
  Vector step(const Vector& y, const Vector& g, double M) const;

  /// argmin_z <g, z - y> + M beta(y, z) + phi(z).
  CompositeStep composite_step(const Vector& y, const Vector& g, double M, const SimpleFunction& phi) const;

  /// Solves grad rho(z) + kappa B(z - anchor) = c for z.
  Vector solve_gradient_equation(const Vector& c, double kappa = 0.0, const Vector* anchor = nullptr) const;

 private:
  void require_dim(const Vector& v) const;
  Vector polish(Vector z, const Vector& c, double kappa, const Vector* anchor) const;

  Vector center_;
  SymForm2 H0_;
  double nu_;
  MetricOperator metric_;
  Matrix Q_;       // eigenvectors of the whitened H0
  Vector lambda_;  // eigenvalues, clamped at 0
};

/// The simple convex term of a composite problem.
class SimpleFunction {
 public:
  enum class Kind { zero, ball, custom };
  using Eval = std::function<double(const Vector&)>;
  using Solver = std::function<CompositeStep(const Geometry&, const Vector& y, const Vector& g, double M)>;

  static SimpleFunction zero();
  /// Indicator of {z : ||z - center|| <= R} in the metric of the geometry.
  static SimpleFunction ball(Vector center, double R);
  /// `eval` returns +inf outside the domain; `solver` computes composite steps.
  static SimpleFunction custom(Eval eval, Solver solver = {});

  Kind kind() const noexcept { return kind_; }
  bool can_step() const noexcept { return kind_ != Kind::custom || static_cast<bool>(solver_); }
  const Vector& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  const Solver& solver() const noexcept { return solver_; }

  double eval(const Vector& y, const MetricOperator& B) const;

 private:
  Kind kind_ = Kind::zero;
  Vector center_;
  double radius_ = 0.0;
  Eval eval_;
  Solver solver_;
};

/// Element s of the subdifferential of phi at y minimizing ||grad + s||_*
/// (0 for custom phi).
Vector stationarity_subgradient(const SimpleFunction& phi, const Vector& y, const Vector& grad,
                                const MetricOperator& B);

/// Whether s is a subgradient of phi at y. Exact membership tests for zero
/// and ball (tolerance 1e-8); custom phi is probed at 100 points:
/// phi(v) >= phi(y) + <s, v - y> - 1e-8.
bool subgradient_check(const SimpleFunction& phi, const Vector& y, const Vector& s, const MetricOperator& B,
                       std::uint64_t seed = 42);

/// Slack of the three-point inequality for a step z from (y, g, M):
///   l(w) + beta(y, w) - [l(z) + beta(y, z) + beta(z, w)],
/// with l(w) = (<g, w - y> + phi(w)) / M. Nonnegative up to roundoff.
double three_point_gap(const Geometry& geo, const Vector& y, const Vector& g, double M, const Vector& z,
                       const Vector& w, const SimpleFunction& phi);

}  // namespace tensoraux
