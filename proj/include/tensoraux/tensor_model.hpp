#pragma once

#include "tensoraux/linalg.hpp"
#include "tensoraux/oracle.hpp"

#include <cstdint>
#include <limits>
#include <optional>

namespace tensoraux {

/// Regularized third-order model of f at a center x:
///   Phi(y)   = f(x) + <g0, s> + 1/2 <H0 s, s> + 1/6 T0[s]^3,   s = y - x,
///   Omega(y) = Phi(y) + (H/6) ||s||^{3+nu}.
/// Derivatives of f at x are evaluated once at construction.
class ModelInstance {
 public:
  /// `holder` overrides the oracle's Hoelder metadata; the metric defaults to
  /// the identity.
  ModelInstance(OraclePtr oracle, Vector center, double H,
                std::optional<HolderInfo> holder = std::nullopt,
                std::optional<MetricOperator> metric = std::nullopt);

  Index dim() const noexcept { return center_.size(); }
  const OraclePtr& oracle() const noexcept { return oracle_; }
  const Vector& center() const noexcept { return center_; }
  double H() const noexcept { return H_; }
  double nu() const noexcept { return holder_.nu; }
  double H_f() const noexcept { return holder_.H_f; }
  double q() const noexcept { return 3.0 + holder_.nu; }
  const HolderInfo& holder() const noexcept { return holder_; }
  const MetricOperator& metric() const noexcept { return metric_; }

  double f0() const noexcept { return f0_; }
  const Vector& g0() const noexcept { return g0_; }
  const SymForm2& H0() const noexcept { return H0_; }
  const SymForm3& T0() const noexcept { return T0_; }

  double phi(const Vector& y) const;
  Vector phi_grad(const Vector& y) const;
  SymForm2 phi_hess(const Vector& y) const;

  double omega(const Vector& y) const;
  Vector omega_grad(const Vector& y) const;
  /// At y = x the rank-one part of the regularizer Hessian is taken as 0, so
  /// the regularizer contributes nothing there (its r -> 0 limit for nu > 0).
  SymForm2 omega_hess(const Vector& y) const;

  /// Omega(z) - Omega(y) - <grad Omega(y), z - y>, evaluated from the
  /// polynomial structure without subtracting nearby values.
  double omega_bregman(const Vector& y, const Vector& z) const;

 private:
  void require_dim(const Vector& y) const;

  OraclePtr oracle_;
  Vector center_;
  double H_;
  HolderInfo holder_;
  MetricOperator metric_;
  double f0_ = 0.0;
  Vector g0_;
  SymForm2 H0_;
  SymForm3 T0_;
};

enum class Regime { above, at, below };

const char* regime_name(Regime r);

struct ModelConstants {
  double tau_H = std::numeric_limits<double>::infinity();
  double L_H = 0.0;
  std::optional<double> mu_H;  // present iff tau_H >= 1
  double convex_threshold = 0.0;  // 2 H_f
  double strong_threshold = 0.0;  // 6 H_f / (3 + nu)
  Regime regime = Regime::above;  // H relative to strong_threshold
};

/// tau_H = [(3+nu) H / (6 H_f)]^{1/(1+nu)},
/// L_H = max{(tau+1)/tau, tau^nu (tau+1) H_f},
/// mu_H = min{(tau-1)/tau, tau^nu (tau-1) H_f} for tau >= 1.
/// For H_f = 0: L_H = max{1, (3+nu)H/6}, mu_H = min{1, (3+nu)H/6}.
/// tau within 1e-12 of 1 is treated as exactly 1.
ModelConstants model_constants(double H_f, double nu, double H);

/// Norms of the derivatives of f at the center, measured in the model metric.
struct ModelNorms {
  double grad_dual = 0.0;
  double hess = 0.0;
  double d3_estimate = 0.0;  // lower estimate (multistart ascent)
  double d3_upper = 0.0;     // whitened Frobenius norm, an upper bound
};

ModelNorms compute_norms(const ModelInstance& model, int n_starts = 8, std::uint64_t seed = 42);

/// Which value of ||D3f(x)|| enters radii and bounds.
enum class NormPolicy { estimated, upper };

/// D_{x,H} = max{1, [6||g0||_*/H]^{1/2}, 3||H0||/H, [3 + ||T0||/H]^{1/nu}}.
/// Throws NotApplicable for nu = 0.
double sublevel_radius(const ModelInstance& model, const ModelNorms& norms,
                       NormPolicy policy = NormPolicy::estimated);

struct DiagnosticBounds {
  std::optional<double> D;      // D_{x,H}
  std::optional<double> N_hat;  // ||H0|| + (2+nu) D^2
  std::optional<double> N_x;    // ||H0|| + 12 R0^2
  std::optional<double> F_x;    // D [||g0||_* + 1/2 ||H0|| D + ||T0|| D^2]
  double sigma_q = 0.0;         // 2^{-(1+nu)}
  double q = 0.0;               // 3 + nu
};

/// D, N_hat and F_x are absent for nu = 0; N_x is present iff R0 is given.
DiagnosticBounds hessian_bounds(const ModelInstance& model, const ModelNorms& norms,
                                std::optional<double> R0 = std::nullopt,
                                NormPolicy policy = NormPolicy::estimated);

/// Radius beyond which Omega(y) > A:
/// max{[6 max(A - f(x), 0)/H]^{1/3}, [6||g0||_*/H]^{1/2}, 3||H0||/H, [3 + ||T0||/H]^{1/nu}}.
double coercive_radius(const ModelInstance& model, const ModelNorms& norms, double A,
                       NormPolicy policy = NormPolicy::estimated);

struct ConvexityReport {
  int samples = 0;
  bool convexity_expected = false;  // H >= 2 H_f
  double min_eigenvalue = std::numeric_limits<double>::infinity();  // of Hess Omega, B-relative
  int negative_eigenvalues = 0;     // samples with min eigenvalue < -1e-8
  int sandwich_checks = 0;
  int sandwich_violations = 0;
  double worst_sandwich = std::numeric_limits<double>::infinity();

  bool ok() const { return sandwich_violations == 0 && (!convexity_expected || negative_eigenvalues == 0); }
};

/// Samples y uniformly in the ball of `radius` (default D_{x,H}, or 1 when
/// nu = 0) around x. Records the smallest eigenvalue of Hess Omega(y) and
/// checks +-T0[y-x] <= (1/tau) H0 + tau^nu H_f ||y-x||^{1+nu} B for
/// tau in {0.5, 1, 2, tau_H}.
ConvexityReport convexity_check(const ModelInstance& model, int n_samples, std::uint64_t seed = 42,
                                std::optional<double> radius = std::nullopt);

}  // namespace tensoraux
