#include "tensoraux/tensor_model.hpp"

#include "detail/sampling.hpp"
#include "tensoraux/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace tensoraux {

ModelInstance::ModelInstance(OraclePtr oracle, Vector center, double H, std::optional<HolderInfo> holder,
                             std::optional<MetricOperator> metric)
    : oracle_(std::move(oracle)),
      center_(std::move(center)),
      H_(H),
      metric_(metric ? std::move(*metric) : MetricOperator::identity(center_.size())) {
  if (!oracle_) throw ContractViolation("model: null oracle");
  if (center_.size() != oracle_->dim()) throw ContractViolation("model: center has wrong dimension");
  if (metric_.dim() != center_.size()) throw ContractViolation("model: metric has wrong dimension");
  if (!(std::isfinite(H_) && H_ > 0.0)) throw ContractViolation("model: H must be positive");
  if (!center_.allFinite()) throw ContractViolation("model: non-finite center");
  holder_ = holder ? *holder : oracle_->holder();
  if (!(holder_.nu >= 0.0 && holder_.nu <= 1.0)) throw ContractViolation("model: nu must lie in [0, 1]");
  if (!(std::isfinite(holder_.H_f) && holder_.H_f >= 0.0)) {
    throw ContractViolation("model: H_f must be nonnegative");
  }
  f0_ = oracle_->value(center_);
  g0_ = oracle_->gradient(center_);
  H0_ = oracle_->hessian(center_);
  T0_ = oracle_->third(center_);
  if (!std::isfinite(f0_) || !g0_.allFinite() || !H0_.allFinite()) {
    throw ContractViolation("model: oracle returned non-finite derivatives at the center");
  }
}

void ModelInstance::require_dim(const Vector& y) const {
  if (y.size() != dim()) throw ContractViolation("model evaluated at a point of wrong dimension");
}

double ModelInstance::phi(const Vector& y) const {
  require_dim(y);
  const Vector s = y - center_;
  return f0_ + g0_.dot(s) + 0.5 * s.dot(H0_ * s) + T0_.cubic(s) / 6.0;
}

Vector ModelInstance::phi_grad(const Vector& y) const {
  require_dim(y);
  const Vector s = y - center_;
  return g0_ + H0_ * s + 0.5 * (T0_.apply(s) * s);
}

SymForm2 ModelInstance::phi_hess(const Vector& y) const {
  require_dim(y);
  return H0_ + T0_.apply(y - center_);
}

double ModelInstance::omega(const Vector& y) const {
  const double r = metric_.primal_norm(y - center_);
  return phi(y) + H_ / 6.0 * std::pow(r, q());
}

Vector ModelInstance::omega_grad(const Vector& y) const {
  const Vector s = y - center_;
  const double r = metric_.primal_norm(s);
  Vector g = phi_grad(y);
  if (r > 0.0) g += H_ * q() / 6.0 * std::pow(r, 1.0 + nu()) * metric_.apply(s);
  return g;
}

SymForm2 ModelInstance::omega_hess(const Vector& y) const {
  const Vector s = y - center_;
  const double r = metric_.primal_norm(s);
  SymForm2 M = phi_hess(y);
  if (r > 0.0) {
    const Vector Bs = metric_.apply(s);
    const double c = H_ * q() / 6.0;
    M += c * ((1.0 + nu()) * std::pow(r, nu() - 1.0) * (Bs * Bs.transpose()) +
              std::pow(r, 1.0 + nu()) * metric_.matrix());
  }
  return M;
}

double ModelInstance::omega_bregman(const Vector& y, const Vector& z) const {
  require_dim(y);
  require_dim(z);
  const Vector s = y - center_;
  const Vector d = z - y;
  const double quad = 0.5 * d.dot((H0_ + T0_.apply(s)) * d);
  return quad + T0_.cubic(d) / 6.0 + H_ / 6.0 * power_norm_bregman(metric_, s, d, q());
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::above: return "above";
    case Regime::at: return "at";
    case Regime::below: return "below";
  }
  return "unknown";
}

ModelConstants model_constants(double H_f, double nu, double H) {
  if (!(std::isfinite(H) && H > 0.0)) throw ContractViolation("model_constants: H must be positive");
  if (!(nu >= 0.0 && nu <= 1.0)) throw ContractViolation("model_constants: nu must lie in [0, 1]");
  if (!(std::isfinite(H_f) && H_f >= 0.0)) throw ContractViolation("model_constants: H_f must be nonnegative");

  ModelConstants c;
  c.convex_threshold = 2.0 * H_f;
  c.strong_threshold = 6.0 * H_f / (3.0 + nu);
  if (H_f == 0.0) {
    const double k = (3.0 + nu) * H / 6.0;
    c.L_H = std::max(1.0, k);
    c.mu_H = std::min(1.0, k);
    c.regime = Regime::above;
    return c;
  }

  const double S = c.strong_threshold;
  if (std::abs(H - S) <= 1e-12 * std::max(H, S)) {
    c.regime = Regime::at;
  } else {
    c.regime = H > S ? Regime::above : Regime::below;
  }
  double tau = std::pow((3.0 + nu) * H / (6.0 * H_f), 1.0 / (1.0 + nu));
  if (c.regime == Regime::at || std::abs(tau - 1.0) <= 1e-12) tau = 1.0;
  c.tau_H = tau;
  const double tn = std::pow(tau, nu);
  c.L_H = std::max((tau + 1.0) / tau, tn * (tau + 1.0) * H_f);
  if (tau >= 1.0) c.mu_H = std::min((tau - 1.0) / tau, tn * (tau - 1.0) * H_f);
  return c;
}

ModelNorms compute_norms(const ModelInstance& model, int n_starts, std::uint64_t seed) {
  ModelNorms n;
  n.grad_dual = model.metric().dual_norm(model.g0());
  n.hess = model.metric().operator_norm(model.H0());
  n.d3_estimate = d3_norm_estimate(model.T0(), model.metric(), n_starts, seed);
  n.d3_upper = d3_norm_upper(model.T0(), model.metric());
  return n;
}

namespace {

double d3_value(const ModelNorms& norms, NormPolicy policy) {
  return policy == NormPolicy::upper ? norms.d3_upper : norms.d3_estimate;
}

// The three derivative terms shared by the sublevel and coercive radii.
std::array<double, 3> derivative_terms(const ModelInstance& model, const ModelNorms& norms, NormPolicy policy) {
  if (model.nu() == 0.0) throw NotApplicable("radius bounds require nu > 0");
  const double H = model.H();
  return {std::sqrt(6.0 * norms.grad_dual / H), 3.0 * norms.hess / H,
          std::pow(3.0 + d3_value(norms, policy) / H, 1.0 / model.nu())};
}

}  // namespace

double sublevel_radius(const ModelInstance& model, const ModelNorms& norms, NormPolicy policy) {
  const auto t = derivative_terms(model, norms, policy);
  return std::max({1.0, t[0], t[1], t[2]});
}

DiagnosticBounds hessian_bounds(const ModelInstance& model, const ModelNorms& norms, std::optional<double> R0,
                                NormPolicy policy) {
  DiagnosticBounds b;
  b.q = model.q();
  b.sigma_q = std::pow(2.0, -(1.0 + model.nu()));
  if (R0) {
    if (!(*R0 >= 1.0 && std::isfinite(*R0))) throw ContractViolation("hessian_bounds: R0 must be >= 1");
    b.N_x = norms.hess + 12.0 * *R0 * *R0;
  }
  if (model.nu() > 0.0) {
    const double D = sublevel_radius(model, norms, policy);
    b.D = D;
    b.N_hat = norms.hess + (2.0 + model.nu()) * D * D;
    b.F_x = D * (norms.grad_dual + 0.5 * norms.hess * D + d3_value(norms, policy) * D * D);
  }
  return b;
}

double coercive_radius(const ModelInstance& model, const ModelNorms& norms, double A, NormPolicy policy) {
  const auto t = derivative_terms(model, norms, policy);
  const double lead = std::cbrt(6.0 * std::max(A - model.f0(), 0.0) / model.H());
  return std::max({lead, t[0], t[1], t[2]});
}

ConvexityReport convexity_check(const ModelInstance& model, int n_samples, std::uint64_t seed,
                                std::optional<double> radius) {
  if (n_samples < 1) throw ContractViolation("convexity_check: n_samples must be >= 1");
  const MetricOperator& B = model.metric();
  double rad = 1.0;
  if (radius) {
    rad = *radius;
  } else if (model.nu() > 0.0) {
    rad = sublevel_radius(model, compute_norms(model, 8, seed));
  }
  if (!(rad > 0.0)) throw ContractViolation("convexity_check: radius must be positive");

  const ModelConstants c = model_constants(model.H_f(), model.nu(), model.H());
  std::vector<double> taus = {0.5, 1.0, 2.0};
  if (std::isfinite(c.tau_H)) taus.push_back(c.tau_H);

  ConvexityReport rep;
  rep.samples = n_samples;
  rep.convexity_expected = model.H() >= c.convex_threshold;
  detail::Rng rng(seed);
  for (int k = 0; k < n_samples; ++k) {
    const Vector y = detail::in_metric_ball(rng, B, model.center(), rad);
    const double lam = B.min_eigenvalue(model.omega_hess(y));
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, lam);
    if (lam < -1e-8) ++rep.negative_eigenvalues;

    const Vector s = y - model.center();
    const double r = B.primal_norm(s);
    const Matrix Ts = model.T0().apply(s);
    for (double tau : taus) {
      const Matrix bound = model.H0() / tau +
                           std::pow(tau, model.nu()) * model.H_f() * std::pow(r, 1.0 + model.nu()) * B.matrix();
      for (double sign : {1.0, -1.0}) {
        const double m = B.min_eigenvalue(bound - sign * Ts);
        rep.worst_sandwich = std::min(rep.worst_sandwich, m);
        ++rep.sandwich_checks;
        if (m < -1e-8) ++rep.sandwich_violations;
      }
    }
  }
  return rep;
}

}  // namespace tensoraux
