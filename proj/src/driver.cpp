#include "tensoraux/driver.hpp"

#include "detail/sampling.hpp"
#include "tensoraux/invariants.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <future>
#include <limits>

namespace tensoraux {

namespace {

using nlohmann::json;

void require(bool ok, const char* what) {
  if (!ok) throw ContractViolation(what);
}

void require_point(const OraclePtr& oracle, const Vector& x) {
  require(static_cast<bool>(oracle), "null oracle");
  require(x.size() == oracle->dim(), "point and oracle dimensions differ");
  require(x.allFinite(), "non-finite point");
}

double slack(double v) { return 1e-12 * std::max(1.0, std::abs(v)); }

}  // namespace

void validate(const OuterConfig& cfg) {
  require(std::isfinite(cfg.H) && cfg.H > 0.0, "H must be positive");
  require(std::isfinite(cfg.theta) && cfg.theta > 0.0, "theta must be positive");
  require(cfg.eps > 0.0 && cfg.eps < 1.0, "eps must lie in (0, 1)");
  require(std::isfinite(cfg.L0) && cfg.L0 > 0.0, "L0 must be positive");
  require(!cfg.R0 || (std::isfinite(*cfg.R0) && *cfg.R0 >= 1.0), "R0 must be >= 1");
  require(cfg.max_inner >= 1, "max_inner must be >= 1");
}

OraclePtr builtin_oracle(const std::string& spec, Index n) {
  constexpr double kReg = 1e-2;
  if (spec.rfind("csv:", 0) == 0) return make_logistic(load_dataset_csv(spec.substr(4)), kReg);
  require(n >= 1, "dimension must be >= 1");
  if (spec == "quadratic") {
    Matrix A = 2.0 * Matrix::Identity(n, n);
    for (Index i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = -0.5;
    return make_quadratic(std::move(A), -Vector::Ones(n));
  }
  if (spec == "separable_quartic" || spec == "quartic") return make_separable_quartic(Vector::Ones(n));
  if (spec == "log_sum_exp" || spec == "lse") {
    const Index m = 2 * n + 1;
    Matrix A(m, n);
    Vector b(m);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < n; ++j) A(i, j) = std::sin(0.7 * (i + 1) + 1.3 * (i + 1) * (j + 1));
      b(i) = 0.1 * std::cos(static_cast<double>(i));
    }
    return make_log_sum_exp(std::move(A), std::move(b), 1.0);
  }
  if (spec == "logistic") {
    const Index m = 4 * n;
    Dataset data{Matrix(m, n), Vector(m)};
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < n; ++j) data.features(i, j) = std::cos(0.9 * (i + 1) * (j + 1) + 0.4 * j);
      data.labels(i) = (i * 7 + 3) % 5 < 2 ? -1.0 : 1.0;
    }
    return make_logistic(std::move(data), kReg);
  }
  throw ContractViolation("unknown oracle '" + spec + "'");
}

Vector default_center(const OraclePtr& oracle) {
  require(static_cast<bool>(oracle), "null oracle");
  if (oracle->name() == "logistic") return Vector::Zero(oracle->dim());
  return Vector::Ones(oracle->dim());
}

const char* outer_status_name(OuterStatus s) {
  return s == OuterStatus::model_point ? "model_point" : "f_stationary";
}

namespace {

// Shared tail of both outer_step variants: asserts the acceptance pair.
OuterStep finish_outer(IterationTrace trace, const Vector& x, double f_x, double model_value, double residual,
                       double nu, double theta) {
  OuterStep out;
  out.x_plus = trace.terminal();
  out.f_x = f_x;
  out.model_value = model_value;
  out.residual = residual;
  out.residual_bound = theta * std::pow((out.x_plus - x).norm(), 2.0 + nu);
  out.status = trace.status == TerminalStatus::inexact_accepted ? OuterStatus::model_point : OuterStatus::f_stationary;
  out.inner = std::move(trace);
  if (!(out.model_value <= f_x + slack(f_x))) {
    throw AssertionFailure("outer step: model value " + std::to_string(out.model_value) + " above f(x) = " +
                           std::to_string(f_x));
  }
  if (out.status == OuterStatus::model_point && !(out.residual <= out.residual_bound * (1.0 + 1e-12))) {
    throw AssertionFailure("outer step: model residual " + std::to_string(out.residual) + " above theta r^{2+nu} = " +
                           std::to_string(out.residual_bound));
  }
  return out;
}

OuterStep stationary_exit(const Vector& x, double f_x, double residual) {
  OuterStep out;
  out.x_plus = x;
  out.status = OuterStatus::f_stationary;
  out.f_x = out.model_value = f_x;
  out.residual = residual;
  out.inner.status = TerminalStatus::f_stationary;
  return out;
}

}  // namespace

OuterStep outer_step(const OraclePtr& oracle, const Vector& x, const OuterConfig& cfg) {
  validate(cfg);
  require_point(oracle, x);
  const ModelInstance model(oracle, x, cfg.H);
  const MetricOperator& B = model.metric();
  const double f_x = model.f0();
  const double g_norm = B.dual_norm(model.g0());
  if (g_norm <= cfg.eps) return stationary_exit(x, f_x, g_norm);

  const Geometry geo = Geometry::from_model(model);
  IterationTrace trace =
      solve_adaptive(model, geo, x, cfg.L0, {InexactModel{cfg.theta, cfg.eps}, MaxIters{cfg.max_inner}});
  if (trace.status == TerminalStatus::budget_exhausted) throw InnerBudgetExhausted(std::move(trace));
  const Vector& y = trace.terminal();
  const double value = model.omega(y);
  const double residual = B.dual_norm(model.omega_grad(y));
  return finish_outer(std::move(trace), x, f_x, value, residual, model.nu(), cfg.theta);
}

OuterStep outer_step(const OraclePtr& oracle, const Vector& x, const OuterConfig& cfg, const SimpleFunction& phi) {
  if (phi.kind() == SimpleFunction::Kind::zero) return outer_step(oracle, x, cfg);
  validate(cfg);
  require_point(oracle, x);
  const ModelInstance model(oracle, x, cfg.H);
  const MetricOperator& B = model.metric();
  const double phi_x = phi.eval(x, B);
  require(std::isfinite(phi_x), "outer step: x outside the domain of phi");
  const double f_x = model.f0() + phi_x;
  const Vector s = stationarity_subgradient(phi, x, model.g0(), B);
  const double g_norm = B.dual_norm(model.g0() + s);
  if (g_norm <= cfg.eps) return stationary_exit(x, f_x, g_norm);

  const Geometry geo = Geometry::from_model(model);
  IterationTrace trace =
      solve_fixed_composite(model, geo, phi, x, {CompositeInexact{cfg.theta, cfg.eps}, MaxIters{cfg.max_inner}});
  if (trace.status == TerminalStatus::budget_exhausted) throw InnerBudgetExhausted(std::move(trace));
  const Vector& y = trace.terminal();
  const double value = model.omega(y) + phi.eval(y, B);
  const double residual = B.dual_norm(model.omega_grad(y) + trace.gphi.back());
  return finish_outer(std::move(trace), x, f_x, value, residual, model.nu(), cfg.theta);
}

std::vector<CertificateRecord> certify_trace(const ModelInstance& model, const IterationTrace& trace, double eps,
                                             double L0, std::optional<double> R0, std::uint64_t seed) {
  const ModelNorms norms = compute_norms(model, 8, seed);
  const CertificateInputs in = certificate_inputs(model, norms, L0, eps, R0);
  std::vector<CertificateRecord> out;
  for (Theorem t : applicable_theorems(in, trace.composite)) {
    Certificate cert = certificate(t, in);
    CertificateCheck check = certificate_check(trace, cert);
    out.push_back({std::move(cert), std::move(check)});
  }
  return out;
}

namespace {

bool all_pass(const std::vector<CertificateRecord>& records) {
  for (const auto& r : records) {
    if (!r.check.passed()) return false;
  }
  return true;
}

}  // namespace

bool RunReport::passed() const {
  for (const auto& row : rows) {
    if (row.invariant_violations > 0 || !all_pass(row.certificates)) return false;
  }
  return true;
}

RunReport minimize(const OraclePtr& oracle, const Vector& x0, const OuterConfig& cfg) {
  validate(cfg);
  require_point(oracle, x0);
  const auto start = std::chrono::steady_clock::now();
  const bool monotone = cfg.H >= oracle->holder().H_f;

  RunReport rep;
  Vector x = x0;
  for (std::size_t k = 0;; ++k) {
    OuterRecord rec;
    rec.k = k;
    rec.x = x;
    rec.f = oracle->value(x);
    rec.grad_norm = oracle->gradient(x).norm();
    if (k > 0 && monotone && rec.f > rep.rows.back().f + slack(rep.rows.back().f)) {
      throw AssertionFailure("minimize: f increased at outer iteration " + std::to_string(k));
    }
    if (rec.grad_norm <= cfg.eps || k >= cfg.max_outer) {
      rep.status = rec.grad_norm <= cfg.eps ? "f_stationary" : "budget_exhausted";
      rep.rows.push_back(std::move(rec));
      break;
    }

    OuterStep step = outer_step(oracle, x, cfg);
    rec.inner_iterations = step.inner.steps();
    rec.inner_status = status_name(step.inner.status);
    if (!step.inner.rows.empty()) {
      const ModelInstance model(oracle, x, cfg.H);
      const double eps = step.inner.threshold.value_or(cfg.eps);
      rec.certificates = certify_trace(model, step.inner, eps, cfg.L0, cfg.R0, cfg.seed);
      const InvariantReport inv = verify_adaptive_trace(model, Geometry::from_model(model), step.inner);
      rec.invariant_checks = inv.checks;
      rec.invariant_violations = inv.violations;
    }
    rep.rows.push_back(std::move(rec));
    rep.traces.push_back(std::move(step.inner));
    x = std::move(step.x_plus);
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

bool BenchRow::passed() const {
  return invariant_violations == 0 && (!certificate || certificate->check.passed());
}

namespace {

BenchRow bench_one(const OraclePtr& oracle, const Vector& x, double H, double eps, double L0, std::uint64_t seed) {
  const ModelInstance model(oracle, x, H);
  const Geometry geo = Geometry::from_model(model);
  BenchRow row;
  row.H = H;
  row.regime = model_constants(model.H_f(), model.nu(), H).regime;
  row.trace = solve_adaptive(model, geo, x, L0, {GradTol{eps}});
  row.iterations = row.trace.steps();

  const Theorem theorem = row.regime == Regime::above ? Theorem::T5_1
                          : row.regime == Regime::at  ? Theorem::T3_10b
                                                      : Theorem::T3_10a;
  const CertificateInputs in = certificate_inputs(model, compute_norms(model, 8, seed), L0, eps);
  try {
    Certificate cert = certificate(theorem, in);
    CertificateCheck check = certificate_check(row.trace, cert);
    row.certificate = CertificateRecord{std::move(cert), std::move(check)};
  } catch (const InapplicableCertificate&) {
  }
  const InvariantReport inv = verify_adaptive_trace(model, geo, row.trace);
  row.invariant_checks = inv.checks;
  row.invariant_violations = inv.violations;
  return row;
}

}  // namespace

std::vector<BenchRow> bench_regimes(const OraclePtr& oracle, const Vector& x, const std::vector<double>& H_list,
                                    double eps, double L0, std::uint64_t seed) {
  require_point(oracle, x);
  require(!H_list.empty(), "bench_regimes: empty H list");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(L0 > 0.0, "L0 must be positive");
  for (double H : H_list) require(std::isfinite(H) && H > 0.0, "bench_regimes: H must be positive");

  std::vector<std::future<BenchRow>> jobs;
  for (double H : H_list) {
    jobs.push_back(std::async(std::launch::async, bench_one, oracle, x, H, eps, L0, seed));
  }
  std::vector<BenchRow> rows;
  for (auto& job : jobs) rows.push_back(job.get());
  return rows;
}

bool ModelSolve::passed() const { return invariant_violations == 0 && all_pass(certificates); }

ModelSolve solve_model(const OraclePtr& oracle, const Vector& x, const OuterConfig& cfg, const SimpleFunction& phi) {
  validate(cfg);
  require_point(oracle, x);
  ModelSolve out{ModelInstance(oracle, x, cfg.H), {}, {}, 0, 0, {}};
  const ModelInstance& model = out.model;
  const Geometry geo = Geometry::from_model(model);
  const std::vector<StopRule> stops{GradTol{cfg.eps}, MaxIters{cfg.max_inner}};
  InvariantReport inv;
  const ModelNorms norms = compute_norms(model, 8, cfg.seed);
  if (phi.kind() == SimpleFunction::Kind::zero) {
    out.trace = solve_adaptive(model, geo, x, cfg.L0, stops);
    inv = verify_adaptive_trace(model, geo, out.trace);
  } else {
    out.trace = solve_fixed_composite(model, geo, phi, x, stops);
    const CertificateInputs in = certificate_inputs(model, norms, cfg.L0, cfg.eps, cfg.R0);
    inv = verify_composite_trace(model, geo, phi, out.trace, in.N > 0.0 ? std::optional(in.N) : std::nullopt);
  }
  out.certificates = certify_trace(model, out.trace, cfg.eps, cfg.L0, cfg.R0, cfg.seed);
  out.invariant_checks = inv.checks;
  out.invariant_violations = inv.violations;
  out.messages = inv.messages;
  return out;
}

CheckResult run_check(const OraclePtr& oracle, const Vector& x, double H, std::uint64_t seed) {
  require_point(oracle, x);
  require(std::isfinite(H) && H > 0.0, "H must be positive");
  const Index n = oracle->dim();
  const HolderInfo holder = oracle->holder();
  detail::Rng rng(seed);
  json out;
  out["command"] = "check";
  out["oracle"] = oracle->name();
  out["dim"] = n;
  out["seed"] = seed;
  out["holder"] = {{"nu", holder.nu}, {"H_f", holder.H_f}};
  bool passed = true;

  constexpr int kPoints = 100;
  constexpr double kAuditTol = 1e-4;
  double worst[3] = {0.0, 0.0, 0.0};
  double min_eig = std::numeric_limits<double>::infinity();
  int grad_violations = 0, value_violations = 0;
  const ModelInstance model(oracle, x, H);
  for (int i = 0; i < kPoints; ++i) {
    const Vector p = x + detail::in_ball(rng, n, 1.0);
    const AuditReport a = fd_audit(*oracle, p, 1e-5, seed + static_cast<std::uint64_t>(i));
    for (int o = 0; o < 3; ++o) worst[o] = std::max(worst[o], a.max_rel_error[o]);
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(oracle->hessian(p)).eigenvalues()(0));

    // Taylor deviation of f around x at p.
    const double r = (p - x).norm();
    const double grad_dev = (oracle->gradient(p) - model.phi_grad(p)).norm();
    const double value_dev = std::abs(oracle->value(p) - model.phi(p));
    if (grad_dev > 0.5 * holder.H_f * std::pow(r, 2.0 + holder.nu) + 1e-8) ++grad_violations;
    if (value_dev > holder.H_f / 6.0 * std::pow(r, 3.0 + holder.nu) + 1e-8) ++value_violations;
  }
  const bool audit_ok = worst[0] <= kAuditTol && worst[1] <= kAuditTol && worst[2] <= kAuditTol;
  out["audit"] = {{"points", kPoints}, {"step", 1e-5}, {"tolerance", kAuditTol},
                  {"max_rel_error", {worst[0], worst[1], worst[2]}}, {"passed", audit_ok}};
  const double hess_scale = std::max(1.0, oracle->hessian(x).norm());
  const bool psd_ok = min_eig >= -1e-10 * hess_scale;
  out["hessian_psd"] = {{"points", kPoints}, {"min_eigenvalue", min_eig}, {"passed", psd_ok}};
  const bool taylor_ok = grad_violations == 0 && value_violations == 0;
  out["taylor_deviation"] = {{"points", kPoints},
                             {"gradient_violations", grad_violations},
                             {"value_violations", value_violations},
                             {"passed", taylor_ok}};

  const double estimate = holder_estimate(*oracle, holder.nu, 1000, 1.0, seed);
  const bool holder_ok = estimate <= holder.H_f + 1e-8;
  out["holder_estimate"] = {{"pairs", 1000}, {"radius", 1.0}, {"value", estimate}, {"passed", holder_ok}};

  const ModelConstants c = model_constants(model.H_f(), model.nu(), H);
  const ConvexityReport conv = convexity_check(model, 200, seed);
  out["model"] = {{"H", H},
                  {"regime", regime_name(c.regime)},
                  {"tau_H", c.tau_H},
                  {"L_H", c.L_H},
                  {"mu_H", c.mu_H ? json(*c.mu_H) : json(nullptr)},
                  {"convexity_expected", conv.convexity_expected},
                  {"min_eigenvalue", conv.min_eigenvalue},
                  {"negative_eigenvalues", conv.negative_eigenvalues},
                  {"sandwich_checks", conv.sandwich_checks},
                  {"sandwich_violations", conv.sandwich_violations},
                  {"passed", conv.ok()}};

  passed = audit_ok && psd_ok && taylor_ok && holder_ok && conv.ok();
  out["passed"] = passed;
  return {out.dump(2), passed};
}

}  // namespace tensoraux
