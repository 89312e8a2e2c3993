#include "tensoraux/solvers.hpp"

#include "tensoraux/errors.hpp"

#include <cmath>

namespace tensoraux {

const char* status_name(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::model_stationary: return "model_stationary";
    case TerminalStatus::inexact_accepted: return "inexact_accepted";
    case TerminalStatus::f_stationary: return "f_stationary";
    case TerminalStatus::budget_exhausted: return "budget_exhausted";
  }
  return "unknown";
}

std::optional<TerminalStatus> parse_status(const std::string& name) {
  for (auto s : {TerminalStatus::model_stationary, TerminalStatus::inexact_accepted, TerminalStatus::f_stationary,
                 TerminalStatus::budget_exhausted}) {
    if (name == status_name(s)) return s;
  }
  return std::nullopt;
}

double inexact_threshold(int p, double nu, double theta, double H_f, double H, double delta) {
  if (p < 2) throw ContractViolation("inexact_threshold: p must be >= 2");
  if (!(theta > 0.0) || !(H > 0.0) || !(delta > 0.0 && delta <= 1.0) || !(H_f >= 0.0) || !(nu >= 0.0 && nu <= 1.0)) {
    throw ContractViolation("inexact_threshold: parameter out of range");
  }
  const double fact = std::tgamma(static_cast<double>(p));  // (p-1)!
  if (std::isinf(theta)) return 0.5 * delta;
  return std::min(0.5, theta * fact / (2.0 * (H_f + H * (p + nu)))) * delta;
}

namespace {

void validate_stops(const std::vector<StopRule>& stops, bool composite) {
  for (const auto& rule : stops) {
    std::visit(
        [&](const auto& r) {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, GradTol>) {
            if (!(r.eps > 0.0)) throw ContractViolation("grad_tol: eps must be positive");
          } else if constexpr (std::is_same_v<R, MaxIters>) {
            if (r.K < 1) throw ContractViolation("max_iters: K must be >= 1");
          } else {
            if (!(r.theta > 0.0) || !(r.delta > 0.0 && r.delta < 1.0)) {
              throw ContractViolation("inexact rule: need theta > 0 and delta in (0, 1)");
            }
            if (std::is_same_v<R, InexactModel> == composite) {
              throw ContractViolation(composite ? "inexact_model rule used in a composite run"
                                                : "composite_inexact rule used in a smooth run");
            }
          }
        },
        rule);
  }
}

// Checks the stop list at iterate y_k. `residual` is the dual norm of the
// model (sub)gradient; `f_residual` evaluates the matching quantity for f.
template <class FResidual>
bool check_stops(const std::vector<StopRule>& stops, std::size_t k, double residual, const ModelInstance& model,
                 FResidual&& f_residual, IterationTrace& trace) {
  for (std::size_t j = 0; j < stops.size(); ++j) {
    const auto& rule = stops[j];
    if (const auto* g = std::get_if<GradTol>(&rule)) {
      if (residual <= g->eps) {
        trace.status = TerminalStatus::model_stationary;
        trace.fired_rule = static_cast<int>(j);
        return true;
      }
    } else if (const auto* m = std::get_if<MaxIters>(&rule)) {
      if (k >= m->K) {
        trace.status = TerminalStatus::budget_exhausted;
        trace.fired_rule = static_cast<int>(j);
        return true;
      }
    } else {
      double theta, delta;
      if (const auto* r = std::get_if<InexactModel>(&rule)) {
        theta = r->theta, delta = r->delta;
      } else {
        const auto& c = std::get<CompositeInexact>(rule);
        theta = c.theta, delta = c.delta;
      }
      const double thr = inexact_threshold(3, model.nu(), theta, model.H_f(), model.H(), delta);
      if (residual <= thr) {
        const double gf = f_residual();
        trace.threshold = thr;
        trace.grad_f_norm = gf;
        trace.status = gf >= delta ? TerminalStatus::inexact_accepted : TerminalStatus::f_stationary;
        trace.fired_rule = static_cast<int>(j);
        return true;
      }
    }
  }
  return false;
}

void require_same_problem(const ModelInstance& model, const Geometry& geo, const Vector& y0) {
  if (geo.dim() != model.dim() || y0.size() != model.dim()) throw ContractViolation("solver: dimension mismatch");
  if (geo.nu() != model.nu()) throw ContractViolation("solver: geometry and model use different nu");
  if (!y0.allFinite()) throw ContractViolation("solver: non-finite starting point");
}

}  // namespace

IterationTrace solve_adaptive(const ModelInstance& model, const Geometry& geo, const Vector& y0, double L0,
                              const std::vector<StopRule>& stops, const SolverOptions& options) {
  require_same_problem(model, geo, y0);
  if (!(L0 > 0.0) || !std::isfinite(L0)) throw ContractViolation("solve_adaptive: L0 must be positive");
  if (options.frozen_scale && !(*options.frozen_scale > 0.0)) {
    throw ContractViolation("solve_adaptive: frozen scale must be positive");
  }
  validate_stops(stops, false);

  IterationTrace trace;
  trace.L0 = L0;
  Vector y = y0;
  double L = options.frozen_scale ? 0.5 * *options.frozen_scale : L0;
  double omega = model.omega(y);
  const MetricOperator& B = model.metric();

  for (std::size_t k = 0;; ++k) {
    const Vector grad = model.omega_grad(y);
    TraceRow row;
    row.k = k;
    row.L_k = L;
    row.omega = omega;
    row.grad_norm = B.dual_norm(grad);
    trace.iterates.push_back(y);

    auto f_residual = [&] { return B.dual_norm(model.oracle()->gradient(y)); };
    if (check_stops(stops, k, row.grad_norm, model, f_residual, trace)) {
      trace.rows.push_back(row);
      return trace;
    }
    if (k >= options.iteration_cap) {
      trace.status = TerminalStatus::budget_exhausted;
      trace.fired_rule = -1;
      trace.rows.push_back(row);
      return trace;
    }

    Vector z;
    double gap = 0.0, bwd = 0.0, M = 0.0;
    int i = 0;
    if (options.frozen_scale) {
      M = *options.frozen_scale;
      i = 1;
      z = geo.step(y, grad, M);
      gap = model.omega_bregman(y, z);
      bwd = geo.bregman(y, z);
    } else {
      for (;; ++i) {
        if (i > options.max_doublings) throw LineSearchStall(k, i - 1);
        M = std::ldexp(L, i);
        z = geo.step(y, grad, M);
        gap = model.omega_bregman(y, z);
        bwd = geo.bregman(y, z);
        if (gap <= M * bwd) break;
      }
    }
    row.i_k = i;
    row.M_k = M;
    row.model_gap = gap;
    row.bregman_bwd = bwd;
    row.bregman_fwd = geo.bregman(z, y);
    row.decrease = -grad.dot(z - y) - gap;
    trace.rows.push_back(row);

    y = std::move(z);
    omega = model.omega(y);
    if (!options.frozen_scale) L = std::ldexp(L, i - 1);
  }
}

IterationTrace solve_fixed_composite(const ModelInstance& model, const Geometry& geo, const SimpleFunction& phi,
                                     const Vector& y0, const std::vector<StopRule>& stops,
                                     const SolverOptions& options) {
  require_same_problem(model, geo, y0);
  const ModelConstants c = model_constants(model.H_f(), model.nu(), model.H());
  if (model.H() < c.convex_threshold * (1.0 - 1e-12)) {
    throw ContractViolation("solve_fixed_composite: requires H >= 2 H_f");
  }
  if (!phi.can_step()) throw ContractViolation("solve_fixed_composite: phi has no composite step");
  validate_stops(stops, true);
  const MetricOperator& B = model.metric();
  if (!std::isfinite(phi.eval(y0, B))) throw ContractViolation("solve_fixed_composite: y0 outside dom phi");

  IterationTrace trace;
  trace.composite = true;
  trace.L0 = c.L_H;
  const double M = 2.0 * c.L_H;
  Vector y = y0;
  Vector grad = model.omega_grad(y);
  Vector gphi = stationarity_subgradient(phi, y, grad, B);
  double multiplier = 0.0;

  for (std::size_t k = 0;; ++k) {
    const Vector u = grad + gphi;
    TraceRow row;
    row.k = k;
    row.L_k = c.L_H;
    row.omega = model.omega(y);
    row.grad_norm = B.dual_norm(u);
    row.omega_grad_norm = B.dual_norm(grad);
    row.gphi_norm = B.dual_norm(gphi);
    row.multiplier = multiplier;
    trace.iterates.push_back(y);
    trace.gphi.push_back(gphi);

    auto f_residual = [&] { return B.dual_norm(model.oracle()->gradient(y) + gphi); };
    if (check_stops(stops, k, row.grad_norm, model, f_residual, trace)) {
      trace.rows.push_back(row);
      return trace;
    }
    if (k >= options.iteration_cap) {
      trace.status = TerminalStatus::budget_exhausted;
      trace.fired_rule = -1;
      trace.rows.push_back(row);
      return trace;
    }

    CompositeStep step = geo.composite_step(y, grad, M, phi);
    const Vector& z = step.z;
    row.i_k = 1;
    row.M_k = M;
    row.model_gap = model.omega_bregman(y, z);
    row.bregman_bwd = geo.bregman(y, z);
    row.bregman_fwd = geo.bregman(z, y);
    double phi_drop = 0.0;
    if (phi.kind() == SimpleFunction::Kind::custom) phi_drop = phi.eval(y, B) - phi.eval(z, B);
    row.decrease = -grad.dot(z - y) - row.model_gap + phi_drop;
    trace.rows.push_back(row);

    gphi = M * (geo.rho_grad(y) - geo.rho_grad(z)) - grad;
    multiplier = step.multiplier;
    y = std::move(step.z);
    grad = model.omega_grad(y);
  }
}

}  // namespace tensoraux
