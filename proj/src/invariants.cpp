#include "tensoraux/invariants.hpp"

#include <algorithm>
#include <cmath>

namespace tensoraux {

void InvariantReport::record(bool holds, const std::string& what) {
  ++checks;
  if (holds) return;
  ++violations;
  if (messages.size() < 20) messages.push_back(what);
}

void InvariantReport::merge(const InvariantReport& other) {
  checks += other.checks;
  violations += other.violations;
  for (const auto& m : other.messages) {
    if (messages.size() < 20) messages.push_back(m);
  }
}

namespace {

std::string at(std::size_t k, const char* what) { return "k=" + std::to_string(k) + ": " + what; }

}  // namespace

InvariantReport verify_adaptive_trace(const ModelInstance& model, const Geometry& geo, const IterationTrace& trace) {
  InvariantReport rep;
  const MetricOperator& B = model.metric();
  const ModelConstants c = model_constants(model.H_f(), model.nu(), model.H());
  const double cap = std::max(trace.L0, 2.0 * c.L_H) * (1.0 + 1e-12);
  const bool strong = c.regime == Regime::above && c.mu_H.has_value();

  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const TraceRow& row = trace.rows[k];
    rep.record(row.L_k <= cap, at(k, "L_k exceeds max{L0, 2 L_H}"));
    if (row.i_k < 0) continue;
    const Vector& y = trace.iterates[k];
    const Vector& z = trace.iterates[k + 1];
    const Vector grad = model.omega_grad(y);

    const double gap = model.omega_bregman(y, z);
    const double bwd = geo.bregman(y, z);
    const double fwd = geo.bregman(z, y);
    rep.record(gap <= row.M_k * bwd + 1e-10 * std::max(1.0, row.M_k * bwd), at(k, "acceptance test fails"));

    const Vector target = geo.rho_grad(y) - grad / row.M_k;
    const double residual = B.dual_norm(geo.rho_grad(z) - target);
    rep.record(residual <= 1e-9 * std::max(1.0, B.dual_norm(target)), at(k, "step stationarity residual"));

    const double decrease = -grad.dot(z - y) - gap;
    rep.record(decrease >= 2.0 * trace.rows[k + 1].L_k * fwd - 1e-10, at(k, "decrease below 2 L_{k+1} beta"));
    rep.record(decrease >= -1e-12 * std::max(1.0, std::abs(row.omega)), at(k, "model value increased"));

    rep.record(gap <= c.L_H * bwd + 1e-8, at(k, "relative smoothness violated"));
    if (strong) rep.record(gap >= *c.mu_H * bwd - 1e-8, at(k, "relative strong convexity violated"));
  }
  return rep;
}

InvariantReport verify_composite_trace(const ModelInstance& model, const Geometry& geo, const SimpleFunction& phi,
                                       const IterationTrace& trace, std::optional<double> N) {
  InvariantReport rep;
  const MetricOperator& B = model.metric();
  const ModelConstants c = model_constants(model.H_f(), model.nu(), model.H());
  const double q = model.q();
  const double sigma = std::pow(2.0, -(1.0 + model.nu()));

  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const TraceRow& row = trace.rows[k];
    const Vector& y = trace.iterates[k];
    const Vector& gphi = trace.gphi[k];
    rep.record(subgradient_check(phi, y, gphi, B), at(k, "g_phi is not a subgradient"));
    if (phi.kind() == SimpleFunction::Kind::zero) rep.record(B.dual_norm(gphi) <= 1e-8, at(k, "g_phi nonzero"));
    if (row.i_k < 0) continue;

    const Vector& z = trace.iterates[k + 1];
    rep.record(row.decrease >= c.L_H * geo.bregman(y, z) - 1e-10, at(k, "decrease below L_H beta(y_k, y_{k+1})"));
    if (N) {
      const double u_next = trace.rows[k + 1].grad_norm;
      const double bound = sigma / (q * std::pow(c.L_H, q - 1.0) * std::pow(3.0 * *N, q)) * std::pow(u_next, q);
      rep.record(row.decrease >= bound - 1e-8, at(k, "decrease below the subgradient bound"));
    }
  }
  return rep;
}

}  // namespace tensoraux
