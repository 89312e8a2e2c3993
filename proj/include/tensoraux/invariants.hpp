#pragma once

#include "tensoraux/bregman.hpp"
#include "tensoraux/solvers.hpp"
#include "tensoraux/tensor_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tensoraux {

struct InvariantReport {
  int checks = 0;
  int violations = 0;
  std::vector<std::string> messages;  // first few violations

  bool ok() const { return violations == 0; }
  void record(bool holds, const std::string& what);
  void merge(const InvariantReport& other);
};

/// Post-hoc verification of a trace from solve_adaptive:
///  - acceptance: Omega(y_{k+1}) <= Omega(y_k) + <grad, d> + M_k beta(y_k, y_{k+1}) (1e-10)
///  - stationarity of every step: ||grad rho(y_{k+1}) - grad rho(y_k) + grad Omega(y_k)/M_k||_*
///    <= 1e-9 max(1, ||c||_*)
///  - L_k <= max{L0, 2 L_H} and decrease >= 2 L_{k+1} beta(y_{k+1}, y_k) - 1e-10
///  - relative smoothness (L_H) and, above the threshold, relative strong
///    convexity (mu_H) between consecutive iterates (1e-8)
InvariantReport verify_adaptive_trace(const ModelInstance& model, const Geometry& geo, const IterationTrace& trace);

/// Post-hoc verification of a trace from solve_fixed_composite:
///  - decrease >= L_H beta(y_k, y_{k+1}) - 1e-10
///  - decrease >= sigma_q / (q L_H^{q-1} (3 N)^q) ||u(y_{k+1})||_*^q - 1e-8,
///    with N the supplied Hessian bound of rho (skipped when absent)
///  - every g_phi(y_k) passes subgradient_check; for phi = 0 its norm is <= 1e-8
InvariantReport verify_composite_trace(const ModelInstance& model, const Geometry& geo, const SimpleFunction& phi,
                                       const IterationTrace& trace, std::optional<double> N = std::nullopt);

}  // namespace tensoraux
