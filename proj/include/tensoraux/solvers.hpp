#pragma once

#include "tensoraux/bregman.hpp"
#include "tensoraux/tensor_model.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tensoraux {

/// Stop when the dual norm of the model (sub)gradient is at most eps.
struct GradTol {
  double eps;
};
/// Stop when ||grad Omega(y)||_* <= inexact_threshold(3, nu, theta, H_f, H, delta).
struct InexactModel {
  double theta;
  double delta;
};
/// Composite analogue of InexactModel, applied to ||grad Omega(y) + g_phi(y)||_*.
struct CompositeInexact {
  double theta;
  double delta;
};
/// Stop after K accepted steps.
struct MaxIters {
  std::size_t K;
};

using StopRule = std::variant<GradTol, InexactModel, CompositeInexact, MaxIters>;

enum class TerminalStatus { model_stationary, inexact_accepted, f_stationary, budget_exhausted };

const char* status_name(TerminalStatus s);
std::optional<TerminalStatus> parse_status(const std::string& name);

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One row per iterate y_k. Step quantities describe the step y_k -> y_{k+1}
/// and are zero on the terminal row (i_k = -1).
struct TraceRow {
  std::size_t k = 0;
  int i_k = -1;          // accepted doubling count
  double L_k = 0.0;
  double M_k = 0.0;      // 2^{i_k} L_k
  double omega = 0.0;    // Omega(y_k)
  double grad_norm = 0.0;     // ||grad Omega(y_k)||_*, or ||u(y_k)||_* in composite runs
  double bregman_fwd = 0.0;   // beta(y_{k+1}, y_k)
  double bregman_bwd = 0.0;   // beta(y_k, y_{k+1})
  double model_gap = 0.0;     // Omega(y_{k+1}) - Omega(y_k) - <grad Omega(y_k), y_{k+1} - y_k>
  double decrease = 0.0;      // objective decrease from y_k to y_{k+1}
  double gphi_norm = kNaN;    // ||g_phi(y_k)||_* (composite runs)
  double omega_grad_norm = kNaN;  // ||grad Omega(y_k)||_* (composite runs)
  double multiplier = 0.0;    // ball multiplier of the step
};

struct IterationTrace {
  bool composite = false;
  double L0 = 0.0;
  std::vector<TraceRow> rows;
  std::vector<Vector> iterates;  // y_0, ..., y_T
  std::vector<Vector> gphi;      // g_phi(y_k), composite runs only
  TerminalStatus status = TerminalStatus::budget_exhausted;
  /// Rule that fired, as its index into the stop list (-1 for the iteration cap).
  int fired_rule = -1;
  std::optional<double> threshold;    // inexact threshold, when such a rule fired
  std::optional<double> grad_f_norm;  // ||grad f(y_T) (+ g_phi)||_*, when such a rule fired

  std::size_t steps() const { return rows.empty() ? 0 : rows.size() - 1; }
  const Vector& terminal() const { return iterates.back(); }
};

struct SolverOptions {
  int max_doublings = 60;
  std::size_t iteration_cap = 200000;
  /// Adaptive solver only: skip the line search and use this M at every step
  /// (reported as L_k = M/2, i_k = 1).
  std::optional<double> frozen_scale;
};

/// min{1/2, theta (p-1)! / (2 [H_f + H (p + nu)])} delta.
double inexact_threshold(int p, double nu, double theta, double H_f, double H, double delta);

/// Adaptive Bregman gradient method on Omega with backtracking on 2^i L_k.
/// Stop rules are checked at every iterate, including y0, in list order.
IterationTrace solve_adaptive(const ModelInstance& model, const Geometry& geo, const Vector& y0, double L0,
                              const std::vector<StopRule>& stops, const SolverOptions& options = {});

/// Fixed-step composite Bregman gradient method with M = 2 L_H.
/// Requires H >= 2 H_f and y0 in the domain of phi.
IterationTrace solve_fixed_composite(const ModelInstance& model, const Geometry& geo, const SimpleFunction& phi,
                                     const Vector& y0, const std::vector<StopRule>& stops,
                                     const SolverOptions& options = {});

}  // namespace tensoraux
