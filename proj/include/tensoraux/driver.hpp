#pragma once

#include "tensoraux/bregman.hpp"
#include "tensoraux/certificates.hpp"
#include "tensoraux/errors.hpp"
#include "tensoraux/oracle.hpp"
#include "tensoraux/solvers.hpp"
#include "tensoraux/tensor_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tensoraux {

struct OuterConfig {
  double H = 0.0;
  double theta = 0.5;
  double eps = 1e-6;
  std::size_t max_outer = 100;
  double L0 = 1.0;
  std::optional<double> R0;
  std::uint64_t seed = 42;
  std::size_t max_inner = 100000;  // inner steps per outer iteration
};

/// Throws ContractViolation unless H > 0, theta > 0, eps in (0, 1), L0 > 0,
/// R0 >= 1 (when set) and max_inner >= 1.
void validate(const OuterConfig& cfg);

/// Built-in test problems by name, in dimension n:
///   quadratic          A = tridiag(-1/2, 2, -1/2), b = -1
///   separable_quartic  a = 1                          (alias: quartic)
///   log_sum_exp        2n+1 fixed rows, scale 1       (alias: lse)
///   logistic           4n fixed samples, reg 1e-2
/// "csv:<path>" loads a logistic dataset from a file (reg 1e-2).
OraclePtr builtin_oracle(const std::string& spec, Index n);

/// Default starting point: zeros for logistic problems, ones otherwise.
Vector default_center(const OraclePtr& oracle);

/// The inner solver ran out of its step budget; carries the partial trace.
class InnerBudgetExhausted : public Error {
 public:
  explicit InnerBudgetExhausted(IterationTrace trace)
      : Error("inner solver budget exhausted after " + std::to_string(trace.steps()) + " steps"),
        trace_(std::move(trace)) {}
  const IterationTrace& trace() const noexcept { return trace_; }

 private:
  IterationTrace trace_;
};

enum class OuterStatus { model_point, f_stationary };
const char* outer_status_name(OuterStatus s);

struct OuterStep {
  Vector x_plus;
  OuterStatus status = OuterStatus::model_point;
  IterationTrace inner;
  double f_x = 0.0;          // f(x) (+ phi(x))
  double model_value = 0.0;  // Omega(x+) (+ phi(x+))
  double residual = 0.0;     // ||grad Omega(x+) (+ g_phi(x+))||_*
  double residual_bound = 0.0;  // theta ||x+ - x||^{2+nu}
};

/// One step of the tensor method at x. Minimizes the model from y0 = x with
/// the inexact stop rule (delta = eps) and asserts, before returning,
///   model_value <= f_x                          (always)
///   residual <= residual_bound                  (model_point exits)
/// throwing AssertionFailure otherwise. Returns immediately with
/// f_stationary when ||grad f(x)||_* <= eps.
OuterStep outer_step(const OraclePtr& oracle, const Vector& x, const OuterConfig& cfg);

/// Composite variant for f + phi (requires H >= 2 H_f). phi = zero runs the
/// smooth path.
OuterStep outer_step(const OraclePtr& oracle, const Vector& x, const OuterConfig& cfg, const SimpleFunction& phi);

struct CertificateRecord {
  Certificate certificate;
  CertificateCheck check;
};

/// Every applicable certificate checked against an inner trace, with eps the
/// residual the trace was stopped at.
std::vector<CertificateRecord> certify_trace(const ModelInstance& model, const IterationTrace& trace, double eps,
                                             double L0, std::optional<double> R0, std::uint64_t seed);

struct OuterRecord {
  std::size_t k = 0;
  Vector x;
  double f = 0.0;
  double grad_norm = 0.0;  // ||grad f(x_k)||_*
  std::size_t inner_iterations = 0;
  std::string inner_status;  // empty on the last row
  std::vector<CertificateRecord> certificates;
  int invariant_checks = 0;
  int invariant_violations = 0;
};

struct RunReport {
  std::vector<OuterRecord> rows;
  std::vector<IterationTrace> traces;  // traces[k] is the inner run from x_k
  std::string status;                  // f_stationary | budget_exhausted
  double wall_seconds = 0.0;

  bool passed() const;
};

/// Repeats outer_step until ||grad f(x_k)||_* <= eps or max_outer steps.
/// For H >= H_f, an increase of f between outer iterates throws AssertionFailure.
RunReport minimize(const OraclePtr& oracle, const Vector& x0, const OuterConfig& cfg);

struct BenchRow {
  double H = 0.0;
  Regime regime = Regime::above;
  std::size_t iterations = 0;
  std::optional<CertificateRecord> certificate;  // T5_1, T3_10b or T3_10a by regime
  int invariant_checks = 0;
  int invariant_violations = 0;
  IterationTrace trace;

  bool passed() const;
};

/// One inner solve per H to ||grad Omega||_* <= eps, compared with the
/// certificate of its regime. Rows run concurrently and are returned in
/// H_list order.
std::vector<BenchRow> bench_regimes(const OraclePtr& oracle, const Vector& x, const std::vector<double>& H_list,
                                    double eps, double L0 = 1.0, std::uint64_t seed = 42);

/// A single inner solve of the model at x to ||grad Omega (+ g_phi)||_* <= eps.
struct ModelSolve {
  ModelInstance model;
  IterationTrace trace;
  std::vector<CertificateRecord> certificates;
  int invariant_checks = 0;
  int invariant_violations = 0;
  std::vector<std::string> messages;

  bool passed() const;
};

ModelSolve solve_model(const OraclePtr& oracle, const Vector& x, const OuterConfig& cfg,
                       const SimpleFunction& phi = SimpleFunction::zero());

/// Property sweep of an oracle around x: derivative audit at 100 points of the
/// unit ball, Hoelder metadata against a sampled estimate, Hessian PSD, the
/// Taylor deviation bounds, and the model convexity/sandwich check at x.
struct CheckResult {
  std::string json;
  bool passed = false;
};
CheckResult run_check(const OraclePtr& oracle, const Vector& x, double H, std::uint64_t seed);

// Serialization. The CSV has one row per inner iterate:
//   run_id,outer_k,inner_k,i_k,L_k,omega,grad_dual_norm,bregman_decrease,status
// with floats printed to 17 significant digits. The JSON summary carries the
// certificate inputs, so `report` can re-derive every claimed pass.

std::string csv_header();
std::string csv_rows(const std::string& run_id, std::size_t outer_k, const IterationTrace& trace);

std::string run_csv(const RunReport& report);
std::string run_json(const RunReport& report, const OuterConfig& cfg, const std::string& oracle_name);
std::string bench_csv(const std::vector<BenchRow>& rows);
std::string bench_json(const std::vector<BenchRow>& rows, double eps, const std::string& oracle_name);
std::string model_csv(const ModelSolve& solve);
std::string model_json(const ModelSolve& solve, const OuterConfig& cfg, const std::string& oracle_name);

struct ReportResult {
  std::string json;
  bool passed = false;
};

/// Re-verifies every certificate claim of a JSON summary from the CSV rows
/// alone: recomputes predicted_T from the stored inputs, the certified T from
/// the residual column, the step-size cap and the L_k recursion, and compares
/// the outcome with the claimed status. Throws ParseError on malformed input.
ReportResult report(const std::string& csv_text, const std::string& json_text);

}  // namespace tensoraux
