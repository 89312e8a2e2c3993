#pragma once

#include "tensoraux/solvers.hpp"
#include "tensoraux/tensor_model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tensoraux {

/// Iteration bounds that can be certified on a run.
///  T5_1   linear rate, adaptive method, H above 6 H_f/(3+nu)
///  T3_10a power rate eps^{-q}, H below the threshold
///  T3_10b power rate eps^{-q/2}, H at the threshold
///  TA_2   generic eps^{-q} bound from a value gap
///  CA_5   eps^{-q/2} bound for mu = 0 from a Bregman gap
///  CA_6   linear rate for mu > 0 from a Bregman gap
///  T4_2   linear rate, fixed-step composite method
///  CA_10  linear rate, composite, from a Bregman gap
enum class Theorem { T5_1, T3_10a, T3_10b, TA_2, CA_5, CA_6, T4_2, CA_10 };

const char* theorem_name(Theorem t);
std::optional<Theorem> parse_theorem(const std::string& name);

/// Scalars the bounds are built from. L_H and mu_H are derived from (H_f, nu, H).
struct CertificateInputs {
  double eps = 1e-6;
  double H = 0.0;
  double H_f = 0.0;
  double nu = 1.0;
  double L0 = 1.0;
  double N = 0.0;      // Hessian bound of rho on the sublevel set (N_x or N_hat)
  std::optional<double> N_hat;
  std::optional<double> F_x;
  std::optional<double> gap;   // value gap g(y0) - g*, defaults to F_x
  std::optional<double> beta;  // Bregman gap beta(y0, y*), defaults to N_hat^2 / 2
};

/// Inputs for a model with y0 = x, using the Frobenius upper bound on
/// ||D3f(x)||. N is N_x when R0 is given and N_hat otherwise.
CertificateInputs certificate_inputs(const ModelInstance& model, const ModelNorms& norms, double L0, double eps,
                                     std::optional<double> R0 = std::nullopt);

struct Certificate {
  Theorem theorem = Theorem::T5_1;
  std::map<std::string, double> inputs;  // every scalar used, by name
  double predicted_T = 0.0;
  std::optional<double> validity_floor;  // bound only claimed for T at or above this
  bool multiple_of_three = false;        // T is rounded up to a multiple of 3 before comparing
  int index_offset = 0;                  // certified T = accepted steps + index_offset
  std::string note;
};

/// Evaluates the bound. Throws InapplicableCertificate when the theorem's
/// hypotheses fail for the given inputs.
Certificate certificate(Theorem theorem, const CertificateInputs& in);

/// The certificates whose hypotheses hold for the inputs (smooth or composite).
std::vector<Theorem> applicable_theorems(const CertificateInputs& in, bool composite);

enum class CheckStatus { pass, fail, not_applicable };
const char* check_status_name(CheckStatus s);

struct CertificateCheck {
  CheckStatus status = CheckStatus::not_applicable;
  double certified_T = 0.0;  // T the bound is compared with
  bool vacuous = false;      // bound exceeded, but certified_T is below the validity floor
  int cap_violations = 0;    // rows with L_k > max{L0, 2 L_H}
  int decrease_violations = 0;
  std::string detail;

  bool passed() const { return status != CheckStatus::fail; }
};

/// Compares a terminated trace with a certificate and re-verifies the
/// step-size cap L_k <= max{L0, 2 L_H} and the decrease inequality
/// (adaptive: decrease >= 2 L_{k+1} beta(y_{k+1}, y_k) - 1e-10;
/// composite: decrease >= L_H beta(y_k, y_{k+1}) - 1e-10).
/// Traces stopped by an iteration budget are not applicable.
CertificateCheck certificate_check(const IterationTrace& trace, const Certificate& cert);

/// Value-rate envelope after k >= 1 steps:
/// mu beta0 / ((1 + mu/(M - mu))^k - 1), or M beta0 / k for mu = 0.
double rate_envelope(std::size_t k, double M, double mu, double beta0);

}  // namespace tensoraux
