#pragma once

#include "tensoraux/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

namespace tensoraux {

/// Hoelder metadata of the third derivative: ||D3f(x) - D3f(y)|| <= H_f ||x - y||^nu.
/// H_f is an asserted upper bound, measured in the Euclidean metric for the
/// built-in oracles.
struct HolderInfo {
  double nu = 1.0;
  double H_f = 0.0;
};

/// A convex function with analytic derivatives up to order three.
class ThirdOrderOracle {
 public:
  virtual ~ThirdOrderOracle() = default;

  virtual Index dim() const = 0;
  virtual std::string name() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual SymForm2 hessian(const Vector& x) const = 0;
  virtual SymForm3 third(const Vector& x) const = 0;
  virtual HolderInfo holder() const = 0;
};

using OraclePtr = std::shared_ptr<const ThirdOrderOracle>;

/// Binary classification data; labels are stored as -1/+1.
struct Dataset {
  Matrix features;  // m x n
  Vector labels;    // m
};

/// f(x) = 1/2 <Ax, x> + <b, x>, A symmetric PSD. H_f = 0.
OraclePtr make_quadratic(Matrix A, Vector b);

/// f(x) = sum_i a_i x_i^4 / 4, a >= 0. H_f = 6 max_i a_i.
OraclePtr make_separable_quartic(Vector a);

/// f(x) = scale * log sum_i exp((<a_i, x> - b_i) / scale), rows a_i of A.
/// H_f = 4 max_i ||a_i||^4 / scale^3 (fourth cumulant of a variable bounded
/// by max_i |<a_i, h>|).
OraclePtr make_log_sum_exp(Matrix A, Vector b, double scale);

/// f(x) = (1/m) sum_i log(1 + exp(-y_i <a_i, x>)) + reg/2 ||x||^2.
/// H_f = (1/(8m)) sum_i ||a_i||^4, from |l''''| <= 1/8 for the logistic loss.
OraclePtr make_logistic(Dataset data, double reg);

/// Same function with replaced Hoelder metadata (user override).
OraclePtr with_holder(OraclePtr inner, HolderInfo holder);

/// Parses a CSV file of rows "f_1,...,f_n,label" with labels in {-1,+1} or
/// {0,1} (0 is mapped to -1). Throws ParseError with the offending line.
Dataset load_dataset_csv(const std::filesystem::path& path);
Dataset parse_dataset_csv(const std::string& text);

struct AuditReport {
  double max_rel_error[3] = {0.0, 0.0, 0.0};  // orders 1, 2, 3
  int directions = 0;

  bool passes(double tol) const {
    return max_rel_error[0] <= tol && max_rel_error[1] <= tol && max_rel_error[2] <= tol;
  }
};

/// Compares the analytic derivative of each order against a central
/// difference of the next lower order along 2n seeded random unit directions.
/// Per order the error is max_u ||a_u - d_u|| / max(max_u ||a_u||, 1e-8),
/// where a_u is the analytic and d_u the differenced directional quantity.
AuditReport fd_audit(const ThirdOrderOracle& oracle, const Vector& x, double step = 1e-5,
                     std::uint64_t seed = 42);

/// Sampled lower estimate of H_{f,3}(nu): max over pairs (x, y) in the
/// Euclidean ball of the given radius of ||D3f(x) - D3f(y)||_est / ||x - y||^nu.
/// The first 2n pairs are the coordinate pairs -+(radius/2) e_i.
double holder_estimate(const ThirdOrderOracle& oracle, double nu, int n_pairs, double radius,
                       std::uint64_t seed = 42);

}  // namespace tensoraux
