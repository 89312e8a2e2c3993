#pragma once

#include "tensoraux/linalg.hpp"

#include <cmath>
#include <random>

namespace tensoraux::detail {

using Rng = std::mt19937_64;

inline Vector gaussian(Rng& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Vector unit_direction(Rng& rng, Index n) {
  Vector v = gaussian(rng, n);
  while (v.norm() == 0.0) v = gaussian(rng, n);
  return v / v.norm();
}

// Uniform in the Euclidean ball of the given radius.
inline Vector in_ball(Rng& rng, Index n, double radius) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
  return r * unit_direction(rng, n);
}

// Uniform in the B-ball of the given radius around `center`.
inline Vector in_metric_ball(Rng& rng, const MetricOperator& B, const Vector& center, double radius) {
  return center + B.unwhiten_primal(in_ball(rng, B.dim(), radius));
}

inline Vector metric_direction(Rng& rng, const MetricOperator& B) {
  return B.unwhiten_primal(unit_direction(rng, B.dim()));
}

}  // namespace tensoraux::detail
