#pragma once

// Independent reference computations used as test oracles. None of these call
// into the library's solvers.

#include "tensoraux/linalg.hpp"

#include <cmath>
#include <algorithm>
#include <functional>
#include <vector>
#include <numbers>
#include <random>

namespace support {

using tensoraux::Matrix;
using tensoraux::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Vector random_in_ball(std::mt19937_64& rng, Eigen::Index n, double radius) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector d = random_vector(rng, n);
  d /= d.norm();
  return radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n)) * d;
}

inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double floor = 0.1) {
  Matrix G(n, n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = normal(rng);
  return G * G.transpose() / static_cast<double>(n) + floor * Matrix::Identity(n, n);
}

/// Minimizes a function of two variables over a square: a 201 x 201 grid
/// followed by compass search down to step 1e-11.
inline Vector grid_compass_min(const std::function<double(const Vector&)>& f, const Vector& center,
                               double half_width) {
  Vector best = center;
  double fb = f(best);
  const int m = 200;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      Vector p(2);
      p << center(0) - half_width + 2.0 * half_width * i / m, center(1) - half_width + 2.0 * half_width * j / m;
      const double v = f(p);
      if (v < fb) fb = v, best = p;
    }
  }
  double step = 2.0 * half_width / m;
  const double dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  while (step > 1e-11) {
    bool moved = false;
    for (const auto& d : dirs) {
      Vector p = best;
      p(0) += step * d[0];
      p(1) += step * d[1];
      const double v = f(p);
      if (v < fb) fb = v, best = p, moved = true;
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

/// Central-difference gradient.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// max |T[h]^3| over `points` equally spaced unit vectors of the plane. With
/// `refine`, every grid local maximum is polished by golden-section search
/// on its neighbouring interval.
inline double circle_max(const std::function<double(const Vector&)>& cubic, int points, bool refine = false) {
  auto at = [&](double t) {
    Vector h(2);
    h << std::cos(t), std::sin(t);
    return std::abs(cubic(h));
  };
  const double dt = 2.0 * std::numbers::pi / points;
  std::vector<double> vals(points);
  for (int i = 0; i < points; ++i) vals[i] = at(i * dt);
  double best = *std::max_element(vals.begin(), vals.end());
  if (!refine) return best;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < points; ++i) {
    const double v = vals[i];
    if (v < vals[(i + points - 1) % points] || v < vals[(i + 1) % points]) continue;
    double a = (i - 1) * dt, b = (i + 1) * dt;
    for (int it = 0; it < 100; ++it) {
      const double c = b - g * (b - a), d = a + g * (b - a);
      if (at(c) > at(d)) b = d; else a = c;
    }
    best = std::max(best, at(0.5 * (a + b)));
  }
  return best;
}

/// Linear-rate bound coded from scratch in natural logarithms, in long double:
///   T <= (C + q) ln(1/eps) / ln(M / (M - mu)),  C = log2(4 q M^{2+nu} N^3 mu / sigma).
inline double linear_rate_bound(double M, double mu, double N, double nu, double eps) {
  const long double q = 3.0L + nu;
  const long double sigma = std::exp2(-(1.0L + nu));
  const long double lnC = std::log(4.0L) + std::log(q) + (2.0L + nu) * std::log((long double)M) +
                          3.0L * std::log((long double)N) + std::log((long double)mu) - std::log(sigma);
  const long double C = lnC / std::log(2.0L);
  const long double ln_rate = std::log((long double)M) - std::log((long double)M - mu);
  return static_cast<double>((C + q) * std::log(1.0L / eps) / ln_rate);
}

}  // namespace support
