#include "detail/sampling.hpp"
#include "tensoraux/errors.hpp"
#include "tensoraux/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

namespace tensoraux {

namespace {

template <class T>
void require_finite(const T& value, int order, int direction) {
  bool ok;
  if constexpr (std::is_same_v<T, double>) {
    ok = std::isfinite(value);
  } else {
    ok = value.allFinite();
  }
  if (!ok) {
    throw AuditFailure("non-finite oracle output at order " + std::to_string(order) +
                       ", direction " + std::to_string(direction));
  }
}

}  // namespace

AuditReport fd_audit(const ThirdOrderOracle& oracle, const Vector& x, double step, std::uint64_t seed) {
  if (!(step > 0.0)) throw ContractViolation("fd_audit: step must be positive");
  if (x.size() != oracle.dim()) throw ContractViolation("fd_audit: dimension mismatch");
  const Index n = oracle.dim();
  detail::Rng rng(seed);

  const Vector g = oracle.gradient(x);
  const Matrix H = oracle.hessian(x);
  const SymForm3 T = oracle.third(x);
  require_finite(g, 1, -1);
  require_finite(H, 2, -1);

  double err[3] = {0, 0, 0};
  double scale[3] = {0, 0, 0};
  const int directions = static_cast<int>(2 * n);
  for (int d = 0; d < directions; ++d) {
    const Vector u = detail::unit_direction(rng, n);
    const Vector xp = x + step * u;
    const Vector xm = x - step * u;

    const double fp = oracle.value(xp), fm = oracle.value(xm);
    require_finite(fp, 0, d);
    require_finite(fm, 0, d);
    const double a1 = g.dot(u);
    err[0] = std::max(err[0], std::abs(a1 - (fp - fm) / (2.0 * step)));
    scale[0] = std::max(scale[0], std::abs(a1));

    const Vector gp = oracle.gradient(xp), gm = oracle.gradient(xm);
    require_finite(gp, 1, d);
    require_finite(gm, 1, d);
    const Vector a2 = H * u;
    err[1] = std::max(err[1], (a2 - (gp - gm) / (2.0 * step)).norm());
    scale[1] = std::max(scale[1], a2.norm());

    const Matrix Hp = oracle.hessian(xp), Hm = oracle.hessian(xm);
    require_finite(Hp, 2, d);
    require_finite(Hm, 2, d);
    const Matrix a3 = T.apply(u);
    require_finite(a3, 3, d);
    err[2] = std::max(err[2], (a3 - (Hp - Hm) / (2.0 * step)).norm());
    scale[2] = std::max(scale[2], a3.norm());
  }

  AuditReport report;
  report.directions = directions;
  for (int k = 0; k < 3; ++k) report.max_rel_error[k] = err[k] / std::max(scale[k], 1e-8);
  return report;
}

double holder_estimate(const ThirdOrderOracle& oracle, double nu, int n_pairs, double radius,
                       std::uint64_t seed) {
  if (n_pairs < 1 || !(radius > 0.0)) throw ContractViolation("holder_estimate: invalid arguments");
  if (nu < 0.0 || nu > 1.0) throw ContractViolation("holder_estimate: nu must lie in [0, 1]");
  const Index n = oracle.dim();
  const auto metric = MetricOperator::identity(n);
  detail::Rng rng(seed);

  double best = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    Vector x, y;
    if (k < n) {
      x = Vector::Zero(n);
      x(k) = -0.5 * radius;
      y = -x;
    } else {
      x = detail::in_ball(rng, n, radius);
      y = detail::in_ball(rng, n, radius);
    }
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    const SymForm3 diff = oracle.third(x).minus(oracle.third(y));
    const double est = d3_norm_estimate(diff, metric, 2, seed + static_cast<std::uint64_t>(k));
    best = std::max(best, est / std::pow(dist, nu));
  }
  return best;
}

}  // namespace tensoraux
