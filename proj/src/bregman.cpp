#include "tensoraux/bregman.hpp"

#include "detail/sampling.hpp"
#include "tensoraux/errors.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace tensoraux {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Secular {
  const Vector& lambda;
  const Vector& b;
  double kappa;
  double nu;

  double shift(double r) const { return std::pow(r, 1.0 + nu) + kappa; }

  Vector w(double r) const {
    const double t = shift(r);
    Vector out(b.size());
    for (Index i = 0; i < b.size(); ++i) out(i) = b(i) == 0.0 ? 0.0 : b(i) / (lambda(i) + t);
    return out;
  }

  // psi(r) = ||w(r)|| - r and its derivative.
  std::pair<double, double> eval(double r) const {
    const double t = shift(r);
    double sq = 0.0, cube = 0.0;
    for (Index i = 0; i < b.size(); ++i) {
      if (b(i) == 0.0) continue;
      const double den = lambda(i) + t;
      if (den <= 0.0) return {kInf, -kInf};
      sq += b(i) * b(i) / (den * den);
      cube += b(i) * b(i) / (den * den * den);
    }
    const double norm = std::sqrt(sq);
    const double dpsi = norm > 0.0 ? -(1.0 + nu) * std::pow(r, nu) * cube / norm - 1.0 : -1.0;
    return {norm - r, dpsi};
  }

  // Root of psi on [0, inf); psi is strictly decreasing.
  double root() const {
    const double bn = b.norm();
    if (bn == 0.0) return 0.0;
    double hi = std::pow(bn, 1.0 / (2.0 + nu));
    double psi_hi = eval(hi).first;
    for (int k = 0; psi_hi > 0.0; ++k) {
      if (k >= 200) throw StepSolveError("secular equation: no upper bracket found");
      const double next = eval(2.0 * hi).first;
      if (!(next < psi_hi)) throw AssertionFailure("secular function is not decreasing");
      hi *= 2.0;
      psi_hi = next;
    }
    if (psi_hi == 0.0) return hi;
    double lo = 0.0;
    double r = hi;
    double dpsi = eval(hi).second;
    double psi = psi_hi;
    for (int it = 0; it < 200; ++it) {
      double next = r - psi / dpsi;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      r = next;
      std::tie(psi, dpsi) = eval(r);
      if (std::abs(psi) <= 1e-12 * std::max(1.0, r)) return r;
      if (psi > 0.0) {
        lo = r;
      } else {
        hi = r;
      }
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return r;
    }
    return r;
  }
};

}  // namespace

Geometry::Geometry(Vector center, SymForm2 H0, double nu, MetricOperator metric)
    : center_(std::move(center)), H0_(std::move(H0)), nu_(nu), metric_(std::move(metric)) {
  const Index n = center_.size();
  if (H0_.rows() != n || H0_.cols() != n || metric_.dim() != n) {
    throw ContractViolation("geometry: dimension mismatch");
  }
  if (!(nu_ >= 0.0 && nu_ <= 1.0)) throw ContractViolation("geometry: nu must lie in [0, 1]");
  if (!H0_.allFinite() || !is_symmetric(H0_, 1e-10)) throw ContractViolation("geometry: H0 must be symmetric");
  const Matrix A = metric_.whiten_form(H0_);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (A + A.transpose()));
  if (eig.info() != Eigen::Success) throw ContractViolation("geometry: eigendecomposition failed");
  const double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues()(0) < -1e-10 * top) throw ContractViolation("geometry: H0 is not positive semidefinite");
  Q_ = eig.eigenvectors();
  lambda_ = eig.eigenvalues().cwiseMax(0.0);
}

Geometry Geometry::from_model(const ModelInstance& model) {
  return Geometry(model.center(), model.H0(), model.nu(), model.metric());
}

void Geometry::require_dim(const Vector& v) const {
  if (v.size() != dim()) throw ContractViolation("geometry: vector of wrong dimension");
}

double Geometry::rho(const Vector& y) const {
  require_dim(y);
  const Vector s = y - center_;
  return 0.5 * s.dot(H0_ * s) + std::pow(metric_.primal_norm(s), q()) / q();
}

Vector Geometry::rho_grad(const Vector& y) const {
  require_dim(y);
  const Vector s = y - center_;
  const double r = metric_.primal_norm(s);
  Vector g = H0_ * s;
  if (r > 0.0) g += std::pow(r, 1.0 + nu_) * metric_.apply(s);
  return g;
}

SymForm2 Geometry::rho_hess(const Vector& y) const {
  require_dim(y);
  const Vector s = y - center_;
  const double r = metric_.primal_norm(s);
  SymForm2 M = H0_;
  if (r > 0.0) {
    const Vector Bs = metric_.apply(s);
    M += (1.0 + nu_) * std::pow(r, nu_ - 1.0) * (Bs * Bs.transpose()) + std::pow(r, 1.0 + nu_) * metric_.matrix();
  }
  return M;
}

double Geometry::bregman(const Vector& u, const Vector& v) const {
  require_dim(u);
  require_dim(v);
  const Vector d = v - u;
  return 0.5 * d.dot(H0_ * d) + power_norm_bregman(metric_, u - center_, d, q()) / q();
}

Vector Geometry::solve_gradient_equation(const Vector& c, double kappa, const Vector* anchor) const {
  require_dim(c);
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ContractViolation("geometry: kappa must be nonnegative");
  if (!c.allFinite()) throw StepSolveError("step equation has a non-finite right-hand side");
  Vector b = Q_.transpose() * metric_.whiten_dual(c);
  if (anchor && kappa > 0.0) b += kappa * (Q_.transpose() * metric_.whiten_primal(*anchor - center_));
  const Secular sec{lambda_, b, kappa, nu_};
  const double r = sec.root();
  Vector z = center_ + metric_.unwhiten_primal(Q_ * sec.w(r));
  return polish(std::move(z), c, kappa, anchor);
}

Vector Geometry::polish(Vector z, const Vector& c, double kappa, const Vector* anchor) const {
  const bool anchored = anchor && kappa > 0.0;
  auto residual = [&](const Vector& p) {
    Vector F = rho_grad(p) - c;
    if (anchored) F += kappa * metric_.apply(p - *anchor);
    return F;
  };
  const double tol = 1e-9 * std::max(1.0, metric_.dual_norm(c));
  Vector F = residual(z);
  double res = metric_.dual_norm(F);
  for (int it = 0; it < 8 && !(res <= tol); ++it) {
    SymForm2 J = rho_hess(z);
    if (anchored) J += kappa * metric_.matrix();
    Eigen::LLT<Matrix> llt(J);
    if (llt.info() != Eigen::Success) break;
    const Vector candidate = z - llt.solve(F);
    const Vector Fc = residual(candidate);
    const double rc = metric_.dual_norm(Fc);
    if (!(rc < res)) break;
    z = candidate;
    F = Fc;
    res = rc;
  }
  if (!(res <= tol)) {
    throw StepSolveError("Bregman step residual " + std::to_string(res) + " exceeds tolerance " +
                         std::to_string(tol));
  }
  return z;
}

Vector Geometry::step(const Vector& y, const Vector& g, double M) const {
  require_dim(y);
  require_dim(g);
  if (!(M > 0.0) || !std::isfinite(M)) throw ContractViolation("geometry: step scale M must be positive");
  if ((g.array() == 0.0).all()) return y;
  return solve_gradient_equation(rho_grad(y) - g / M);
}

CompositeStep Geometry::composite_step(const Vector& y, const Vector& g, double M, const SimpleFunction& phi) const {
  switch (phi.kind()) {
    case SimpleFunction::Kind::zero:
      return {step(y, g, M), 0.0};
    case SimpleFunction::Kind::custom:
      if (!phi.can_step()) throw ContractViolation("custom simple function has no composite step solver");
      return phi.solver()(*this, y, g, M);
    case SimpleFunction::Kind::ball:
      break;
  }
  require_dim(phi.center());
  Vector z = step(y, g, M);
  const double R = phi.radius();
  if (metric_.primal_norm(z - phi.center()) <= R) return {std::move(z), 0.0};

  const Vector c = rho_grad(y) - g / M;
  const Vector b0 = Q_.transpose() * metric_.whiten_dual(c);
  const Vector dhat = Q_.transpose() * metric_.whiten_primal(phi.center() - center_);
  auto gap = [&](double kappa) {
    const Vector b = b0 + kappa * dhat;
    const Secular sec{lambda_, b, kappa, nu_};
    return (sec.w(sec.root()) - dhat).norm() - R;
  };
  // The distance to the ball center is nonincreasing in kappa.
  double hi = 1.0;
  double gap_hi = gap(hi);
  for (int k = 0; gap_hi > 0.0; ++k) {
    if (k >= 200) throw StepSolveError("ball step: no multiplier bracket found");
    hi *= 2.0;
    gap_hi = gap(hi);
  }
  double lo = 0.0, gap_lo = gap(0.0);
  if (gap_hi < 0.0 && gap_lo > 0.0) {
    std::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        gap, lo, hi, gap_lo, gap_hi, boost::math::tools::eps_tolerance<double>(52), iters);
    lo = bracket.first;
    hi = bracket.second;
  } else {
    lo = hi;
  }
  const double kappa = gap(lo) == 0.0 ? lo : hi;
  z = solve_gradient_equation(c, kappa, &phi.center());
  const double dist = metric_.primal_norm(z - phi.center());
  if (std::abs(dist - R) > 1e-9 * std::max(1.0, R)) {
    throw StepSolveError("ball step: constraint residual " + std::to_string(std::abs(dist - R)));
  }
  return {std::move(z), kappa * M};
}

SimpleFunction SimpleFunction::zero() { return {}; }

SimpleFunction SimpleFunction::ball(Vector center, double R) {
  if (!(std::isfinite(R) && R > 0.0)) throw ContractViolation("ball: radius must be positive");
  if (!center.allFinite()) throw ContractViolation("ball: non-finite center");
  SimpleFunction phi;
  phi.kind_ = Kind::ball;
  phi.center_ = std::move(center);
  phi.radius_ = R;
  return phi;
}

SimpleFunction SimpleFunction::custom(Eval eval, Solver solver) {
  if (!eval) throw ContractViolation("custom simple function needs an evaluator");
  SimpleFunction phi;
  phi.kind_ = Kind::custom;
  phi.eval_ = std::move(eval);
  phi.solver_ = std::move(solver);
  return phi;
}

double SimpleFunction::eval(const Vector& y, const MetricOperator& B) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::ball: return B.primal_norm(y - center_) <= radius_ + 1e-9 * std::max(1.0, radius_) ? 0.0 : kInf;
    case Kind::custom: return eval_(y);
  }
  return 0.0;
}

namespace {

bool on_boundary(const SimpleFunction& phi, const Vector& y, const MetricOperator& B) {
  return std::abs(B.primal_norm(y - phi.center()) - phi.radius()) <= 1e-9 * std::max(1.0, phi.radius());
}

}  // namespace

Vector stationarity_subgradient(const SimpleFunction& phi, const Vector& y, const Vector& grad,
                                const MetricOperator& B) {
  Vector s = Vector::Zero(y.size());
  if (phi.kind() != SimpleFunction::Kind::ball || !on_boundary(phi, y, B)) return s;
  const Vector e = y - phi.center();
  const double t = std::max(0.0, -grad.dot(e) / B.inner(e, e));
  return t * B.apply(e);
}

bool subgradient_check(const SimpleFunction& phi, const Vector& y, const Vector& s, const MetricOperator& B,
                       std::uint64_t seed) {
  if (y.size() != s.size() || y.size() != B.dim()) throw ContractViolation("subgradient_check: dimension mismatch");
  const double fy = phi.eval(y, B);
  if (!std::isfinite(fy)) return false;
  switch (phi.kind()) {
    case SimpleFunction::Kind::zero:
      return B.dual_norm(s) <= 1e-8;
    case SimpleFunction::Kind::ball: {
      if (!on_boundary(phi, y, B)) return B.dual_norm(s) <= 1e-8;
      const Vector e = y - phi.center();
      const double t = s.dot(e) / B.inner(e, e);
      const double off = B.dual_norm(s - t * B.apply(e));
      return t >= -1e-8 && off <= 1e-8 * std::max(1.0, B.dual_norm(s));
    }
    case SimpleFunction::Kind::custom:
      break;
  }
  detail::Rng rng(seed);
  const double radii[4] = {1e-3, 1e-2, 1e-1, 1.0};
  for (int k = 0; k < 25; ++k) {
    const Vector u = detail::metric_direction(rng, B);
    for (double r : radii) {
      const Vector v = y + r * u;
      if (phi.eval(v, B) < fy + s.dot(v - y) - 1e-8) return false;
    }
  }
  return true;
}

double three_point_gap(const Geometry& geo, const Vector& y, const Vector& g, double M, const Vector& z,
                       const Vector& w, const SimpleFunction& phi) {
  const MetricOperator& B = geo.metric();
  const double phi_w = phi.eval(w, B);
  if (!std::isfinite(phi_w)) return kInf;
  const double lw = (g.dot(w - y) + phi_w) / M;
  const double lz = (g.dot(z - y) + phi.eval(z, B)) / M;
  return lw + geo.bregman(y, w) - (lz + geo.bregman(y, z) + geo.bregman(z, w));
}

}  // namespace tensoraux
