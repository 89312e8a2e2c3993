#include "support.hpp"
#include "tensoraux/certificates.hpp"
#include "tensoraux/errors.hpp"
#include "tensoraux/invariants.hpp"
#include "tensoraux/solvers.hpp"

#include <doctest.h>

using namespace tensoraux;
using support::vec;

namespace {

OraclePtr quartic2() { return make_separable_quartic(Vector::Ones(2)); }

struct Setup {
  ModelInstance model;
  Geometry geo;
  explicit Setup(ModelInstance m) : model(std::move(m)), geo(Geometry::from_model(model)) {}
};

Setup quartic_model(double H, Vector x = vec({1.0, 1.0})) { return Setup(ModelInstance(quartic2(), x, H)); }

}  // namespace

TEST_CASE("inexact threshold") {
  CHECK(inexact_threshold(3, 1.0, 0.5, 1.0, 3.0, 1.0) == doctest::Approx(1.0 / 26.0).epsilon(1e-15));
  CHECK(inexact_threshold(3, 1.0, 1e15, 1.0, 3.0, 0.3) == doctest::Approx(0.15));
  CHECK(inexact_threshold(2, 1.0, 1.0, 1.0, 1.0, 0.1) == doctest::Approx(0.0125).epsilon(1e-15));
  CHECK_THROWS_AS(inexact_threshold(1, 1.0, 1.0, 1.0, 1.0, 0.1), ContractViolation);
}

TEST_CASE("adaptive solver from the model minimizer") {
  const Setup s = quartic_model(5.0, Vector::Zero(2));
  const IterationTrace t = solve_adaptive(s.model, s.geo, Vector::Zero(2), 1.0, {GradTol{1e-8}});
  CHECK(t.steps() == 0);
  CHECK(t.status == TerminalStatus::model_stationary);
}

TEST_CASE("adaptive solver on the quartic model") {
  const Setup s = quartic_model(12.0);
  const IterationTrace t = solve_adaptive(s.model, s.geo, s.model.center(), 1.0, {GradTol{1e-8}});
  CHECK(t.status == TerminalStatus::model_stationary);
  CHECK(t.rows.back().grad_norm <= 1e-8);
  CHECK(s.model.omega_grad(t.terminal()).norm() <= 1e-8);
  for (std::size_t k = 1; k < t.rows.size(); ++k) CHECK(t.rows[k].omega <= t.rows[k - 1].omega);
  const InvariantReport inv = verify_adaptive_trace(s.model, s.geo, t);
  CHECK(inv.checks > 0);
  CHECK(inv.ok());

  const Vector ref = support::grid_compass_min([&](const Vector& y) { return s.model.omega(y); }, s.model.center(), 2.0);
  CHECK((t.terminal() - ref).norm() <= 1e-5);
  CHECK(s.model.omega(t.terminal()) <= s.model.omega(ref) + 1e-12);

  const Setup b = quartic_model(12.0, vec({0.4, -1.3}));
  const IterationTrace tb = solve_adaptive(b.model, b.geo, b.model.center(), 0.01, {GradTol{1e-9}});
  CHECK(verify_adaptive_trace(b.model, b.geo, tb).ok());
}

TEST_CASE("inexact stop rule implies the acceptance condition") {
  const Setup s = quartic_model(12.0);
  const double theta = 0.5, delta = 1e-4;
  const IterationTrace t = solve_adaptive(s.model, s.geo, s.model.center(), 1.0, {InexactModel{theta, delta}});
  REQUIRE(t.threshold.has_value());
  CHECK(*t.threshold == doctest::Approx(inexact_threshold(3, 1.0, theta, 6.0, 12.0, delta)));
  const Vector& y = t.terminal();
  REQUIRE(t.grad_f_norm.has_value());
  CHECK(*t.grad_f_norm == doctest::Approx(quartic2()->gradient(y).norm()));
  if (*t.grad_f_norm >= delta) {
    CHECK(t.status == TerminalStatus::inexact_accepted);
    CHECK(s.model.omega_grad(y).norm() <= theta * std::pow((y - s.model.center()).norm(), 3.0));
  } else {
    CHECK(t.status == TerminalStatus::f_stationary);
  }
}

TEST_CASE("stop rule order and budget") {
  const Setup s = quartic_model(12.0);
  const IterationTrace t = solve_adaptive(s.model, s.geo, s.model.center(), 1.0, {MaxIters{3}, GradTol{1e-12}});
  CHECK(t.steps() == 3);
  CHECK(t.status == TerminalStatus::budget_exhausted);
  CHECK(t.fired_rule == 0);
  CHECK_THROWS_AS(solve_adaptive(s.model, s.geo, s.model.center(), 0.0, {GradTol{1e-8}}), ContractViolation);
  CHECK_THROWS_AS(solve_adaptive(s.model, s.geo, s.model.center(), 1.0, {GradTol{-1.0}}), ContractViolation);
  for (auto st : {TerminalStatus::model_stationary, TerminalStatus::inexact_accepted, TerminalStatus::f_stationary,
                  TerminalStatus::budget_exhausted}) {
    CHECK(parse_status(status_name(st)) == st);
  }
}

TEST_CASE("linear-rate certificate against an independent coding") {
  CertificateInputs in;
  in.H = 3.0;
  in.H_f = 1.0;
  in.nu = 1.0;
  in.L0 = 8.0;
  in.N = 51.0;
  in.eps = 1e-6;
  const Certificate c = certificate(Theorem::T5_1, in);
  CHECK(c.inputs.at("M") == 16.0);
  CHECK(c.inputs.at("mu_H") == doctest::Approx(0.29289321881345254).epsilon(1e-14));
  const double ref = support::linear_rate_bound(16.0, 1.0 - 1.0 / std::sqrt(2.0), 51.0, 1.0, 1e-6);
  CHECK(std::abs(c.predicted_T - ref) <= 1e-10 * ref);
  REQUIRE(c.validity_floor.has_value());
  CHECK(*c.validity_floor == doctest::Approx(1.0 / std::log2(16.0 / (16.0 - c.inputs.at("mu_H")))));

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    CertificateInputs r;
    r.H_f = 0.5 + 10.0 * u(rng);
    r.nu = 0.2 + 0.8 * u(rng);
    r.H = 6.0 * r.H_f / (3.0 + r.nu) * (1.1 + 5.0 * u(rng));
    r.L0 = 0.01 + 50.0 * u(rng);
    r.N = 1.0 + 100.0 * u(rng);
    r.eps = std::pow(10.0, -1.0 - 9.0 * u(rng));
    const Certificate cr = certificate(Theorem::T5_1, r);
    const double want = support::linear_rate_bound(cr.inputs.at("M"), cr.inputs.at("mu_H"), r.N, r.nu, r.eps);
    CHECK(std::abs(cr.predicted_T - want) <= 1e-10 * want);
  }
}

TEST_CASE("certificate scaling and applicability") {
  CertificateInputs in;
  in.H_f = 1.0;
  in.nu = 1.0;
  in.N = 20.0;
  in.N_hat = 30.0;
  in.F_x = 100.0;
  in.eps = 1.0;
  in.H = 3.0;
  for (Theorem t : {Theorem::T5_1, Theorem::CA_6, Theorem::T4_2, Theorem::CA_10}) {
    CHECK(certificate(t, in).predicted_T == 0.0);
  }

  in.H = 1.0;
  in.eps = 1e-3;
  const double T1 = certificate(Theorem::T3_10a, in).predicted_T;
  in.eps = 0.5e-3;
  const double T2 = certificate(Theorem::T3_10a, in).predicted_T;
  CHECK(T2 / T1 == doctest::Approx(16.0).epsilon(1e-12));
  CHECK_THROWS_AS(certificate(Theorem::T5_1, in), InapplicableCertificate);
  CHECK_THROWS_AS(certificate(Theorem::T3_10b, in), InapplicableCertificate);
  CHECK_THROWS_AS(certificate(Theorem::T4_2, in), InapplicableCertificate);

  in.H = 1.5;
  const double B1 = certificate(Theorem::T3_10b, in).predicted_T;
  in.eps = 1e-3;
  CHECK(B1 / certificate(Theorem::T3_10b, in).predicted_T == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(certificate(Theorem::T3_10b, in).multiple_of_three);
  CHECK_THROWS_AS(certificate(Theorem::T3_10a, in), InapplicableCertificate);
  CHECK_THROWS_AS(certificate(Theorem::CA_6, in), InapplicableCertificate);

  in.H = 3.0;
  CHECK_THROWS_AS(certificate(Theorem::T3_10a, in), InapplicableCertificate);
  in.N = 0.0;
  CHECK_THROWS_AS(certificate(Theorem::T5_1, in), InapplicableCertificate);
  for (Theorem t : {Theorem::T5_1, Theorem::T3_10a, Theorem::T3_10b, Theorem::TA_2, Theorem::CA_5, Theorem::CA_6,
                    Theorem::T4_2, Theorem::CA_10}) {
    CHECK(parse_theorem(theorem_name(t)) == t);
  }
}

TEST_CASE("certificate checks on real and forged traces") {
  const Setup s = quartic_model(12.0);
  const double eps = 1e-8;
  const IterationTrace t = solve_adaptive(s.model, s.geo, s.model.center(), 1.0, {GradTol{eps}});
  const CertificateInputs in = certificate_inputs(s.model, compute_norms(s.model), 1.0, eps);
  for (Theorem th : applicable_theorems(in, false)) {
    const CertificateCheck c = certificate_check(t, certificate(th, in));
    CHECK_MESSAGE(c.status == CheckStatus::pass, theorem_name(th), " ", c.detail);
  }
  const Certificate t51 = certificate(Theorem::T5_1, in);
  CHECK(t51.predicted_T >= static_cast<double>(t.steps()));

  IterationTrace forged = t;
  REQUIRE(forged.rows.size() > 2);
  forged.rows[1].L_k = 1e6;
  const CertificateCheck f = certificate_check(forged, t51);
  CHECK(f.status == CheckStatus::fail);
  CHECK(f.cap_violations >= 1);

  const IterationTrace cut = solve_adaptive(s.model, s.geo, s.model.center(), 1.0, {MaxIters{2}});
  CHECK(certificate_check(cut, t51).status == CheckStatus::not_applicable);

  // A bound the trace exceeds: a failure, unless the run is below the validity floor.
  Certificate tight = t51;
  tight.predicted_T = 1.0;
  tight.validity_floor.reset();
  CHECK(certificate_check(t, tight).status == CheckStatus::fail);
  tight.validity_floor = 1e9;
  const CertificateCheck floor = certificate_check(t, tight);
  CHECK(floor.vacuous);
  CHECK(floor.status == CheckStatus::pass);
  CHECK(certificate_check(forged, tight).status == CheckStatus::fail);
}

TEST_CASE("value-rate envelope") {
  CHECK(rate_envelope(4, 8.0, 0.0, 2.0) == doctest::Approx(4.0));
  CHECK(rate_envelope(3, 10.0, 2.0, 1.0) == doctest::Approx(2.0 / (std::pow(1.25, 3) - 1.0)));
  CHECK(rate_envelope(5, 10.0, 1e-14, 1.0) == doctest::Approx(2.0).epsilon(1e-6));

  for (double H : {12.0, 9.0}) {
    const Setup s = quartic_model(H);
    const IterationTrace ref = solve_adaptive(s.model, s.geo, s.model.center(), 1.0, {GradTol{1e-12}});
    const double omega_star = s.model.omega(ref.terminal());
    const IterationTrace t = solve_adaptive(s.model, s.geo, s.model.center(), 1.0, {GradTol{1e-8}});
    const ModelConstants mc = model_constants(6.0, 1.0, H);
    const double M = std::max(2.0 * 1.0, 4.0 * mc.L_H);
    const double beta0 = s.geo.bregman(s.model.center(), ref.terminal());
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
      CHECK(t.rows[k].omega - omega_star <= rate_envelope(k, M, *mc.mu_H, beta0) + 1e-10);
    }
  }
}

TEST_CASE("fixed-step composite solver") {
  const Setup s = quartic_model(12.0);
  const double L_H = model_constants(6.0, 1.0, 12.0).L_H;

  const IterationTrace z = solve_fixed_composite(s.model, s.geo, SimpleFunction::zero(), s.model.center(), {GradTol{1e-8}});
  CHECK(z.composite);
  CHECK(z.rows.back().grad_norm <= 1e-8);
  for (const Vector& g : z.gphi) CHECK(g.norm() <= 1e-8);
  CHECK(verify_composite_trace(s.model, s.geo, SimpleFunction::zero(), z).ok());

  // A ball that never binds reproduces the adaptive method at M = 2 L_H.
  const SimpleFunction wide = SimpleFunction::ball(s.model.center(), 100.0);
  const IterationTrace c = solve_fixed_composite(s.model, s.geo, wide, s.model.center(), {GradTol{1e-8}});
  SolverOptions frozen;
  frozen.frozen_scale = 2.0 * L_H;
  const IterationTrace a = solve_adaptive(s.model, s.geo, s.model.center(), L_H, {GradTol{1e-8}}, frozen);
  REQUIRE(a.iterates.size() == c.iterates.size());
  for (std::size_t k = 0; k < a.iterates.size(); ++k) CHECK((a.iterates[k] - c.iterates[k]).norm() <= 1e-10);
  for (const TraceRow& r : c.rows) CHECK(r.multiplier == 0.0);

  // Composite-stationary start.
  const IterationTrace fine = solve_adaptive(s.model, s.geo, s.model.center(), 1.0, {GradTol{1e-13}});
  const IterationTrace st = solve_fixed_composite(s.model, s.geo, SimpleFunction::ball(fine.terminal(), 0.1),
                                                  fine.terminal(), {GradTol{1e-8}});
  CHECK(st.steps() == 0);

  CHECK_THROWS_AS(solve_fixed_composite(quartic_model(11.0).model, quartic_model(11.0).geo, SimpleFunction::zero(),
                                        vec({1.0, 1.0}), {GradTol{1e-8}}),
                  ContractViolation);
  CHECK_THROWS_AS(solve_fixed_composite(s.model, s.geo, SimpleFunction::ball(Vector::Zero(2), 0.5),
                                        s.model.center(), {GradTol{1e-8}}),
                  ContractViolation);
}

TEST_CASE("composite solver with an active ball") {
  const Setup s = quartic_model(12.0);
  const Vector c = s.model.center();
  const double R = 0.2;
  const SimpleFunction ball = SimpleFunction::ball(c, R);
  const IterationTrace t = solve_fixed_composite(s.model, s.geo, ball, c, {GradTol{1e-8}});
  CHECK(t.rows.back().grad_norm <= 1e-8);
  const CertificateInputs in = certificate_inputs(s.model, compute_norms(s.model), 1.0, 1e-8);
  CHECK(verify_composite_trace(s.model, s.geo, ball, t, in.N).ok());
  for (std::size_t k = 0; k < t.gphi.size(); ++k) {
    CHECK(subgradient_check(ball, t.iterates[k], t.gphi[k], s.model.metric()));
  }
  for (Theorem th : {Theorem::T4_2, Theorem::CA_10}) {
    CHECK(certificate_check(t, certificate(th, in)).status == CheckStatus::pass);
  }

  // Brute force over the boundary circle (the free minimizer lies outside the ball).
  const IterationTrace free = solve_adaptive(s.model, s.geo, c, 1.0, {GradTol{1e-12}});
  REQUIRE((free.terminal() - c).norm() > R);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100000; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 100000;
    best = std::min(best, s.model.omega(c + R * vec({std::cos(a), std::sin(a)})));
  }
  CHECK(s.model.omega(t.terminal()) <= best + 1e-10);
  CHECK(s.model.omega(t.terminal()) >= best - 1e-8);
  CHECK((t.terminal() - c).norm() == doctest::Approx(R).epsilon(1e-10));
}
