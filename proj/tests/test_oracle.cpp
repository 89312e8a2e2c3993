#include "support.hpp"
#include "tensoraux/errors.hpp"
#include "tensoraux/oracle.hpp"
#include "tensoraux/tensor_model.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace tensoraux;
using support::vec;

namespace {

// Wraps an oracle and scales its gradient, to plant a derivative fault.
class ScaledGradient final : public ThirdOrderOracle {
 public:
  ScaledGradient(OraclePtr inner, double factor) : inner_(std::move(inner)), factor_(factor) {}
  Index dim() const override { return inner_->dim(); }
  std::string name() const override { return "scaled"; }
  double value(const Vector& x) const override { return inner_->value(x); }
  Vector gradient(const Vector& x) const override { return factor_ * inner_->gradient(x); }
  SymForm2 hessian(const Vector& x) const override { return inner_->hessian(x); }
  SymForm3 third(const Vector& x) const override { return inner_->third(x); }
  HolderInfo holder() const override { return inner_->holder(); }

 private:
  OraclePtr inner_;
  double factor_;
};

class NanValue final : public ThirdOrderOracle {
 public:
  Index dim() const override { return 2; }
  std::string name() const override { return "nan"; }
  double value(const Vector&) const override { return std::nan(""); }
  Vector gradient(const Vector&) const override { return Vector::Constant(2, std::nan("")); }
  SymForm2 hessian(const Vector&) const override { return Matrix::Identity(2, 2); }
  SymForm3 third(const Vector&) const override { return SymForm3::zero(2); }
  HolderInfo holder() const override { return {1.0, 0.0}; }
};

std::vector<OraclePtr> builtins() {
  std::mt19937_64 rng(17);
  const Matrix A = support::random_vector(rng, 15).reshaped(5, 3);
  Dataset d{support::random_vector(rng, 18).reshaped(6, 3), vec({1, -1, 1, 1, -1, -1})};
  return {make_quadratic(support::random_spd(rng, 3, 0.0), support::random_vector(rng, 3)),
          make_separable_quartic(vec({1.0, 0.5, 2.0})), make_log_sum_exp(A, support::random_vector(rng, 5), 0.8),
          make_logistic(d, 0.05)};
}

}  // namespace

TEST_CASE("separable quartic derivatives") {
  const OraclePtr q = make_separable_quartic(Vector::Ones(2));
  const Vector x = vec({1, 1});
  CHECK(q->value(x) == doctest::Approx(0.5));
  CHECK((q->gradient(x) - vec({1, 1})).norm() <= 1e-15);
  CHECK((q->hessian(x) - 3.0 * Matrix::Identity(2, 2)).norm() <= 1e-15);
  const Vector h = vec({0.3, -0.8});
  CHECK(q->third(x).cubic(h) == doctest::Approx(6.0 * (0.027 - 0.512)).epsilon(1e-13));
  CHECK(q->holder().nu == 1.0);
  CHECK(q->holder().H_f == 6.0);
}

TEST_CASE("quadratic has zero third derivative") {
  const OraclePtr q = make_quadratic(Matrix::Identity(3, 3), Vector::Zero(3));
  CHECK(q->third(vec({1, 2, 3})).apply(vec({1, 1, 1})).norm() == 0.0);
  CHECK(q->holder().nu == 1.0);
  CHECK(q->holder().H_f == 0.0);
}

TEST_CASE("constructor validation") {
  Matrix indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(make_quadratic(indef, Vector::Zero(2)), ContractViolation);
  CHECK_THROWS_AS(make_quadratic(Matrix::Identity(2, 2), Vector::Zero(3)), ContractViolation);
  CHECK_THROWS_AS(make_separable_quartic(vec({1, -1})), ContractViolation);
  CHECK_THROWS_AS(make_log_sum_exp(Matrix::Identity(2, 2), Vector::Zero(2), 0.0), ContractViolation);
  CHECK_THROWS_AS(make_logistic(Dataset{Matrix::Identity(2, 2), vec({1, 1})}, -1.0), ContractViolation);
}

TEST_CASE("logistic Hessian is PSD on the 4-sample dataset") {
  const Dataset d = load_dataset_csv(TEST_DATA_DIR "/logistic4.csv");
  const OraclePtr f = make_logistic(d, 0.0);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vector x = support::random_vector(rng, 2, 3.0);
    const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(f->hessian(x)).eigenvalues()(0);
    CHECK(lo >= -1e-14);
  }
}

TEST_CASE("finite-difference audit") {
  const OraclePtr q = make_separable_quartic(Vector::Ones(2));
  const AuditReport r = fd_audit(*q, vec({0.3, -0.7}), 1e-5);
  CHECK(r.passes(1e-6));
  CHECK(r.directions == 4);

  const AuditReport fault = fd_audit(ScaledGradient(q, 1.01), vec({0.3, -0.7}), 1e-5);
  CHECK(fault.max_rel_error[0] == doctest::Approx(1e-2).epsilon(0.05));
  CHECK_FALSE(fault.passes(1e-4));

  const OraclePtr quad = make_quadratic(Matrix::Identity(2, 2), vec({1, -1}));
  CHECK(fd_audit(*quad, vec({0.5, 2.0})).max_rel_error[2] <= 1e-8);

  CHECK_THROWS_AS(fd_audit(NanValue(), vec({0, 0})), AuditFailure);
  CHECK_THROWS_AS(fd_audit(*q, vec({0, 0}), 0.0), ContractViolation);
}

TEST_CASE("derivative audit over the unit ball for every built-in") {
  std::mt19937_64 rng(23);
  for (const OraclePtr& o : builtins()) {
    for (int i = 0; i < 100; ++i) {
      const Vector x = support::random_in_ball(rng, o->dim(), 1.0);
      CHECK(fd_audit(*o, x, 1e-5, i).passes(1e-4));
    }
  }
}

TEST_CASE("Hoelder estimates stay below the metadata") {
  const OraclePtr q = make_separable_quartic(Vector::Ones(2));
  const double est = holder_estimate(*q, 1.0, 1000, 1.0);
  CHECK(est <= 6.0 + 1e-12);
  CHECK(est >= 5.0);
  CHECK(holder_estimate(*make_quadratic(Matrix::Identity(2, 2), Vector::Zero(2)), 1.0, 50, 1.0) == 0.0);
  for (const OraclePtr& o : builtins()) {
    CHECK(holder_estimate(*o, 1.0, 1000, 1.0) <= o->holder().H_f + 1e-8);
  }
}

TEST_CASE("Taylor deviation bounds") {
  std::mt19937_64 rng(31);
  for (const OraclePtr& o : builtins()) {
    const HolderInfo h = o->holder();
    for (int i = 0; i < 20; ++i) {
      const Vector x = support::random_in_ball(rng, o->dim(), 1.0);
      const ModelInstance m(o, x, 1.0);
      for (int j = 0; j < 10; ++j) {
        const Vector y = x + support::random_in_ball(rng, o->dim(), 1.5);
        const double r = (y - x).norm();
        CHECK((o->gradient(y) - m.phi_grad(y)).norm() <= 0.5 * h.H_f * std::pow(r, 2.0 + h.nu) + 1e-8);
        CHECK(std::abs(o->value(y) - m.phi(y)) <= h.H_f / 6.0 * std::pow(r, 3.0 + h.nu) + 1e-8);
      }
    }
  }
}

TEST_CASE("Hoelder override") {
  const OraclePtr q = with_holder(make_separable_quartic(Vector::Ones(2)), {0.5, 9.0});
  CHECK(q->holder().nu == 0.5);
  CHECK(q->holder().H_f == 9.0);
  CHECK(q->value(vec({1, 1})) == doctest::Approx(0.5));
  CHECK_THROWS_AS(with_holder(q, {1.5, 1.0}), ContractViolation);
}

TEST_CASE("dataset parsing") {
  const Dataset d = parse_dataset_csv("1,2,1\n0,1,-1\n2,0,1");
  CHECK(d.features.rows() == 3);
  CHECK(d.features.cols() == 2);
  CHECK((d.labels - vec({1, -1, 1})).norm() == 0.0);
  CHECK(d.features(2, 0) == 2.0);

  const Dataset file = load_dataset_csv(TEST_DATA_DIR "/three_rows.csv");
  CHECK(file.features == d.features);

  const Dataset zero_one = parse_dataset_csv("1,0\n2,1\n");
  CHECK((zero_one.labels - vec({-1, 1})).norm() == 0.0);

  try {
    load_dataset_csv(TEST_DATA_DIR "/bad_field.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_dataset_csv(""), ParseError);
  CHECK_THROWS_AS(parse_dataset_csv("1,2,3\n1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_dataset_csv("1,2,5\n"), ParseError);
  CHECK_THROWS_AS(load_dataset_csv(TEST_DATA_DIR "/does_not_exist.csv"), Error);
}
