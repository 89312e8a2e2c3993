#include "support.hpp"
#include "tensoraux/driver.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace tensoraux;
using support::vec;

namespace {

OraclePtr quartic2() { return make_separable_quartic(Vector::Ones(2)); }

OuterConfig config(double H, double eps) {
  OuterConfig cfg;
  cfg.H = H;
  cfg.eps = eps;
  return cfg;
}

// Damped Newton on f, used as the reference optimum.
double newton_min(const ThirdOrderOracle& f, Vector x) {
  for (int it = 0; it < 100; ++it) {
    const Vector g = f.gradient(x);
    if (g.norm() <= 1e-14) break;
    const Vector d = f.hessian(x).ldlt().solve(-g);
    double t = 1.0;
    while (f.value(x + t * d) > f.value(x) + 1e-4 * t * g.dot(d) && t > 1e-12) t *= 0.5;
    x += t * d;
  }
  return f.value(x);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("outer step") {
  const OraclePtr q = quartic2();
  const OuterStep st = outer_step(q, Vector::Zero(2), config(12.0, 1e-6));
  CHECK(st.status == OuterStatus::f_stationary);
  CHECK(st.inner.steps() == 0);

  const Vector x = vec({1.0, 1.0});
  const OuterStep s = outer_step(q, x, config(12.0, 1e-6));
  CHECK(s.status == OuterStatus::model_point);
  const ModelInstance m(q, x, 12.0);
  CHECK(m.omega(s.x_plus) <= q->value(x));
  CHECK(m.omega_grad(s.x_plus).norm() <= 0.5 * std::pow((s.x_plus - x).norm(), 3.0));
  CHECK(s.residual <= s.residual_bound);
  CHECK(s.f_x == q->value(x));

  const OuterStep c = outer_step(q, x, config(12.0, 1e-6), SimpleFunction::zero());
  CHECK(c.x_plus == s.x_plus);
  CHECK(c.inner.steps() == s.inner.steps());

  const OuterStep b = outer_step(q, x, config(12.0, 1e-6), SimpleFunction::ball(x, 0.1));
  CHECK((b.x_plus - x).norm() <= 0.1 * (1.0 + 1e-12));
  CHECK(b.model_value <= b.f_x);

  OuterConfig bad = config(12.0, 1e-6);
  bad.eps = 1.5;
  CHECK_THROWS_AS(outer_step(q, x, bad), ContractViolation);
  OuterConfig tiny = config(12.0, 1e-6);
  tiny.max_inner = 1;
  CHECK_THROWS_AS(outer_step(q, x, tiny), InnerBudgetExhausted);
}

TEST_CASE("minimize") {
  const RunReport at_min = minimize(quartic2(), Vector::Zero(2), config(12.0, 1e-6));
  CHECK(at_min.status == "f_stationary");
  CHECK(at_min.rows.size() == 1);
  CHECK(at_min.rows[0].k == 0);

  const Dataset d = load_dataset_csv(TEST_DATA_DIR "/logistic4.csv");
  const OraclePtr f = make_logistic(d, 1e-2);
  const RunReport r = minimize(f, Vector::Zero(2), config(2.0 * f->holder().H_f, 1e-5));
  CHECK(r.status == "f_stationary");
  CHECK(r.passed());
  CHECK(r.rows.back().grad_norm <= 1e-5);
  CHECK(r.rows.size() >= 2);
  for (std::size_t k = 1; k < r.rows.size(); ++k) CHECK(r.rows[k].f < r.rows[k - 1].f);
  const double f_star = newton_min(*f, Vector::Zero(2));
  CHECK(r.rows.back().f - f_star <= 1e-8);
  CHECK(r.rows.back().f >= f_star - 1e-12);

  OuterConfig one = config(12.0, 1e-12);
  one.max_outer = 1;
  const RunReport b = minimize(quartic2(), vec({1.0, 1.0}), one);
  CHECK(b.status == "budget_exhausted");
  CHECK(b.rows.size() == 2);
}

TEST_CASE("regime bench") {
  const auto rows = bench_regimes(quartic2(), vec({1.0, 1.0}), {12.0, 9.0, 4.5}, 1e-6);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].regime == Regime::above);
  CHECK(rows[1].regime == Regime::at);
  CHECK(rows[2].regime == Regime::below);
  const Theorem expected[] = {Theorem::T5_1, Theorem::T3_10b, Theorem::T3_10a};
  for (int i = 0; i < 3; ++i) {
    REQUIRE(rows[i].certificate.has_value());
    CHECK(rows[i].certificate->certificate.theorem == expected[i]);
    CHECK(rows[i].passed());
    CHECK(rows[i].invariant_violations == 0);
    CHECK(rows[i].iterations == rows[i].trace.steps());
  }
}

TEST_CASE("CSV output is deterministic and well formed") {
  const OraclePtr q = quartic2();
  const auto a = bench_regimes(q, vec({1.0, 1.0}), {12.0, 9.0, 4.5}, 1e-6);
  const auto b = bench_regimes(q, vec({1.0, 1.0}), {12.0, 9.0, 4.5}, 1e-6);
  const std::string csv = bench_csv(a);
  CHECK(csv == bench_csv(b));
  CHECK(bench_json(a, 1e-6, "quartic") == bench_json(b, 1e-6, "quartic"));

  const auto ls = lines(csv);
  REQUIRE(!ls.empty());
  CHECK(ls[0] == "run_id,outer_k,inner_k,i_k,L_k,omega,grad_dual_norm,bregman_decrease,status");
  std::size_t expected_rows = 0;
  for (const auto& r : a) expected_rows += r.trace.rows.size();
  CHECK(ls.size() == expected_rows + 1);
  for (std::size_t i = 1; i < ls.size(); ++i) CHECK(std::count(ls[i].begin(), ls[i].end(), ',') == 8);

  // Round trip of the 17-digit values.
  std::istringstream row(ls[1]);
  std::vector<std::string> f;
  for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
  CHECK(std::stod(f[5]) == a[0].trace.rows[0].omega);
}

TEST_CASE("report re-verifies claims") {
  const OraclePtr q = quartic2();
  const auto rows = bench_regimes(q, vec({1.0, 1.0}), {12.0, 9.0, 4.5}, 1e-6);
  const std::string csv = bench_csv(rows);
  const std::string js = bench_json(rows, 1e-6, "quartic");
  const ReportResult ok = report(csv, js);
  CHECK(ok.passed);
  const auto doc = nlohmann::json::parse(ok.json);
  CHECK(doc.at("checked").get<int>() == 3);
  CHECK(doc.at("mismatches").get<int>() == 0);

  // Forge an L_k above the cap in the first run.
  auto ls = lines(csv);
  std::vector<std::string> cells;
  {
    std::istringstream row(ls[2]);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
  }
  cells[4] = "1000000";
  std::string joined;
  for (std::size_t i = 0; i < cells.size(); ++i) joined += (i ? "," : "") + cells[i];
  ls[2] = joined;
  std::string tampered;
  for (const auto& l : ls) tampered += l + "\n";
  const ReportResult bad = report(tampered, js);
  CHECK_FALSE(bad.passed);
  CHECK(nlohmann::json::parse(bad.json).at("mismatches").get<int>() >= 1);

  CHECK_THROWS_AS(report("a,b\n", js), ParseError);
  CHECK_THROWS_AS(report(csv, "{"), ParseError);

  OuterConfig cfg = config(12.0, 1e-6);
  const RunReport run = minimize(q, vec({1.0, 1.0}), cfg);
  CHECK(report(run_csv(run), run_json(run, cfg, "quartic")).passed);
  const ModelSolve ms = solve_model(q, vec({1.0, 1.0}), cfg, SimpleFunction::ball(vec({1.0, 1.0}), 0.3));
  CHECK(ms.passed());
  CHECK(report(model_csv(ms), model_json(ms, cfg, "quartic")).passed);
}

TEST_CASE("built-in problems and the property sweep") {
  for (const char* name : {"quadratic", "quartic", "separable_quartic", "lse", "log_sum_exp", "logistic"}) {
    const OraclePtr o = builtin_oracle(name, 3);
    CHECK(o->dim() == 3);
    const CheckResult r = run_check(o, default_center(o), 2.0 * std::max(o->holder().H_f, 0.5), 42);
    CHECK_MESSAGE(r.passed, name);
    CHECK(nlohmann::json::parse(r.json).is_object());
  }
  CHECK(builtin_oracle("csv:" TEST_DATA_DIR "/logistic4.csv", 99)->dim() == 2);
  CHECK_THROWS_AS(builtin_oracle("nonsense", 2), ContractViolation);
  CHECK(default_center(builtin_oracle("logistic", 2)) == Vector::Zero(2));
  CHECK(default_center(builtin_oracle("quartic", 2)) == Vector::Ones(2));
}
