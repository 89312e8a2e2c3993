// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include "tensoraux/certificates.hpp"
#include "tensoraux/driver.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace tensoraux;
namespace fs = std::filesystem;

namespace {

struct Tally {
  long checks = 0;
  long failures = 0;
  std::string first_failure;
  std::string summary;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (failures++ == 0) first_failure = what;
  }
};

Vector random_vector(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

Vector random_in_ball(std::mt19937_64& rng, Index n, double radius) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector d = random_vector(rng, n);
  d /= d.norm();
  return radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n)) * d;
}

Matrix random_psd(std::mt19937_64& rng, Index n, double floor) {
  const Matrix G = random_vector(rng, n * n).reshaped(n, n);
  return G * G.transpose() / static_cast<double>(n) + floor * Matrix::Identity(n, n);
}

double min_eig(const Matrix& A) { return Eigen::SelfAdjointEigenSolver<Matrix>(A).eigenvalues()(0); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Every adaptive and composite trace produced by the suite, for criterion 5.
struct RecordedRun {
  std::shared_ptr<ModelInstance> model;
  IterationTrace trace;
};
std::vector<RecordedRun> g_runs;

IterationTrace adaptive(const ModelInstance& m, const Vector& y0, double L0, std::vector<StopRule> stops) {
  IterationTrace t = solve_adaptive(m, Geometry::from_model(m), y0, L0, stops);
  g_runs.push_back({std::make_shared<ModelInstance>(m), t});
  return t;
}

IterationTrace composite(const ModelInstance& m, const SimpleFunction& phi, const Vector& y0, double eps) {
  IterationTrace t = solve_fixed_composite(m, Geometry::from_model(m), phi, y0, {GradTol{eps}});
  g_runs.push_back({std::make_shared<ModelInstance>(m), t});
  return t;
}

std::vector<std::pair<std::string, OraclePtr>> builtins() {
  return {{"quadratic", builtin_oracle("quadratic", 4)},
          {"separable_quartic", builtin_oracle("separable_quartic", 4)},
          {"log_sum_exp", builtin_oracle("log_sum_exp", 3)},
          {"logistic", builtin_oracle("logistic", 3)}};
}

// The two desk instances of criteria 6, 8 and 9.
struct Instance {
  std::string name;
  OraclePtr oracle;
  Vector x;
};

std::vector<Instance> instances() {
  Vector xq(2);
  xq << 1.0, 1.0;
  return {{"quartic", make_separable_quartic(Vector::Ones(2)), xq},
          {"lse", builtin_oracle("lse", 3), Vector::Ones(3)}};
}

double strong_threshold(const OraclePtr& f) { return 6.0 * f->holder().H_f / (3.0 + f->holder().nu); }

Tally derivative_audit() {
  Tally t;
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (const auto& [name, f] : builtins()) {
    for (int i = 0; i < 100; ++i) {
      const AuditReport r = fd_audit(*f, random_in_ball(rng, f->dim(), 1.0), 1e-5, i);
      for (double e : r.max_rel_error) worst = std::max(worst, e);
      t.expect(r.passes(1e-4), name + " audit error above 1e-4");
    }
  }
  t.summary = fmt("4 oracles x 100 points, worst relative error %.2e", worst);
  return t;
}

Tally hessian_sandwich() {
  Tally t;
  const OraclePtr f = make_separable_quartic(Vector::Ones(2));
  Vector x(2);
  x << 1.0, 1.0;
  const ModelInstance m(f, x, 12.0);
  const Geometry geo = Geometry::from_model(m);
  const ModelConstants c = model_constants(6.0, 1.0, 12.0);
  const double D = sublevel_radius(m, compute_norms(m));
  std::mt19937_64 rng(2);
  double lo_upper = INFINITY, lo_lower = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const Vector y = x + random_in_ball(rng, 2, D);
    const Matrix Hr = geo.rho_hess(y), Ho = m.omega_hess(y);
    const double a = min_eig(c.L_H * Hr - Ho), b = min_eig(Ho - *c.mu_H * Hr);
    lo_upper = std::min(lo_upper, a);
    lo_lower = std::min(lo_lower, b);
    t.expect(a >= -1e-8 && b >= -1e-8, "sandwich violated");
  }
  t.summary = fmt("1000 points in the D=%.3g ball, min eigenvalues %.2e / %.2e", D, lo_upper, lo_lower);
  return t;
}

Tally uniform_convexity() {
  Tally t;
  std::mt19937_64 rng(3);
  double worst = INFINITY;
  for (double nu : {0.0, 0.5, 1.0}) {
    const Index n = 3;
    const Vector x = random_vector(rng, n);
    const MetricOperator B(random_psd(rng, n, 0.5));
    const Geometry geo(x, random_psd(rng, n, 0.0), nu, B);
    const double q = 3.0 + nu, sigma = std::exp2(-(1.0 + nu));
    for (int i = 0; i < 1000; ++i) {
      const Vector u = x + random_vector(rng, n), v = x + random_vector(rng, n);
      const double slack = geo.bregman(u, v) - sigma / q * std::pow(B.primal_norm(u - v), q);
      worst = std::min(worst, slack);
      t.expect(slack >= -1e-10, "uniform convexity violated");
    }
  }
  t.summary = fmt("3000 pairs, smallest slack %.2e", worst);
  return t;
}

Tally step_exactness() {
  Tally t;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Index n = 1 + static_cast<Index>(u(rng) * 10);
    const double nu = std::array{0.0, 0.5, 1.0}[i % 3];
    const Vector x = random_vector(rng, n);
    const Matrix H0 = i % 7 == 0 ? Matrix(Matrix::Zero(n, n)) : random_psd(rng, n, 0.0);
    const MetricOperator B(random_psd(rng, n, 0.2));
    const Geometry geo(x, H0, nu, B);
    const Vector y = x + random_vector(rng, n);
    const Vector g = random_vector(rng, n, std::pow(10.0, 4.0 * u(rng) - 2.0));
    const double M = std::pow(10.0, 3.0 * u(rng) - 1.0);
    const Vector c = geo.rho_grad(y) - g / M;
    const Vector z = geo.step(y, g, M);
    const double rel = B.dual_norm(geo.rho_grad(z) - c) / std::max(1.0, B.dual_norm(c));
    worst = std::max(worst, rel);
    t.expect(rel <= 1e-9, "stationarity residual above 1e-9");
  }

  // Brute force in the plane: grid then compass refinement of the subproblem.
  double worst_dist = 0.0;
  for (int i = 0; i < 30; ++i) {
    const double nu = std::array{0.0, 0.5, 1.0}[i % 3];
    const Vector x = random_vector(rng, 2);
    const Matrix H0 = random_psd(rng, 2, 0.0);
    const Geometry geo(x, H0, nu, MetricOperator::identity(2));
    const Vector y = x + random_vector(rng, 2, 0.5);
    const Vector g = random_vector(rng, 2);
    const double M = 0.5 + 2.0 * u(rng);
    auto rho = [&](const Vector& v) {
      const Vector s = v - x;
      return 0.5 * s.dot(H0 * s) + std::pow(s.norm(), 3.0 + nu) / (3.0 + nu);
    };
    const Vector gy = geo.rho_grad(y);
    auto obj = [&](const Vector& v) { return g.dot(v - y) + M * (rho(v) - rho(y) - gy.dot(v - y)); };
    Vector best = y;
    double fb = obj(y);
    const double w = 4.0;
    for (int a = 0; a <= 400; ++a)
      for (int b = 0; b <= 400; ++b) {
        Vector p(2);
        p << y(0) - w + 2.0 * w * a / 400, y(1) - w + 2.0 * w * b / 400;
        if (const double v = obj(p); v < fb) fb = v, best = p;
      }
    for (double h = 2.0 * w / 400; h > 1e-12;) {
      bool moved = false;
      for (int d = 0; d < 8; ++d) {
        const double ang = d * std::numbers::pi / 4.0;
        Vector p = best;
        p(0) += h * std::cos(ang);
        p(1) += h * std::sin(ang);
        if (const double v = obj(p); v < fb) fb = v, best = p, moved = true;
      }
      if (!moved) h *= 0.5;
    }
    const double dist = (geo.step(y, g, M) - best).norm();
    worst_dist = std::max(worst_dist, dist);
    t.expect(dist <= 1e-6, "step differs from the brute-force minimizer");
  }
  t.summary = fmt("1000 steps, worst residual %.2e; 30 planar brute-force cases, worst distance %.2e", worst,
                  worst_dist);
  return t;
}

struct CertificateRun {
  std::size_t iterations = 0;
  double predicted = 0.0;
};

CertificateRun certify(Tally& t, const ModelInstance& m, const IterationTrace& tr, Theorem th, double eps,
                       const std::string& label) {
  const CertificateInputs in = certificate_inputs(m, compute_norms(m), 1.0, eps);
  const Certificate c = certificate(th, in);
  const CertificateCheck chk = certificate_check(tr, c);
  t.expect(chk.status == CheckStatus::pass, label + " " + theorem_name(th) + ": " + chk.detail);
  t.expect(static_cast<double>(tr.steps()) <= std::max(c.predicted_T, 0.0) || chk.vacuous,
           label + " iterations above predicted_T");
  return {tr.steps(), c.predicted_T};
}

Tally certificates() {
  Tally t;
  std::ostringstream notes;
  for (const Instance& inst : instances()) {
    const double thr = strong_threshold(inst.oracle);
    const double H_above = std::max(12.0, 4.0 / 3.0 * thr);

    const ModelInstance above(inst.oracle, inst.x, H_above);
    std::vector<double> counts, slopes;
    for (double eps : {1e-4, 1e-6, 1e-8}) {
      const IterationTrace tr = adaptive(above, inst.x, 1.0, {GradTol{eps}});
      const CertificateRun r = certify(t, above, tr, Theorem::T5_1, eps, inst.name);
      counts.push_back(static_cast<double>(r.iterations));
      slopes.push_back(r.predicted / std::log2(1.0 / eps));
    }
    const double step = std::log2(100.0);
    const double inc1 = counts[1] - counts[0], inc2 = counts[2] - counts[1];
    t.expect(inc1 / step <= 2.0 * slopes[0] && inc2 / step <= 2.0 * slopes[0], inst.name + " increment above slope");
    const double ratio = std::max(inc1, 1.0) / std::max(inc2, 1.0);
    t.expect(ratio >= 0.5 && ratio <= 2.0, inst.name + " increments not additive in log(1/eps)");
    notes << inst.name << " counts " << counts[0] << "/" << counts[1] << "/" << counts[2] << "; ";

    const ModelInstance at(inst.oracle, inst.x, thr);
    certify(t, at, adaptive(at, inst.x, 1.0, {GradTol{1e-6}}), Theorem::T3_10b, 1e-6, inst.name);
    const ModelInstance below(inst.oracle, inst.x, 0.5 * thr);
    certify(t, below, adaptive(below, inst.x, 1.0, {GradTol{1e-6}}), Theorem::T3_10a, 1e-6, inst.name);

    const ModelInstance comp(inst.oracle, inst.x, std::max(2.0 * inst.oracle->holder().H_f, 1.0));
    const IterationTrace free = composite(comp, SimpleFunction::zero(), inst.x, 1e-6);
    const double R = 0.5 * (free.terminal() - inst.x).norm();
    const IterationTrace ball = composite(comp, SimpleFunction::ball(inst.x, R), inst.x, 1e-6);
    t.expect(ball.rows.back().multiplier > 0.0 || ball.rows[ball.rows.size() - 2].multiplier > 0.0,
             inst.name + " ball not active");
    for (Theorem th : {Theorem::T4_2, Theorem::CA_10}) {
      certify(t, comp, free, th, 1e-6, inst.name + " phi=0");
      certify(t, comp, ball, th, 1e-6, inst.name + " ball");
    }
  }
  t.summary = notes.str() + "T5_1, T3_10b, T3_10a, T4_2, CA_10 all within bounds";
  return t;
}

Tally line_search() {
  Tally t;
  long rows = 0;
  for (const RecordedRun& run : g_runs) {
    const ModelInstance& m = *run.model;
    const Geometry geo = Geometry::from_model(m);
    const ModelConstants c = model_constants(m.H_f(), m.nu(), m.H());
    const IterationTrace& tr = run.trace;
    for (std::size_t k = 0; k + 1 < tr.iterates.size(); ++k) {
      ++rows;
      const Vector& y = tr.iterates[k];
      const Vector& z = tr.iterates[k + 1];
      const double decrease = m.omega(y) - m.omega(z);
      if (tr.composite) {
        t.expect(decrease >= c.L_H * geo.bregman(y, z) - 1e-10, "composite decrease violated");
      } else {
        t.expect(tr.rows[k].L_k <= std::max(tr.L0, 2.0 * c.L_H) * (1.0 + 1e-12), "L_k above the cap");
        t.expect(decrease >= 2.0 * tr.rows[k + 1].L_k * geo.bregman(z, y) - 1e-10, "decrease below 2 L beta");
      }
    }
  }
  t.summary = std::to_string(g_runs.size()) + " solver runs, " + std::to_string(rows) + " steps re-checked";
  return t;
}

Tally inexact_acceptance() {
  Tally t;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto oracles = builtins();
  int model_points = 0;
  for (int i = 0; i < 20; ++i) {
    const OraclePtr& f = oracles[static_cast<std::size_t>(i) % oracles.size()].second;
    const double H_f = f->holder().H_f;
    const bool comp = i % 2 == 1;
    OuterConfig cfg;
    cfg.H = H_f > 0.0 ? H_f * ((comp ? 2.0 : 1.0) + 2.0 * u(rng)) : 0.5 + 4.0 * u(rng);
    cfg.theta = 0.1 + u(rng);
    cfg.eps = 1e-6;
    const Vector x = random_in_ball(rng, f->dim(), 2.0);
    const SimpleFunction phi = comp ? SimpleFunction::ball(x, 0.05 + 0.5 * u(rng)) : SimpleFunction::zero();
    try {
      const OuterStep s = outer_step(f, x, cfg, phi);
      if (s.status != OuterStatus::model_point) continue;
      ++model_points;
      const ModelInstance m(f, x, cfg.H);
      const MetricOperator& B = m.metric();
      const double ph = phi.eval(s.x_plus, B);
      t.expect(m.omega(s.x_plus) + ph <= f->value(x) + phi.eval(x, B) + 1e-12 * std::max(1.0, std::abs(f->value(x))),
               "model value above f(x)");
      Vector r = m.omega_grad(s.x_plus);
      if (comp) r += s.inner.gphi.back();
      t.expect(B.dual_norm(r) <= cfg.theta * std::pow(B.primal_norm(s.x_plus - x), 2.0 + m.nu()),
               "gradient condition violated");
    } catch (const Error& e) {
      t.expect(false, e.what());
    }
  }
  t.summary = "20 outer steps (10 composite), " + std::to_string(model_points) + " model-point exits verified";
  return t;
}

Tally subgradient_recovery() {
  Tally t;
  double worst = 0.0;
  for (const Instance& inst : instances()) {
    const ModelInstance m(inst.oracle, inst.x, std::max(2.0 * inst.oracle->holder().H_f, 1.0));
    const IterationTrace z = composite(m, SimpleFunction::zero(), inst.x, 1e-8);
    for (const Vector& g : z.gphi) {
      worst = std::max(worst, m.metric().dual_norm(g));
      t.expect(m.metric().dual_norm(g) <= 1e-8, inst.name + " g_phi nonzero for phi = 0");
    }
    const SimpleFunction ball = SimpleFunction::ball(inst.x, 0.3 * (z.terminal() - inst.x).norm());
    const IterationTrace b = composite(m, ball, inst.x, 1e-8);
    for (std::size_t k = 0; k < b.gphi.size(); ++k) {
      t.expect(subgradient_check(ball, b.iterates[k], b.gphi[k], m.metric()), inst.name + " g_phi not a subgradient");
    }
    const double u = m.metric().dual_norm(m.omega_grad(b.terminal()) + b.gphi.back());
    t.expect(u <= 1e-8, inst.name + " terminal residual above eps");
    t.expect(b.gphi.back().norm() > 0.0, inst.name + " ball inactive");
  }
  t.summary = fmt("max ||g_phi|| for phi = 0: %.2e; ball runs end with ||u|| <= 1e-8", worst);
  return t;
}

Tally coercivity() {
  Tally t;
  std::mt19937_64 rng(9);
  long sampled = 0;
  for (const Instance& inst : instances()) {
    for (double scale : {0.5, 1.0, 3.0}) {
      const ModelInstance m(inst.oracle, inst.x, scale * inst.oracle->holder().H_f);
      const ModelNorms norms = compute_norms(m);
      const double r = 1.01 * coercive_radius(m, norms, m.f0());
      for (int i = 0; i < 100; ++i) {
        Vector d = random_vector(rng, m.dim());
        d /= d.norm();
        t.expect(m.omega(inst.x + r * d) > m.f0(), inst.name + " coercive radius too small");
      }
      const double D = sublevel_radius(m, norms);
      int found = 0;
      for (int i = 0; i < 3000000 && found < 1000; ++i) {
        const Vector y = inst.x + random_in_ball(rng, m.dim(), 1.5 * D);
        if (m.omega(y) > m.f0()) continue;
        ++found;
        t.expect((y - inst.x).norm() <= D, inst.name + " sublevel point outside D");
      }
      sampled += found;
    }
  }
  t.summary = "600 directions, " + std::to_string(sampled) + " sublevel points inside D";
  return t;
}

Tally determinism() {
  Tally t;
  const fs::path dir = fs::temp_directory_path() / "tensoraux_acceptance";
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir / ("bench" + std::to_string(i) + ".csv");
    fs::remove(out);
    const std::string cmd = std::string(TENSORAUX_CLI) +
                            " bench-regimes --oracle quartic --center 1,1 --H-list 12,9,4.5 --eps 1e-8 --seed 42 --out " +
                            out.string() + " >/dev/null 2>&1";
    t.expect(std::system(cmd.c_str()) == 0, "bench-regimes failed");
    std::ifstream in(out, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    outputs.push_back(ss.str());
  }
  t.expect(!outputs[0].empty(), "empty CSV");
  t.expect(outputs[0] == outputs[1], "CSV outputs differ");
  t.summary = std::to_string(outputs[0].size()) + " bytes, identical across two runs";
  return t;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Tally()> run;
  };
  // Criterion 5 re-checks the runs recorded by 6 and 8, so it runs after them.
  const std::vector<std::pair<int, Criterion>> order = {
      {1, {"derivative audit", derivative_audit}},
      {2, {"Hessian sandwich", hessian_sandwich}},
      {3, {"uniform convexity", uniform_convexity}},
      {4, {"Bregman step exactness", step_exactness}},
      {6, {"complexity certificates", certificates}},
      {7, {"inexact acceptance", inexact_acceptance}},
      {8, {"composite subgradient recovery", subgradient_recovery}},
      {5, {"line search and decrease", line_search}},
      {9, {"coercivity and sublevel radius", coercivity}},
      {10, {"determinism", determinism}},
  };
  std::vector<std::string> lines(11);
  int failed = 0;
  for (const auto& [id, c] : order) {
    const auto start = std::chrono::steady_clock::now();
    Tally t;
    try {
      t = c.run();
    } catch (const std::exception& e) {
      t.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = t.failures == 0 && t.checks > 0;
    failed += ok ? 0 : 1;
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << c.name << "): " << t.checks << " checks";
    if (!ok) line << ", " << t.failures << " failed, first: " << t.first_failure;
    line << "; " << t.summary << " [" << fmt("%.1fs", secs) << "]";
    lines[static_cast<std::size_t>(id)] = line.str();
  }
  for (std::size_t i = 1; i < lines.size(); ++i) std::printf("%s\n", lines[i].c_str());
  return failed == 0 ? 0 : 1;
}
