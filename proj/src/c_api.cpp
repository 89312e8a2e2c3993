#include "tensoraux/tensoraux.h"

#include "tensoraux/driver.hpp"

#include <cmath>
#include <exception>
#include <string>

struct ta_oracle {
  tensoraux::OraclePtr ptr;
  std::string name;
};

struct ta_result {
  std::string csv;
  std::string json;
  bool passed = false;
};

namespace {

using namespace tensoraux;

thread_local std::string last_error;

ta_status fail(ta_status s, const std::string& what) {
  last_error = what;
  return s;
}

// Maps the exception in flight to a status code.
ta_status translate() {
  try {
    throw;
  } catch (const AssertionFailure& e) {
    return fail(TA_ERR_CHECK_FAILED, e.what());
  } catch (const ParseError& e) {
    return fail(TA_ERR_IO, e.what());
  } catch (const ContractViolation& e) {
    return fail(TA_ERR_INVALID_ARGUMENT, e.what());
  } catch (const InapplicableCertificate& e) {
    return fail(TA_ERR_INVALID_ARGUMENT, e.what());
  } catch (const NotApplicable& e) {
    return fail(TA_ERR_INVALID_ARGUMENT, e.what());
  } catch (const SingularShift& e) {
    return fail(TA_ERR_NUMERICAL, e.what());
  } catch (const StepSolveError& e) {
    return fail(TA_ERR_NUMERICAL, e.what());
  } catch (const LineSearchStall& e) {
    return fail(TA_ERR_NUMERICAL, e.what());
  } catch (const InnerBudgetExhausted& e) {
    return fail(TA_ERR_NUMERICAL, e.what());
  } catch (const AuditFailure& e) {
    return fail(TA_ERR_NUMERICAL, e.what());
  } catch (const Error& e) {
    // Remaining library errors come from file access.
    return fail(TA_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(TA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TA_ERR_INTERNAL, "unknown exception");
  }
}

template <class F>
ta_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return TA_OK;
  } catch (...) {
    return translate();
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ContractViolation(what);
}

// The oracle with the Hoelder overrides of the config applied.
OraclePtr configured(const ta_oracle* oracle, const ta_config* c) {
  require(oracle != nullptr, "null oracle");
  require(c != nullptr, "null config");
  const ta_config& cfg = *c;
  const HolderInfo base = oracle->ptr->holder();
  const bool set_nu = cfg.nu >= 0.0, set_Hf = cfg.H_f >= 0.0;
  if (!set_nu && !set_Hf) return oracle->ptr;
  HolderInfo h = base;
  if (set_nu) {
    require(cfg.nu <= 1.0, "nu must lie in [0, 1]");
    require(set_Hf || cfg.nu == base.nu, "overriding nu requires H_f for that nu");
    h.nu = cfg.nu;
  }
  if (set_Hf) h.H_f = cfg.H_f;
  return with_holder(oracle->ptr, h);
}

Vector point(const OraclePtr& oracle, const double* x) {
  if (x == nullptr) return default_center(oracle);
  return Eigen::Map<const Vector>(x, oracle->dim());
}

OuterConfig outer_config(const ta_config* c, const OraclePtr& oracle) {
  require(c != nullptr, "null config");
  OuterConfig cfg;
  const double H_f = oracle->holder().H_f;
  cfg.H = c->H > 0.0 ? c->H : (H_f > 0.0 ? 2.0 * H_f : 1.0);
  cfg.theta = c->theta;
  cfg.eps = c->eps;
  cfg.L0 = c->L0;
  if (c->R0 >= 0.0) cfg.R0 = c->R0;
  cfg.seed = c->seed;
  cfg.max_outer = c->max_outer;
  cfg.max_inner = c->max_inner;
  validate(cfg);
  return cfg;
}

ta_status emit(ta_result** out, std::string csv, std::string json, bool passed) {
  *out = new ta_result{std::move(csv), std::move(json), passed};
  return TA_OK;
}

}  // namespace

extern "C" {

void ta_config_default(ta_config* cfg) {
  if (cfg == nullptr) return;
  const OuterConfig d;
  cfg->H = 0.0;
  cfg->theta = d.theta;
  cfg->eps = d.eps;
  cfg->L0 = d.L0;
  cfg->R0 = -1.0;
  cfg->nu = -1.0;
  cfg->H_f = -1.0;
  cfg->seed = d.seed;
  cfg->max_outer = d.max_outer;
  cfg->max_inner = d.max_inner;
}

ta_status ta_oracle_create(const char* name, size_t n, ta_oracle** out) {
  if (name == nullptr || out == nullptr) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    OraclePtr p = builtin_oracle(name, static_cast<Index>(n));
    *out = new ta_oracle{std::move(p), name};
  });
}

void ta_oracle_destroy(ta_oracle* oracle) { delete oracle; }

size_t ta_oracle_dim(const ta_oracle* oracle) {
  return oracle == nullptr ? 0 : static_cast<size_t>(oracle->ptr->dim());
}

const char* ta_oracle_name(const ta_oracle* oracle) { return oracle == nullptr ? "" : oracle->name.c_str(); }

ta_status ta_oracle_holder(const ta_oracle* oracle, double* nu, double* H_f) {
  if (oracle == nullptr) return fail(TA_ERR_INVALID_ARGUMENT, "null oracle");
  const HolderInfo h = oracle->ptr->holder();
  if (nu != nullptr) *nu = h.nu;
  if (H_f != nullptr) *H_f = h.H_f;
  return TA_OK;
}

ta_status ta_oracle_default_center(const ta_oracle* oracle, double* x) {
  if (oracle == nullptr || x == nullptr) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  const Vector c = default_center(oracle->ptr);
  for (Index i = 0; i < c.size(); ++i) x[i] = c(i);
  return TA_OK;
}

ta_status ta_oracle_eval(const ta_oracle* oracle, const double* x, double* f, double* grad) {
  if (oracle == nullptr || x == nullptr || f == nullptr) return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const Vector v = Eigen::Map<const Vector>(x, oracle->ptr->dim());
    *f = oracle->ptr->value(v);
    if (grad != nullptr) Eigen::Map<Vector>(grad, v.size()) = oracle->ptr->gradient(v);
  });
}

ta_status ta_run_check(const ta_oracle* oracle, const double* x, const ta_config* cfg, ta_result** out) {
  if (out == nullptr) return fail(TA_ERR_INVALID_ARGUMENT, "null result pointer");
  return guarded([&] {
    const OraclePtr o = configured(oracle, cfg);
    const OuterConfig c = outer_config(cfg, o);
    CheckResult r = run_check(o, point(o, x), c.H, c.seed);
    emit(out, "", std::move(r.json), r.passed);
  });
}

ta_status ta_solve_model(const ta_oracle* oracle, const double* x, const ta_config* cfg, double ball_radius,
                         ta_result** out) {
  if (out == nullptr) return fail(TA_ERR_INVALID_ARGUMENT, "null result pointer");
  return guarded([&] {
    const OraclePtr o = configured(oracle, cfg);
    const OuterConfig c = outer_config(cfg, o);
    const Vector p = point(o, x);
    const SimpleFunction phi = ball_radius > 0.0 ? SimpleFunction::ball(p, ball_radius) : SimpleFunction::zero();
    const ModelSolve s = solve_model(o, p, c, phi);
    emit(out, model_csv(s), model_json(s, c, oracle->name), s.passed());
  });
}

ta_status ta_minimize(const ta_oracle* oracle, const double* x, const ta_config* cfg, ta_result** out) {
  if (out == nullptr) return fail(TA_ERR_INVALID_ARGUMENT, "null result pointer");
  return guarded([&] {
    const OraclePtr o = configured(oracle, cfg);
    const OuterConfig c = outer_config(cfg, o);
    const RunReport r = minimize(o, point(o, x), c);
    emit(out, run_csv(r), run_json(r, c, oracle->name), r.passed());
  });
}

ta_status ta_bench_regimes(const ta_oracle* oracle, const double* x, const double* H_list, size_t n_H,
                           const ta_config* cfg, ta_result** out) {
  if (out == nullptr) return fail(TA_ERR_INVALID_ARGUMENT, "null result pointer");
  if (H_list == nullptr && n_H > 0) return fail(TA_ERR_INVALID_ARGUMENT, "null H list");
  return guarded([&] {
    const OraclePtr o = configured(oracle, cfg);
    const OuterConfig c = outer_config(cfg, o);
    const std::vector<double> Hs(H_list, H_list + n_H);
    const auto rows = bench_regimes(o, point(o, x), Hs, c.eps, c.L0, c.seed);
    bool passed = true;
    for (const auto& r : rows) passed = passed && r.passed();
    emit(out, bench_csv(rows), bench_json(rows, c.eps, oracle->name), passed);
  });
}

ta_status ta_report(const char* csv_text, const char* json_text, ta_result** out) {
  if (csv_text == nullptr || json_text == nullptr || out == nullptr) {
    return fail(TA_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    ReportResult r = report(csv_text, json_text);
    emit(out, "", std::move(r.json), r.passed);
  });
}

const char* ta_result_csv(const ta_result* result) { return result == nullptr ? "" : result->csv.c_str(); }
const char* ta_result_json(const ta_result* result) { return result == nullptr ? "" : result->json.c_str(); }
int ta_result_passed(const ta_result* result) { return result != nullptr && result->passed ? 1 : 0; }
void ta_result_destroy(ta_result* result) { delete result; }

const char* ta_last_error(void) { return last_error.c_str(); }

const char* ta_status_string(ta_status status) {
  switch (status) {
    case TA_OK: return "ok";
    case TA_ERR_USAGE: return "usage error";
    case TA_ERR_CHECK_FAILED: return "check failed";
    case TA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TA_ERR_IO: return "input/output error";
    case TA_ERR_NUMERICAL: return "numerical failure";
    case TA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

}  // extern "C"
