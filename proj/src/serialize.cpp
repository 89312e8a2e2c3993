#include "tensoraux/driver.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string_view>

namespace tensoraux {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json certificate_json(const CertificateRecord& r) {
  const Certificate& c = r.certificate;
  json inputs = json::object();
  for (const auto& [k, v] : c.inputs) inputs[k] = v;
  return {{"theorem", theorem_name(c.theorem)},
          {"inputs", inputs},
          {"predicted_T", c.predicted_T},
          {"validity_floor", c.validity_floor ? json(*c.validity_floor) : json(nullptr)},
          {"index_offset", c.index_offset},
          {"multiple_of_three", c.multiple_of_three},
          {"note", c.note},
          {"status", check_status_name(r.check.status)},
          {"certified_T", r.check.certified_T},
          {"vacuous", r.check.vacuous},
          {"cap_violations", r.check.cap_violations},
          {"decrease_violations", r.check.decrease_violations},
          {"detail", r.check.detail}};
}

json certificates_json(const std::vector<CertificateRecord>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back(certificate_json(r));
  return out;
}

json config_json(const OuterConfig& cfg) {
  return {{"H", cfg.H},         {"theta", cfg.theta}, {"eps", cfg.eps},
          {"max_outer", cfg.max_outer}, {"L0", cfg.L0},
          {"R0", cfg.R0 ? json(*cfg.R0) : json(nullptr)},
          {"seed", cfg.seed},   {"max_inner", cfg.max_inner}};
}

json constants_json(const ModelConstants& c) {
  return {{"tau_H", std::isfinite(c.tau_H) ? json(c.tau_H) : json(nullptr)},
          {"L_H", c.L_H},
          {"mu_H", c.mu_H ? json(*c.mu_H) : json(nullptr)},
          {"convex_threshold", c.convex_threshold},
          {"strong_threshold", c.strong_threshold},
          {"regime", regime_name(c.regime)}};
}

}  // namespace

std::string csv_header() { return "run_id,outer_k,inner_k,i_k,L_k,omega,grad_dual_norm,bregman_decrease,status\n"; }

std::string csv_rows(const std::string& run_id, std::size_t outer_k, const IterationTrace& trace) {
  std::string out;
  for (const TraceRow& row : trace.rows) {
    const bool last = row.i_k < 0;
    out += run_id + ',' + std::to_string(outer_k) + ',' + std::to_string(row.k) + ',' + std::to_string(row.i_k) +
           ',' + num(row.L_k) + ',' + num(row.omega) + ',' + num(row.grad_norm) + ',' + num(row.decrease) + ',' +
           (last ? status_name(trace.status) : "step") + '\n';
  }
  return out;
}

std::string run_csv(const RunReport& report) {
  std::string out = csv_header();
  for (std::size_t k = 0; k < report.traces.size(); ++k) out += csv_rows("run", k, report.traces[k]);
  return out;
}

std::string run_json(const RunReport& report, const OuterConfig& cfg, const std::string& oracle_name) {
  json out;
  out["command"] = "minimize";
  out["oracle"] = oracle_name;
  out["config"] = config_json(cfg);
  out["status"] = report.status;
  out["outer_iterations"] = report.rows.empty() ? 0 : report.rows.size() - 1;
  out["wall_seconds"] = report.wall_seconds;
  json rows = json::array(), runs = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"outer_k", r.k},
                    {"x", vector_json(r.x)},
                    {"f", r.f},
                    {"grad_dual_norm", r.grad_norm},
                    {"inner_iterations", r.inner_iterations},
                    {"inner_status", r.inner_status},
                    {"invariant_checks", r.invariant_checks},
                    {"invariant_violations", r.invariant_violations}});
    if (!r.inner_status.empty()) {
      runs.push_back({{"run_id", "run"}, {"outer_k", r.k}, {"certificates", certificates_json(r.certificates)}});
    }
  }
  out["rows"] = rows;
  out["runs"] = runs;
  out["passed"] = report.passed();
  return out.dump(2);
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = csv_header();
  for (std::size_t i = 0; i < rows.size(); ++i) out += csv_rows("H" + std::to_string(i), 0, rows[i].trace);
  return out;
}

std::string bench_json(const std::vector<BenchRow>& rows, double eps, const std::string& oracle_name) {
  json out;
  out["command"] = "bench-regimes";
  out["oracle"] = oracle_name;
  out["eps"] = eps;
  json table = json::array(), runs = json::array();
  bool passed = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BenchRow& r = rows[i];
    const std::string id = "H" + std::to_string(i);
    json row = {{"run_id", id},
                {"H", r.H},
                {"regime", regime_name(r.regime)},
                {"iterations", r.iterations},
                {"invariant_violations", r.invariant_violations},
                {"passed", r.passed()}};
    json certs = json::array();
    if (r.certificate) {
      row["certificate"] = theorem_name(r.certificate->certificate.theorem);
      row["predicted_T"] = r.certificate->certificate.predicted_T;
      row["check"] = check_status_name(r.certificate->check.status);
      certs.push_back(certificate_json(*r.certificate));
    } else {
      row["certificate"] = nullptr;
      row["check"] = "not_applicable";
    }
    table.push_back(row);
    runs.push_back({{"run_id", id}, {"outer_k", 0}, {"certificates", certs}});
    passed = passed && r.passed();
  }
  out["rows"] = table;
  out["runs"] = runs;
  out["passed"] = passed;
  return out.dump(2);
}

std::string model_csv(const ModelSolve& solve) { return csv_header() + csv_rows("model", 0, solve.trace); }

std::string model_json(const ModelSolve& solve, const OuterConfig& cfg, const std::string& oracle_name) {
  const ModelInstance& m = solve.model;
  json out;
  out["command"] = "solve-model";
  out["oracle"] = oracle_name;
  out["config"] = config_json(cfg);
  out["center"] = vector_json(m.center());
  out["holder"] = {{"nu", m.nu()}, {"H_f", m.H_f()}};
  out["constants"] = constants_json(model_constants(m.H_f(), m.nu(), m.H()));
  out["composite"] = solve.trace.composite;
  out["status"] = status_name(solve.trace.status);
  out["iterations"] = solve.trace.steps();
  out["terminal"] = vector_json(solve.trace.terminal());
  out["terminal_residual"] = solve.trace.rows.back().grad_norm;
  out["invariant_checks"] = solve.invariant_checks;
  out["invariant_violations"] = solve.invariant_violations;
  out["invariant_messages"] = solve.messages;
  out["runs"] = json::array({{{"run_id", "model"}, {"outer_k", 0}, {"certificates", certificates_json(solve.certificates)}}});
  out["passed"] = solve.passed();
  return out.dump(2);
}

namespace {

struct CsvRow {
  std::size_t inner_k = 0;
  int i_k = -1;
  double L_k = 0.0;
  double grad = 0.0;
  double decrease = 0.0;
};

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

template <class T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(line, "not a number: '" + std::string(field) + "'");
  }
  return value;
}

using RunKey = std::pair<std::string, std::size_t>;

std::map<RunKey, std::vector<CsvRow>> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  std::map<RunKey, std::vector<CsvRow>> runs;
  bool header = true;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    if (header) {
      if (raw + '\n' != csv_header()) throw ParseError(line, "unexpected CSV header");
      header = false;
      continue;
    }
    const auto f = split(raw);
    if (f.size() != 9) throw ParseError(line, "expected 9 fields");
    CsvRow row;
    row.inner_k = parse_number<std::size_t>(f[2], line);
    row.i_k = parse_number<int>(f[3], line);
    row.L_k = parse_number<double>(f[4], line);
    row.grad = parse_number<double>(f[6], line);
    row.decrease = parse_number<double>(f[7], line);
    auto& rows = runs[{std::string(f[0]), parse_number<std::size_t>(f[1], line)}];
    if (row.inner_k != rows.size()) throw ParseError(line, "inner_k out of sequence");
    rows.push_back(row);
  }
  if (header) throw ParseError(line, "empty CSV");
  return runs;
}

CertificateInputs inputs_from(const json& named) {
  CertificateInputs in;
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!named.contains(key)) return std::nullopt;
    return named.at(key).get<double>();
  };
  in.eps = named.at("eps").get<double>();
  in.H = named.at("H").get<double>();
  in.H_f = named.at("H_f").get<double>();
  in.nu = named.at("nu").get<double>();
  in.L0 = named.at("L0").get<double>();
  in.N = opt("N").value_or(0.0);
  in.N_hat = opt("N_hat");
  in.F_x = opt("F_x");
  in.gap = opt("gap");
  in.beta = opt("beta");
  return in;
}

struct Recheck {
  CheckStatus status = CheckStatus::not_applicable;
  double certified_T = 0.0;
  std::vector<std::string> problems;
};

Recheck recheck(const std::vector<CsvRow>& rows, const Certificate& cert) {
  Recheck out;
  const double eps = cert.inputs.at("eps");
  const double cap = std::max(cert.inputs.at("L0"), 2.0 * cert.inputs.at("L_H")) * (1.0 + 1e-12);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const CsvRow& r = rows[k];
    if (r.L_k > cap) out.problems.push_back("k=" + std::to_string(k) + ": L_k above cap");
    if (r.i_k < 0) {
      if (k + 1 != rows.size()) out.problems.push_back("k=" + std::to_string(k) + ": terminal row before the end");
      continue;
    }
    if (k + 1 < rows.size() && std::abs(rows[k + 1].L_k - std::ldexp(r.L_k, r.i_k - 1)) > 1e-15 * rows[k + 1].L_k) {
      out.problems.push_back("k=" + std::to_string(k) + ": L_{k+1} != 2^{i_k - 1} L_k");
    }
    if (r.decrease < -1e-10) out.problems.push_back("k=" + std::to_string(k) + ": negative decrease");
  }
  std::optional<std::size_t> first;
  for (const auto& r : rows) {
    if (r.grad <= eps) {
      first = r.inner_k;
      break;
    }
  }
  if (!first) return out;
  double T = static_cast<double>(*first) + cert.index_offset;
  if (cert.multiple_of_three && T > 0.0) T = 3.0 * std::ceil(T / 3.0);
  out.certified_T = T;
  const bool bounded = T <= 0.0 || T <= cert.predicted_T;
  const bool vacuous = !bounded && cert.validity_floor && T < *cert.validity_floor;
  out.status = (bounded || vacuous) && out.problems.empty() ? CheckStatus::pass : CheckStatus::fail;
  return out;
}

}  // namespace

ReportResult report(const std::string& csv_text, const std::string& json_text) {
  const auto traces = parse_trace_csv(csv_text);
  json summary;
  try {
    summary = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, std::string("JSON summary: ") + e.what());
  }
  if (!summary.contains("runs") || !summary["runs"].is_array()) throw ParseError(0, "JSON summary has no runs");

  json out;
  out["command"] = "report";
  json checks = json::array();
  int mismatches = 0, failures = 0;
  try {
    for (const auto& run : summary["runs"]) {
      const RunKey key{run.at("run_id").get<std::string>(), run.at("outer_k").get<std::size_t>()};
      const auto it = traces.find(key);
      for (const auto& c : run.at("certificates")) {
        const std::string name = c.at("theorem").get<std::string>();
        json entry = {{"run_id", key.first}, {"outer_k", key.second}, {"theorem", name}};
        const auto theorem = parse_theorem(name);
        if (!theorem) throw ParseError(0, "unknown theorem '" + name + "'");
        const Certificate cert = certificate(*theorem, inputs_from(c.at("inputs")));
        const double claimed_T = c.at("predicted_T").get<double>();
        const std::string claimed = c.at("status").get<std::string>();
        entry["predicted_T"] = cert.predicted_T;
        entry["claimed_status"] = claimed;

        std::vector<std::string> problems;
        if (std::abs(cert.predicted_T - claimed_T) > 1e-12 * std::max(1.0, std::abs(claimed_T))) {
          problems.push_back("predicted_T does not match the stored inputs");
        }
        Recheck re;
        if (it == traces.end()) {
          problems.push_back("no CSV rows for this run");
        } else {
          re = recheck(it->second, cert);
          problems.insert(problems.end(), re.problems.begin(), re.problems.end());
        }
        entry["recomputed_status"] = check_status_name(re.status);
        entry["certified_T"] = re.certified_T;
        if (claimed != check_status_name(re.status)) problems.push_back("claimed status differs");
        if (re.status == CheckStatus::fail) ++failures;
        entry["consistent"] = problems.empty();
        entry["problems"] = problems;
        if (!problems.empty()) ++mismatches;
        checks.push_back(entry);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("JSON summary: ") + e.what());
  }
  out["checked"] = checks.size();
  out["mismatches"] = mismatches;
  out["failures"] = failures;
  out["checks"] = checks;
  const bool passed = mismatches == 0 && failures == 0;
  out["passed"] = passed;
  return {out.dump(2), passed};
}

}  // namespace tensoraux
