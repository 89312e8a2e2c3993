#include "tensoraux/tensoraux.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailed = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string oracle = "quartic";
  std::vector<double> center;
  std::size_t dim = 2;
  std::optional<double> H, nu, H_f, theta, eps, L0, R0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_outer, max_inner;
  std::string config;
  std::string out;
  std::vector<double> H_list;
  double ball = 0.0;
  std::string csv_path, json_path;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw UsageError("cannot write " + path.string());
}

// Config keys first, then any flag given on the command line.
ta_config build_config(const Options& o) {
  ta_config cfg;
  ta_config_default(&cfg);
  if (!o.config.empty()) {
    json doc;
    try {
      doc = json::parse(read_file(o.config));
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw UsageError("config: expected a JSON object");
    for (const auto& [key, value] : doc.items()) {
      try {
        if (key == "H") cfg.H = value.get<double>();
        else if (key == "theta") cfg.theta = value.get<double>();
        else if (key == "eps") cfg.eps = value.get<double>();
        else if (key == "L0") cfg.L0 = value.get<double>();
        else if (key == "R0") cfg.R0 = value.is_null() ? -1.0 : value.get<double>();
        else if (key == "nu") cfg.nu = value.get<double>();
        else if (key == "H_f") cfg.H_f = value.get<double>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "max_outer") cfg.max_outer = value.get<std::size_t>();
        else if (key == "max_inner") cfg.max_inner = value.get<std::size_t>();
        else throw UsageError("config: unknown key '" + key + "'");
      } catch (const json::type_error&) {
        throw UsageError("config: bad value for '" + key + "'");
      }
    }
  }
  if (o.H) cfg.H = *o.H;
  if (o.theta) cfg.theta = *o.theta;
  if (o.eps) cfg.eps = *o.eps;
  if (o.L0) cfg.L0 = *o.L0;
  if (o.R0) cfg.R0 = *o.R0;
  if (o.nu) cfg.nu = *o.nu;
  if (o.H_f) cfg.H_f = *o.H_f;
  if (o.seed) cfg.seed = *o.seed;
  if (o.max_outer) cfg.max_outer = *o.max_outer;
  if (o.max_inner) cfg.max_inner = *o.max_inner;
  return cfg;
}

int status_exit(ta_status s) {
  std::cerr << "error: " << ta_status_string(s) << ": " << ta_last_error() << "\n";
  switch (s) {
    case TA_ERR_CHECK_FAILED:
    case TA_ERR_NUMERICAL:
    case TA_ERR_INTERNAL:
      return kExitFailed;
    default:
      return kExitUsage;
  }
}

using OraclePtr = std::unique_ptr<ta_oracle, decltype(&ta_oracle_destroy)>;
using ResultPtr = std::unique_ptr<ta_result, decltype(&ta_result_destroy)>;

int emit(const Options& o, ta_result* raw) {
  ResultPtr result(raw, &ta_result_destroy);
  const std::string csv = ta_result_csv(result.get());
  const std::string js = std::string(ta_result_json(result.get())) + "\n";
  if (o.out.empty()) {
    std::cout << js;
  } else {
    const fs::path out(o.out);
    if (out.extension() == ".json") throw UsageError("--out names the CSV file; the summary goes to its .json sibling");
    if (!csv.empty()) write_file(out, csv);
    write_file(fs::path(out).replace_extension(".json"), js);
  }
  return ta_result_passed(result.get()) ? kExitOk : kExitFailed;
}

int run(const std::string& command, const Options& o) {
  if (command == "report") {
    const fs::path csv(o.csv_path);
    const fs::path js = o.json_path.empty() ? fs::path(csv).replace_extension(".json") : fs::path(o.json_path);
    ta_result* result = nullptr;
    const ta_status s = ta_report(read_file(csv).c_str(), read_file(js).c_str(), &result);
    if (s != TA_OK) return status_exit(s);
    return emit(o, result);
  }

  const ta_config cfg = build_config(o);
  ta_oracle* raw = nullptr;
  const std::size_t n = o.center.empty() ? o.dim : o.center.size();
  if (ta_status s = ta_oracle_create(o.oracle.c_str(), n, &raw); s != TA_OK) return status_exit(s);
  OraclePtr oracle(raw, &ta_oracle_destroy);
  if (!o.center.empty() && o.center.size() != ta_oracle_dim(oracle.get())) {
    throw UsageError("--center has " + std::to_string(o.center.size()) + " entries, oracle dimension is " +
                     std::to_string(ta_oracle_dim(oracle.get())));
  }
  const double* x = o.center.empty() ? nullptr : o.center.data();

  ta_result* result = nullptr;
  ta_status s = TA_OK;
  if (command == "check") {
    s = ta_run_check(oracle.get(), x, &cfg, &result);
  } else if (command == "solve-model") {
    s = ta_solve_model(oracle.get(), x, &cfg, o.ball, &result);
  } else if (command == "minimize") {
    s = ta_minimize(oracle.get(), x, &cfg, &result);
  } else {
    s = ta_bench_regimes(oracle.get(), x, o.H_list.data(), o.H_list.size(), &cfg, &result);
  }
  if (s != TA_OK) return status_exit(s);
  return emit(o, result);
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--oracle", o.oracle, "quadratic | separable_quartic | log_sum_exp | logistic | csv:<path>");
  app->add_option("--center", o.center, "starting point / model center, comma separated")->delimiter(',');
  app->add_option("--dim", o.dim, "dimension when --center is not given")->check(CLI::PositiveNumber);
  app->add_option("--H", o.H, "regularization parameter (default 2 H_f)");
  app->add_option("--nu", o.nu, "Hoelder exponent override (needs --Hf unless unchanged)");
  app->add_option("--Hf", o.H_f, "Hoelder constant override");
  app->add_option("--theta", o.theta, "acceptance constant");
  app->add_option("--eps", o.eps, "target tolerance in (0, 1)");
  app->add_option("--L0", o.L0, "initial line-search constant");
  app->add_option("--R0", o.R0, "radius of the ball containing the model sublevel set (>= 1)");
  app->add_option("--seed", o.seed, "seed for sampled diagnostics");
  app->add_option("--max-inner", o.max_inner, "inner step budget per outer iteration");
  app->add_option("--config", o.config, "JSON file with OuterConfig keys; flags override it");
  app->add_option("--out", o.out, "CSV output path; the JSON summary goes to the .json sibling");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized third-order tensor models and Bregman gradient solvers"};
  app.require_subcommand(1);
  Options o;

  auto* check = app.add_subcommand("check", "derivative audit and property sweep of an oracle");
  add_common(check, o);
  auto* model = app.add_subcommand("solve-model", "one inner solve of the model at the center");
  add_common(model, o);
  model->add_option("--ball", o.ball, "composite run with the indicator of this ball around the center");
  auto* minimize = app.add_subcommand("minimize", "outer tensor method with a fixed H");
  add_common(minimize, o);
  minimize->add_option("--max-outer", o.max_outer, "outer iteration budget");
  auto* bench = app.add_subcommand("bench-regimes", "inner iteration counts for H above / at / below the threshold");
  add_common(bench, o);
  bench->add_option("--H-list", o.H_list, "comma separated H values")->delimiter(',')->required();
  auto* rep = app.add_subcommand("report", "re-verify certificate claims from a CSV trace and its JSON summary");
  rep->add_option("csv", o.csv_path, "trace CSV")->required();
  rep->add_option("--json", o.json_path, "JSON summary (default: the .json sibling of the CSV)");
  rep->add_option("--out", o.out, "write the report JSON next to this path instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
