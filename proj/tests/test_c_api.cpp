#include "tensoraux/tensoraux.h"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Oracle {
  ta_oracle* p = nullptr;
  Oracle(const char* name, size_t n) { REQUIRE(ta_oracle_create(name, n, &p) == TA_OK); }
  ~Oracle() { ta_oracle_destroy(p); }
};

struct Result {
  ta_result* p = nullptr;
  ~Result() { ta_result_destroy(p); }
};

int cli(const std::string& args) {
  const std::string cmd = std::string(TENSORAUX_CLI) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tensoraux_c_api_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("oracle handles") {
  Oracle q("quartic", 2);
  CHECK(ta_oracle_dim(q.p) == 2);
  CHECK(std::string(ta_oracle_name(q.p)) == "quartic");
  double nu = 0, H_f = 0;
  CHECK(ta_oracle_holder(q.p, &nu, &H_f) == TA_OK);
  CHECK(nu == 1.0);
  CHECK(H_f == 6.0);
  const double x[2] = {1.0, 1.0};
  double f = 0, g[2] = {0, 0};
  CHECK(ta_oracle_eval(q.p, x, &f, g) == TA_OK);
  CHECK(f == 0.5);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 1.0);
  double c[2] = {0, 0};
  CHECK(ta_oracle_default_center(q.p, c) == TA_OK);
  CHECK(c[0] == 1.0);

  ta_oracle* bad = nullptr;
  CHECK(ta_oracle_create("nonsense", 2, &bad) == TA_ERR_INVALID_ARGUMENT);
  CHECK(bad == nullptr);
  CHECK(std::string(ta_last_error()).size() > 0);
  CHECK(ta_oracle_create("csv:/nonexistent/file.csv", 2, &bad) == TA_ERR_IO);
  CHECK(ta_oracle_create("csv:" TEST_DATA_DIR "/bad_field.csv", 2, &bad) == TA_ERR_IO);
  CHECK(ta_oracle_create(nullptr, 2, &bad) == TA_ERR_INVALID_ARGUMENT);
  CHECK(ta_oracle_eval(nullptr, x, &f, g) == TA_ERR_INVALID_ARGUMENT);
  ta_oracle_destroy(nullptr);
  ta_result_destroy(nullptr);
}

TEST_CASE("run functions") {
  Oracle q("quartic", 2);
  ta_config cfg;
  ta_config_default(&cfg);
  cfg.H = 12.0;

  Result bench;
  const double Hs[3] = {12.0, 9.0, 4.5};
  REQUIRE(ta_bench_regimes(q.p, nullptr, Hs, 3, &cfg, &bench.p) == TA_OK);
  CHECK(ta_result_passed(bench.p) == 1);
  const std::string csv = ta_result_csv(bench.p);
  const std::string js = ta_result_json(bench.p);
  CHECK(csv.rfind("run_id,outer_k,inner_k,i_k,L_k,omega,grad_dual_norm,bregman_decrease,status\n", 0) == 0);
  CHECK(nlohmann::json::parse(js).is_object());

  Result rep;
  REQUIRE(ta_report(csv.c_str(), js.c_str(), &rep.p) == TA_OK);
  CHECK(ta_result_passed(rep.p) == 1);
  CHECK(std::string(ta_result_csv(rep.p)).empty());

  Result bad_rep;
  CHECK(ta_report("garbage", js.c_str(), &bad_rep.p) == TA_ERR_IO);
  CHECK(bad_rep.p == nullptr);

  Result mini;
  REQUIRE(ta_minimize(q.p, nullptr, &cfg, &mini.p) == TA_OK);
  CHECK(ta_result_passed(mini.p) == 1);

  Result model;
  const double x[2] = {1.0, -0.5};
  REQUIRE(ta_solve_model(q.p, x, &cfg, 0.2, &model.p) == TA_OK);
  CHECK(ta_result_passed(model.p) == 1);

  Result check;
  REQUIRE(ta_run_check(q.p, nullptr, &cfg, &check.p) == TA_OK);
  CHECK(ta_result_passed(check.p) == 1);

  // Metadata overrides: nu alone needs H_f, and the composite model needs H >= 2 H_f.
  ta_config over = cfg;
  over.nu = 0.5;
  Result r1;
  CHECK(ta_minimize(q.p, nullptr, &over, &r1.p) == TA_ERR_INVALID_ARGUMENT);
  ta_config low = cfg;
  low.H = 4.0;
  Result r2;
  CHECK(ta_solve_model(q.p, nullptr, &low, 0.2, &r2.p) == TA_ERR_INVALID_ARGUMENT);
  ta_config eps = cfg;
  eps.eps = 2.0;
  Result r3;
  CHECK(ta_minimize(q.p, nullptr, &eps, &r3.p) == TA_ERR_INVALID_ARGUMENT);
  ta_config budget = cfg;
  budget.max_inner = 1;
  Result r4;
  CHECK(ta_minimize(q.p, nullptr, &budget, &r4.p) == TA_ERR_NUMERICAL);
  CHECK(ta_minimize(q.p, nullptr, &cfg, nullptr) == TA_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ta_status_string(TA_ERR_NUMERICAL)) == "numerical failure");
}

TEST_CASE("command line exit codes") {
  const fs::path out = scratch("bench.csv");
  CHECK(cli("bench-regimes --oracle quartic --center 1,1 --H-list 12,9,4.5 --eps 1e-6 --out " + out.string()) == 0);
  CHECK(fs::exists(out));
  CHECK(fs::exists(scratch("bench.json")));
  const std::string first = slurp(out);
  CHECK(cli("bench-regimes --oracle quartic --center 1,1 --H-list 12,9,4.5 --eps 1e-6 --out " + out.string()) == 0);
  CHECK(slurp(out) == first);
  CHECK(cli("report " + out.string()) == 0);

  // Tamper with one L_k and the report fails.
  std::string text = first;
  const auto second_line = text.find('\n', text.find('\n') + 1) + 1;
  auto c1 = second_line;
  for (int i = 0; i < 4; ++i) c1 = text.find(',', c1) + 1;
  text.replace(c1, text.find(',', c1) - c1, "1000000");
  const fs::path forged = scratch("forged.csv");
  std::ofstream(forged, std::ios::binary) << text;
  CHECK(cli("report " + forged.string() + " --json " + scratch("bench.json").string()) == 2);

  CHECK(cli("") == 1);
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("minimize --oracle nonsense") == 1);
  CHECK(cli("minimize --eps 2") == 1);
  CHECK(cli("bench-regimes --oracle quartic") == 1);
  CHECK(cli("minimize --oracle quartic --center 1,2,3 --dim 2 --H 12") == 0);
  CHECK(cli("minimize --oracle quartic --max-inner 1 --H 12") == 2);
  CHECK(cli("report /nonexistent.csv") == 1);
  CHECK(cli("minimize --out " + scratch("x.json").string()) == 1);
  CHECK(cli("check --oracle lse --dim 3") == 0);
  CHECK(cli("solve-model --oracle quartic --H 12 --ball 0.3") == 0);
  CHECK(cli("minimize --oracle csv:" TEST_DATA_DIR "/logistic4.csv --eps 1e-5") == 0);

  const fs::path cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"H": 12, "eps": 1e-7, "max_outer": 5})";
  CHECK(cli("minimize --config " + cfg.string()) == 0);
  std::ofstream(cfg) << R"({"H": 12, "colour": 3})";
  CHECK(cli("minimize --config " + cfg.string()) == 1);
}
