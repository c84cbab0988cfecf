#include <catch_amalgamated.hpp>
#include <fstream>
#include <sstream>

#include "smallgain/cli.hpp"

using namespace smallgain;
using nlohmann::json;

namespace {

json load(const std::string& name) {
  std::ifstream in(std::string(SMALLGAIN_CONFIG_DIR) + "/" + name);
  REQUIRE(in);
  return json::parse(in);
}

json report_of(const cli::Outcome& o) {
  REQUIRE_FALSE(o.output.empty());
  return json::parse(o.output);
}

}  // namespace

TEST_CASE("analyze exit codes") {
  auto ok = cli::execute(load("analyze_linear.json"));
  CHECK(ok.exit_code == cli::kOk);
  auto r = report_of(ok);
  CHECK(r["verdict"] == "ISS");
  CHECK(r["schema"] == cli::kSchemaVersion);
  CHECK(r["report"]["grade"] == "criterion");

  auto bad = cli::execute(load("analyze_super.json"));
  CHECK(bad.exit_code == cli::kFalsified);
  r = report_of(bad);
  CHECK(r["verdict"] == "falsified");
  CHECK(r["report"]["cycle_witness"] == json::array({0, 1}));
}

TEST_CASE("configuration errors exit 2") {
  CHECK(cli::execute_text("{ not json").exit_code == cli::kConfigError);
  CHECK(cli::execute_text("[1, 2]").exit_code == cli::kConfigError);
  CHECK(cli::execute_text(R"({"command": "frobnicate"})").exit_code == cli::kConfigError);
  CHECK(cli::execute_text(R"({"command": "spectral"})").exit_code == cli::kConfigError);
  // Sampling command without a seed.
  auto cfg = load("analyze_linear.json");
  cfg.erase("seed");
  const auto o = cli::execute(cfg);
  CHECK(o.exit_code == cli::kConfigError);
  CHECK(o.diagnostics.find("seed") != std::string::npos);
  // Bad gain kind.
  cfg = load("closure_2x2.json");
  cfg["network"]["structure"]["gains"] = json::array({json::array({0, json{{"kind", "quadratic"}}}), json::array({0, 0})});
  CHECK(cli::execute(cfg).exit_code == cli::kConfigError);
  // Command conflict.
  CHECK(cli::execute(load("closure_2x2.json"), std::nullopt, cli::Format::Json, "spectral").exit_code ==
        cli::kConfigError);
}

TEST_CASE("spectral and closure") {
  auto r = report_of(cli::execute(load("spectral_banded.json")));
  CHECK(std::abs(r["report"]["value"].get<double>() - 0.9) <= 1e-9);
  CHECK(r["verdict"] == "subcritical");

  const auto o = cli::execute(load("closure_2x2.json"));
  CHECK(o.exit_code == cli::kOk);
  r = report_of(o);
  CHECK(r["report"]["closure"] == json::array({0.5, 1.0}));
  CHECK(r["report"]["decay_point"]["s0"] == json::array({1.0, 1.0}));

  auto cfg = load("closure_2x2.json");
  cfg["epsilon"] = 2.0;
  CHECK(cli::execute(cfg).exit_code == cli::kFalsified);

  cfg = load("closure_2x2.json");
  cfg["network"]["structure"]["gains"] = json::array({json::array({0, 1.2}), json::array({1.0, 0})});
  cfg.erase("epsilon");
  const auto div = cli::execute(cfg);
  CHECK(div.exit_code == cli::kNumericFailure);
  CHECK(report_of(div)["verdict"] == "diverged");
}

TEST_CASE("simulate-discrete report and CSV") {
  const auto o = cli::execute(load("discrete_2x2.json"));
  CHECK(o.exit_code == cli::kOk);
  const auto r = report_of(o);
  CHECK(r["report"]["damped"]["dominated"] == true);
  CHECK(r["report"]["eiss"]["pass"] == true);
  CHECK(r["report"]["lyapunov"]["pass"] == true);
  CHECK(r["report"]["mlim"]["evidence"] == "positive");

  const auto csv = cli::execute(load("discrete_2x2.json"), std::nullopt, cli::Format::Csv);
  CHECK(csv.output.rfind("k,i,x_i,u_i\n0,0,1,0.1\n0,1,1,0.1\n1,0,", 0) == 0);

  // CSV is not offered for reports without trajectories.
  CHECK(cli::execute(load("spectral_banded.json"), std::nullopt, cli::Format::Csv).exit_code == cli::kConfigError);
}

TEST_CASE("simulate-ode reports the reference error") {
  const auto o = cli::execute(load("ode_linear.json"));
  CHECK(o.exit_code == cli::kOk);
  const auto r = report_of(o);
  CHECK(std::abs(r["report"]["final_sup_norm"].get<double>() - std::exp(-1.0)) <= 1e-4);
  CHECK(r["report"]["reference_max_abs_error"].get<double>() <= 1e-4);
  const auto csv = cli::execute(load("ode_linear.json"), std::nullopt, cli::Format::Csv);
  CHECK(csv.output.rfind("t,i,x_i\n0,0,1\n", 0) == 0);

  auto cfg = load("ode_linear.json");
  cfg["ode"]["kind"] = "cubic_max";
  cfg["ode"]["a"] = 1.5;
  cfg["ode"]["b"] = 1.5;
  CHECK(cli::execute(cfg).exit_code == cli::kNumericFailure);
}

TEST_CASE("threshold scan and battery") {
  const auto s = cli::execute(load("scan_linear.json"));
  CHECK(s.exit_code == cli::kOk);
  const auto r = report_of(s);
  CHECK(r["report"]["rows"].size() == 4);
  CHECK(r["report"]["first_non_decay"] == 1.0);

  const auto b = cli::execute(load("battery_random.json"));
  CHECK(b.exit_code == cli::kOk);
  CHECK(report_of(b)["report"]["disagreements"] == 0);
}

TEST_CASE("identical config and seed give identical bytes") {
  for (const char* name : {"analyze_linear.json", "discrete_2x2.json", "battery_random.json"}) {
    const auto a = cli::execute(load(name));
    const auto b = cli::execute(load(name));
    CHECK(a.output == b.output);
  }
  // The seed flag overrides the config seed and is echoed.
  const auto o = cli::execute(load("analyze_linear.json"), 99);
  CHECK(report_of(o)["seed"] == 99);
}
