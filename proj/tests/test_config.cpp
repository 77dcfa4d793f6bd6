#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "quditcorr/config.hpp"
#include "quditcorr/error.hpp"
#include "quditcorr/run.hpp"

using namespace quditcorr;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("quditcorr_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config fills the defaults") {
  const auto parsed = parse_config_text(R"({"N": 4, "steps": 50})");
  const RunConfig& c = parsed.config;
  CHECK(c.n_sites == 4);
  CHECK(c.steps == 50);
  CHECK(c.lambdas == std::vector<double>{0.2});
  CHECK(c.pulse_area == 1e-3);
  CHECK(c.jz_over_jxy == 0.5);
  CHECK(std::find(parsed.defaults_applied.begin(), parsed.defaults_applied.end(), "lambdas") !=
        parsed.defaults_applied.end());
  CHECK(std::find(parsed.defaults_applied.begin(), parsed.defaults_applied.end(), "N") == parsed.defaults_applied.end());
}

TEST_CASE("validation errors name the field") {
  auto message = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"lambdas": [-0.2]})").find("lambdas") != std::string::npos);
  CHECK(message(R"({"N": 4, "colour": 1})").find("colour") != std::string::npos);
  CHECK(message(R"({"budgets": {"lr_pluss": 3}})").find("lr_pluss") != std::string::npos);
  CHECK(message(R"({"N": "four"})").find("N") != std::string::npos);
  CHECK(message(R"({"protocols": ["kubo"]})").find("kubo") != std::string::npos);
  CHECK(message(R"({"sites": [1, 9]})").find("sites") != std::string::npos);
  CHECK(message(R"({"steps": -1})").find("steps") != std::string::npos);
  CHECK(message(R"([1, 2])").find("object") != std::string::npos);
}

TEST_CASE("syntax errors carry the line") {
  try {
    parse_config_text("{\n  \"N\": 4,\n  \"steps\": ,\n}");
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("emit and parse round-trip") {
  RunConfig c;
  c.n_sites = 6;
  c.lambdas = {0.05, 0.1, 0.4};
  c.protocols = {Protocol::lr_non_hermitian, Protocol::hadamard};
  c.budgets.lr_minus = 12345;
  c.seed = 18446744073709551615ull;
  c.t_max = 0.1 + 0.2;
  c.sampled = false;
  c.output = "somewhere/else";
  const auto parsed = parse_config_text(emit_config(c));
  CHECK(parsed.config == c);
  CHECK(parsed.defaults_applied.empty());
}

TEST_CASE("config files") {
  const auto dir = scratch("files");
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "c.json") << R"({"N": 3, "steps": 4, "t_max": 1.0})";
  }
  CHECK(parse_config(dir / "c.json").config.n_sites == 3);
  CHECK_THROWS_AS(parse_config(dir / "missing.json"), ValidationError);
}

TEST_CASE("run writes deterministic files") {
  const auto dir = scratch("run");
  auto parsed = parse_config_text(R"({"N": 3, "steps": 10, "t_max": 2.0, "lambdas": [0.1, 0.2], "seed": 5})");
  parsed.config.output = (dir / "a").string();
  parsed.config.workers = 1;
  const auto first = run(parsed);
  parsed.config.output = (dir / "b").string();
  parsed.config.workers = 4;
  run(parsed);
  const std::string csv = slurp(dir / "a" / "results.csv");
  CHECK(csv == slurp(dir / "b" / "results.csv"));
  CHECK(csv.rfind("protocol,kind,t,lambda,exact,sampled,std_error,shots,seed\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.find("hadamard,+,0,,-2,") != std::string::npos);

  const auto summary = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary["incomplete"] == false);
  CHECK(summary["config"]["N"] == 3);
  CHECK(summary["figures_of_merit"][0]["exact"]["r_plus"].get<double>() <= 1e-10);
  CHECK(summary.contains("runtime_seconds"));
  CHECK(summary["versions"].contains("quditcorr"));
  const auto echoed = parse_config_text(summary["config"].dump());
  CHECK(echoed.config.n_sites == 3);
  CHECK(echoed.config.lambdas == std::vector<double>{0.1, 0.2});
}

TEST_CASE("hadamard-only exact run reports a vanishing relative error") {
  const auto dir = scratch("exact");
  auto parsed = parse_config_text(R"({"N": 4, "steps": 20, "protocols": ["hadamard"], "sampled": false})");
  parsed.config.output = dir.string();
  const auto out = run(parsed);
  REQUIRE(out.result.summaries.size() == 1);
  CHECK(*out.result.summaries[0].exact.r_plus <= 1e-10);
  CHECK(*out.result.summaries[0].exact.r_minus <= 1e-10);
  CHECK(slurp(out.csv_path).find("hadamard,-,0,,0,,") != std::string::npos);
}

TEST_CASE("interrupted run writes a partial table marked incomplete") {
  const auto dir = scratch("cancel");
  auto parsed = parse_config_text(R"({"N": 3, "steps": 5, "t_max": 1.0})");
  parsed.config.output = dir.string();
  std::atomic<bool> cancel{true};
  const auto out = run(parsed, &cancel);
  CHECK(out.result.incomplete);
  const auto summary = nlohmann::json::parse(slurp(out.summary_path));
  CHECK(summary["incomplete"] == true);
  CHECK(slurp(out.csv_path) == "protocol,kind,t,lambda,exact,sampled,std_error,shots,seed\n");
}

TEST_CASE("csv number formatting") {
  ResultRecord r{Protocol::lr_hermitian, '-', 0.1, 0.2, -1.5, std::nullopt, 1e-20, 12, 3};
  CHECK(format_results_csv({r}) ==
        "protocol,kind,t,lambda,exact,sampled,std_error,shots,seed\nlr_hermitian,-,0.1,0.2,-1.5,,1e-20,12,3\n");
}
