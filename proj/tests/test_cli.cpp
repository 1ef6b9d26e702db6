#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rwtree/cli.hpp"
#include "rwtree/config.hpp"
#include "rwtree/error.hpp"
#include "rwtree/report.hpp"

using namespace rwtree;
namespace fs = std::filesystem;

namespace {

const char* kExample = R"({
  "env": {"model": "rwre", "b": 2, "coupling": "identical",
          "support": [{"value": "3/10", "prob": "1/30"}, {"value": "7/2", "prob": "29/30"}]},
  "psi": 1,
  "campaign": {"replicas": 6, "max_steps": 4000, "seed": 5}
})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rwtree_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "rwtree");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST(Config, ParsesRationalsAndDecimals) {
  EXPECT_DOUBLE_EQ(parse_rational("1/30"), 1.0 / 30);
  EXPECT_DOUBLE_EQ(parse_rational(" 7 / 2 "), 3.5);
  EXPECT_DOUBLE_EQ(parse_rational("0.25"), 0.25);
  EXPECT_THROW(parse_rational("1/0"), ConfigError);
  EXPECT_THROW(parse_rational("abc"), ConfigError);
  EXPECT_THROW(parse_rational(""), ConfigError);
}

TEST(Config, ParsesTheExample) {
  const RunConfig c = parse_config_text(kExample);
  EXPECT_EQ(c.env.model, ModelKind::rwre);
  ASSERT_EQ(c.env.support.size(), 2u);
  EXPECT_DOUBLE_EQ(c.env.support[0].value, 0.3);
  EXPECT_EQ(c.bounds.psi, 1);
  EXPECT_EQ(c.campaign.replicas, 6u);
  EXPECT_EQ(c.bounds.offspring_seed, 5u);
}

TEST(Config, RejectsUnknownKeysWithTheirPath) {
  auto key_of = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("no error");
  };
  EXPECT_EQ(key_of(R"({"env": {"model": "orrw", "b": 2, "delta": 2}, "extra": 1})"), "/extra");
  EXPECT_EQ(key_of(R"({"env": {"model": "orrw", "b": 2, "delta": 2, "colour": 1}})"), "/env/colour");
  EXPECT_EQ(key_of(R"({"env": {"model": "orrw", "b": 2, "delta": 2}, "campaign": {"replica": 3}})"),
            "/campaign/replica");
  EXPECT_EQ(key_of(R"({"env": {"model": "orrw", "b": 2, "delta": 2}, "campaign": {"replicas": 0}})"),
            "/campaign/replicas");
  EXPECT_EQ(key_of(R"({"env": {"model": "orrw", "b": 2, "delta": 2}, "psi": 0})"), "/psi");
  EXPECT_EQ(key_of(R"({"env": {"model": "walk", "b": 2}})"), "/env/model");
}

TEST(Config, MalformedJsonNamesTheLine) {
  try {
    parse_config_text("{\n  \"env\": {\n    \"model\": \"orrw\",,\n  }\n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Config, EffectiveConfigRoundTrips) {
  const RunConfig c = parse_config_text(kExample);
  const nlohmann::json eff = effective_config(c);
  const RunConfig again = parse_config(eff);
  EXPECT_EQ(effective_config(again), eff);
  EXPECT_EQ(config_hash(again), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  EXPECT_EQ(eff["psi"], 1);
  EXPECT_EQ(eff["campaign"].count("workers"), 0u);
  EXPECT_EQ(eff.count("output"), 0u);
}

TEST(Config, HashIgnoresWorkersAndOutputButNotSeed) {
  RunConfig a = parse_config_text(kExample);
  RunConfig b = a;
  b.campaign.workers = 8;
  b.out_path = "/tmp/x.json";
  b.format = OutputFormat::csv;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.campaign.seed = 6;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Report, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  const std::string kv = to_csv_kv(nlohmann::json{{"a", {{"b", 1}}}, {"note", "x, y"}, {"n", nullptr}});
  EXPECT_EQ(kv, "key,value\r\n/a/b,1\r\n/n,\r\n/note,\"x, y\"\r\n");
}

TEST(Report, NonFiniteNumbersBecomeNull) {
  EXPECT_TRUE(json_number(std::numeric_limits<double>::infinity()).is_null());
  EXPECT_TRUE(json_number(std::nan("")).is_null());
  const nlohmann::json j = to_json(BoundValue::ok(std::numeric_limits<double>::infinity()));
  EXPECT_TRUE(j["value"].is_null());
  EXPECT_TRUE(j.contains("reason"));
}

TEST_F(CliTest, BoundsOnTheExample) {
  const std::string cfg = write("ex.json", kExample);
  EXPECT_EQ(run({"bounds", "--config", cfg}), kExitOk) << err_.str();
  const auto doc = nlohmann::json::parse(out_.str());
  EXPECT_EQ(doc["provenance"]["tool"], "rwtree");
  EXPECT_EQ(doc["provenance"]["config_hash"], config_hash(parse_config_text(kExample)));
  EXPECT_NEAR(doc["bounds"]["speed"]["lower"]["value"].get<double>(), 0.12299115, 5e-9);
}

TEST_F(CliTest, OrrwDeltaOneIsInapplicable) {
  const std::string cfg =
      write("d1.json", R"({"env": {"model": "orrw", "b": 2, "delta": 1}, "psi": 4,
                           "bounds": {"offspring_samples": 5000}})");
  EXPECT_EQ(run({"bounds", "--config", cfg}), kExitInapplicable);
  const auto doc = nlohmann::json::parse(out_.str());
  EXPECT_FALSE(doc["bounds"]["speed"]["theorem"]["applicable"].get<bool>());
}

TEST_F(CliTest, MalformedConfigFailsWithoutWritingOutput) {
  const std::string cfg = write("bad.json", "{ \"env\": ");
  const std::string out = path("out.json");
  EXPECT_EQ(run({"bounds", "--config", cfg, "--out", out}), kExitValidation);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_FALSE(fs::exists(out + ".tmp"));
  EXPECT_NE(err_.str().find("configuration error"), std::string::npos);
}

TEST_F(CliTest, ValidationErrors) {
  const std::string cfg = write("ex.json", kExample);
  EXPECT_EQ(run({"simulate", "--config", cfg, "--replicas", "0"}), kExitValidation);
  EXPECT_NE(err_.str().find("/campaign/replicas"), std::string::npos);
  EXPECT_EQ(run({"simulate"}), kExitValidation);
  EXPECT_EQ(run({"simulate", "--config", path("missing.json")}), kExitValidation);
  EXPECT_EQ(run({"bounds", "--config", cfg, "--format", "xml"}), kExitValidation);
  EXPECT_EQ(run({"frobnicate"}), kExitValidation);
  EXPECT_EQ(run({}), kExitValidation);
}

TEST_F(CliTest, SimulateIsByteIdenticalAcrossRunsAndWorkers) {
  const std::string cfg = write("ex.json", kExample);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", path("a.json")}), kExitOk) << err_.str();
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", path("b.json"), "--workers", "3"}), kExitOk);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  ASSERT_EQ(run({"simulate", "--config", cfg, "--format", "csv", "--out", path("a.csv"), "--blocks-out",
                 path("blocks.csv")}),
            kExitOk);
  const std::string csv = slurp(path("a.csv"));
  EXPECT_EQ(csv.rfind("replica,status,", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_EQ(slurp(path("blocks.csv")).rfind("replica,block,d_ell,d_tau,censored\r\n", 0), 0u);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--seed", "6", "--out", path("c.json")}), kExitOk);
  EXPECT_NE(slurp(path("a.json")), slurp(path("c.json")));
}

TEST_F(CliTest, MemoryCapExitCode) {
  const std::string cfg = write("cap.json", R"({
    "env": {"model": "rwre", "b": 2, "support": [{"value": 3.5, "prob": 1}]},
    "campaign": {"replicas": 2, "max_steps": 100000, "max_vertices": 50}})");
  EXPECT_EQ(run({"simulate", "--config", cfg}), kExitRuntimeCap);
}

TEST_F(CliTest, VerifyReportsChecks) {
  // Long enough that the guard-censored tail stays below 1% of the blocks.
  std::string text = kExample;
  text.replace(text.find("4000"), 4, "10000");
  const std::string cfg = write("ex.json", text);
  const int code = run({"verify", "--config", cfg, "--replicas", "40"});
  EXPECT_EQ(code, kExitOk) << err_.str();
  const auto doc = nlohmann::json::parse(out_.str());
  EXPECT_EQ(doc["provenance"]["command"], "verify");
  EXPECT_FALSE(doc["verification"]["checks"].empty());
  ASSERT_EQ(run({"verify", "--config", cfg, "--replicas", "40", "--format", "csv"}), kExitOk);
  EXPECT_EQ(out_.str().rfind("key,value\r\n", 0), 0u);
}

TEST_F(CliTest, WorkedExampleCommand) {
  EXPECT_EQ(run({"paper-example", "--kappa", "1/30"}), kExitOk) << err_.str();
  const auto doc = nlohmann::json::parse(out_.str());
  EXPECT_TRUE(doc["headline"]["ok"].get<bool>());
  EXPECT_NEAR(doc["speed_lower_bound"].get<double>(), 0.12299115, 5e-9);
  EXPECT_EQ(doc["omega"][0]["omega_parent"], 0.625);
  EXPECT_EQ(run({"paper-example"}), kExitOk);
  EXPECT_EQ(run({"paper-example", "--kappa", "0.5"}), kExitOk);
  EXPECT_EQ(run({"paper-example", "--kappa", "0.6"}), kExitValidation);
  EXPECT_EQ(run({"paper-example", "--kappa", "0"}), kExitValidation);
  EXPECT_NE(err_.str().find("(0, 1/2]"), std::string::npos);
}

TEST(WorkedExample, QuantitiesMatchClosedForms) {
  for (double k : {1.0 / 30, 0.1, 0.5}) {
    const WorkedExample ex = worked_example(k);
    ASSERT_EQ(ex.quantities.size(), 8u);
    for (const auto& q : ex.quantities) EXPECT_LT(q.rel_error(), 1e-10) << q.name << " at " << k;
    const double total = ex.find("p0")->computed + ex.find("p1")->computed + ex.find("p2")->computed;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  const WorkedExample half = worked_example(0.5);
  EXPECT_NEAR(half.find("m1")->computed, 118.0 / 117, 1e-13);
  EXPECT_TRUE(half.bounds.all_applicable());
  EXPECT_THROW(worked_example(0.0), ConfigError);
  EXPECT_THROW(worked_example(0.51), ConfigError);
}
