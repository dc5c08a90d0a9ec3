#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "gts/log_io.hpp"
#include "support.hpp"

using namespace gts;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("gts_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string put(const std::string& name, const json& j) const {
    write_file_atomic(dir_ / name, j.dump());
    return path(name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VersionAndUsage) {
  auto r = invoke({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "schema_version 1\n");
  r = invoke({"simulate", "--model", "x.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["code"], "UsageError");
}

TEST_F(Cli, MissingFileIsIoError) {
  auto r = invoke({"validate", "--model", path("missing.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["code"], "IoError");
}

TEST_F(Cli, MalformedModelIsParseError) {
  write_file_atomic(dir_ / "bad.json", "{");
  EXPECT_EQ(invoke({"validate", "--model", path("bad.json")}).code, 2);
}

TEST_F(Cli, RoleMismatchReportedAsDiagnostic) {
  const auto model = put("m0.json", to_json(gts::testing::service_net()));
  const auto apps = put("apps.json", json::array({{{"application_id", "x"},
                                                   {"code", "BI_7"},
                                                   {"mapping", {{"p_r1", {"p_new"}}, {"p_r2", {"p_idle"}}}}}}));
  auto r = invoke({"validate", "--model", model, "--apply", apps});
  EXPECT_EQ(r.code, 1);
  bool role = false;
  std::istringstream lines(r.err);
  for (std::string line; std::getline(lines, line);) {
    const auto j = json::parse(line);
    EXPECT_EQ(j["level"], "error");
    role |= j["code"] == "RoleMismatch";
  }
  EXPECT_TRUE(role) << r.err;
}

TEST_F(Cli, TransformSimulateAlignRoundTrip) {
  const auto model = put("m0.json", to_json(gts::testing::service_net(3, 1)));
  const auto apps =
      put("apps.json", json::array({{{"application_id", "m"}, {"code", "RI_mi^e"}, {"mapping", {{"t", {"finish"}}}}}}));
  ASSERT_EQ(invoke({"transform", "--model", model, "--apply", apps, "--out", path("ml.json"), "--ledger", path("ledger.json")})
                .code,
            0);
  EXPECT_TRUE(fs::exists(path("ledger.json")));

  SimConfig c;
  c.firing_limit = 100;
  c.deviation_weight = 1.0;
  const auto config = put("config.json", to_json(c));
  auto r = invoke({"simulate", "--model", path("ml.json"), "--config", config, "--out", path("trace.jsonl"), "--log",
                path("log.jsonl"), "--csv", path("log.csv"), "--seed", "4", "--run-id", "demo"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = json::parse(r.out);
  EXPECT_EQ(summary["run_id"], "demo");

  r = invoke({"oracle", "align", "--model", model, "--ml", path("ml.json"), "--trace", path("trace.jsonl"), "--log",
           path("log.csv"), "--out", path("gt.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = invoke({"oracle", "score", "--candidate", path("gt.jsonl"), "--gt", path("gt.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["distance"], 0.0);

  r = invoke({"oracle", "report", "--trace", path("trace.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out).is_object());
}

TEST_F(Cli, FixtureThenDataset) {
  ASSERT_EQ(invoke({"fixture", "--name", "package_delivery", "--out", path("fx")}).code, 0);
  auto r = invoke({"dataset", "--model", path("fx/m0.json"), "--grid", path("fx/grid.json"), "--out", path("ds"), "--jobs",
                "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = read_json_file(path("ds/manifest.json"));
  EXPECT_EQ(manifest["cells"].size(), 12u);
  for (const auto& c : manifest["cells"]) EXPECT_TRUE(fs::exists(dir_ / "ds" / c["files"]["log"].get<std::string>()));
}

TEST_F(Cli, UnknownFixtureIsInvalid) {
  auto r = invoke({"fixture", "--name", "nope", "--out", path("fx")});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, ScoreRejectsPartialCoverage) {
  write_file_atomic(dir_ / "gt.jsonl",
                    R"({"object":"o1","kind":"synchronous","activity":"a","event_id":"e1"})" "\n"
                    R"({"object":"o1","kind":"synchronous","activity":"b","event_id":"e2"})" "\n");
  write_file_atomic(dir_ / "cand.jsonl", R"({"object":"o1","kind":"synchronous","activity":"a","event_id":"e1"})" "\n");
  auto r = invoke({"oracle", "score", "--candidate", path("cand.jsonl"), "--gt", path("gt.jsonl")});
  EXPECT_EQ(r.code, 1);
}
