// Copyright 2026 The privmf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privmf/cli.h"

#include <sys/wait.h>

#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "json.hpp"
#include "test_util.h"

namespace privmf {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::ScratchDir(
        ::testing::UnitTest::GetInstance()->current_test_info()->name());
  }
  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  // Synthetic population plus a trained model.
  void Prepare() {
    auto s = Cli({"synth", "--out-dir", P("pop"), "--seed", "3", "--users",
                  "300", "--items", "15", "--dim", "3", "--sigma", "0.3"});
    ASSERT_EQ(s.code, 0) << s.err;
    auto t = Cli({"train", "--ratings", P("pop/ratings.dat"), "--labels",
                  P("pop/labels.csv"), "--out", P("model.json"), "--dim", "3",
                  "--epochs", "20", "--lr", "0.02", "--reg", "0.01"});
    ASSERT_EQ(t.code, 0) << t.err;
  }

  fs::path dir_;
};

TEST_F(CliTest, SynthIsDeterministic) {
  for (const char* out : {"a", "b"}) {
    auto r = Cli({"synth", "--out-dir", P(out), "--seed", "5", "--users", "40",
                  "--items", "8", "--dim", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"ratings.dat", "labels.csv", "truth.json", "config.json"}) {
    EXPECT_FALSE(Slurp(dir_ / "a" / f).empty()) << f;
    EXPECT_EQ(Slurp(dir_ / "a" / f), Slurp(dir_ / "b" / f)) << f;
  }
  Cli({"synth", "--out-dir", P("c"), "--seed", "6", "--users", "40", "--items",
       "8", "--dim", "2"});
  EXPECT_NE(Slurp(dir_ / "a/ratings.dat"), Slurp(dir_ / "c/ratings.dat"));
}

TEST_F(CliTest, UsageAndDataErrors) {
  EXPECT_EQ(Cli({}).code, kExitUsage);
  EXPECT_EQ(Cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Cli({"train", "--out", P("m.json")}).code, kExitUsage);
  auto missing = Cli({"train", "--ratings", P("nope.dat"), "--labels",
                      P("nope.csv"), "--out", P("m.json")});
  EXPECT_EQ(missing.code, kExitData);
  EXPECT_NE(missing.err.find("nope"), std::string::npos);
  std::ofstream(P("dup.dat")) << "1::1::3\n1::1::4\n";
  std::ofstream(P("l.csv")) << "1,1\n";
  auto dup = Cli({"train", "--ratings", P("dup.dat"), "--labels", P("l.csv"),
                  "--out", P("m.json")});
  EXPECT_EQ(dup.code, kExitData);
  EXPECT_NE(dup.err.find("line 2"), std::string::npos);
}

TEST_F(CliTest, OfflinePipeline) {
  Prepare();
  auto sel = Cli({"select", "--model", P("model.json"), "--budget", "4",
                  "--out", P("sel.json")});
  ASSERT_EQ(sel.code, 0) << sel.err;
  auto selection = nlohmann::json::parse(Slurp(P("sel.json")));
  EXPECT_EQ(selection["seed_set"].size(), 3u);
  EXPECT_EQ(selection["selected"].size(), 4u);
  EXPECT_EQ(selection["solicit"].size(), 7u);

  for (const char* protocol : {"mp", "mpss"}) {
    auto obf = Cli({"obfuscate", "--ratings", P("pop/ratings.dat"), "--labels",
                    P("pop/labels.csv"), "--model", P("model.json"),
                    "--protocol", protocol, "--seed", "1", "--out",
                    P("fb.jsonl")});
    ASSERT_EQ(obf.code, 0) << obf.err;
    const std::string feedback = Slurp(P("fb.jsonl"));
    EXPECT_EQ(feedback.find("label"), std::string::npos);
    EXPECT_EQ(std::count(feedback.begin(), feedback.end(), '\n'), 300);
    auto atk = Cli({"attack", "--model", P("model.json"), "--feedback",
                    P("fb.jsonl"), "--labels", P("pop/labels.csv"),
                    "--attacker", "lse", "--out", P("scores.csv")});
    ASSERT_EQ(atk.code, 0) << atk.err;
    EXPECT_NE(atk.out.find("auc "), std::string::npos);
  }
  auto raw = Cli({"attack", "--model", P("model.json"), "--ratings",
                  P("pop/ratings.dat"), "--labels", P("pop/labels.csv"),
                  "--attacker", "lse", "--out", P("raw.csv")});
  ASSERT_EQ(raw.code, 0) << raw.err;
  EXPECT_EQ(Slurp(P("raw.csv")).substr(0, 5), "user,");

  auto drop = Cli({"drop-stats", "--model", P("model.json"), "--ratings",
                   P("pop/ratings.dat"), "--labels", P("pop/labels.csv"),
                   "--out", P("drop.json")});
  ASSERT_EQ(drop.code, 0) << drop.err;
  EXPECT_EQ(nlohmann::json::parse(Slurp(P("drop.json")))["n_users"], 300);
}

TEST_F(CliTest, EvaluateAndSweepFixture) {
  const std::string config = std::string(PRIVMF_SOURCE_DIR) + "/data/eval_small.json";
  auto ev = Cli({"evaluate", "--config", config, "--out-dir", P("report"),
                 "--folds", "3"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  auto report = nlohmann::json::parse(Slurp(P("report/report.json")));
  EXPECT_EQ(report["summary"].size(), 10u);
  EXPECT_FALSE(Slurp(P("report/report.csv")).empty());
  EXPECT_NE(ev.out.find("MPSS"), std::string::npos);

  auto sw = Cli({"sweep", "--config", config, "--folds", "3", "--out",
                 P("curve.csv")});
  ASSERT_EQ(sw.code, 0) << sw.err;
  const std::string curve = Slurp(P("curve.csv"));
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 4);
  EXPECT_EQ(Cli({"sweep", "--config", config, "--alphas", "2", "--out",
                 P("c2.csv")}).code,
            kExitData);
}

TEST_F(CliTest, ServeAndAgentOverLoopback) {
  Prepare();
  CliResult server;
  std::thread serve([&] {
    server = Cli({"serve", "--model", P("model.json"), "--host", "127.0.0.1",
                  "--port", "0", "--protocol", "mpss", "--port-file",
                  P("port"), "--max-sessions", "1"});
  });
  for (int i = 0; i < 500 && !fs::exists(P("port")); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_TRUE(fs::exists(P("port")));
  std::string port = Slurp(P("port"));
  while (!port.empty() && std::isspace(static_cast<unsigned char>(port.back()))) port.pop_back();
  auto agent = Cli({"agent", "--host", "127.0.0.1", "--port", port,
                    "--protocol", "mpss", "--ratings", P("pop/ratings.dat"),
                    "--user", "4", "--x0", "1", "--out", P("est.json")});
  serve.join();
  ASSERT_EQ(agent.code, 0) << agent.err;
  EXPECT_EQ(server.code, 0) << server.err;
  auto est = nlohmann::json::parse(Slurp(P("est.json")));
  EXPECT_EQ(est["x_hat"].size(), 3u);
}

TEST(CliBinaryTest, ToolReportsMissingFile) {
  const std::string cmd = std::string(PRIVMF_TOOL_PATH) +
                          " train --ratings /nonexistent/r.dat --labels "
                          "/nonexistent/l.csv --out /tmp/x.json 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string output;
  char buf[256];
  while (std::fgets(buf, sizeof(buf), pipe)) output += buf;
  const int status = ::pclose(pipe);
  EXPECT_EQ(WEXITSTATUS(status), kExitData);
  EXPECT_NE(output.find("/nonexistent/r.dat"), std::string::npos);
}

}  // namespace
}  // namespace privmf
