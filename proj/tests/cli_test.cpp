// Copyright 2026 The qpip Authors.
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

// Drives the built `verify` binary and checks output and exit codes.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(VERIFY_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {};
  Result r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string circuit(const char* name) { return std::string(SAMPLES_DIR) + "/circuits/" + name; }
std::string attack(const char* name) { return std::string(SAMPLES_DIR) + "/attacks/" + name; }

TEST(Cli, OracleHadamard) {
  const auto r = run("oracle --circuit " + circuit("hadamard.txt"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("p = 0.5\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("label = NEITHER"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("n = 1, t = 6, m = 13"), std::string::npos) << r.out;
}

TEST(Cli, OracleNoInstance) {
  const auto r = run("oracle --circuit " + circuit("no_instance.txt"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("label = NO"), std::string::npos) << r.out;
}

TEST(Cli, HonestRunJson) {
  const auto r = run("run --circuit " + circuit("bell_t.txt") + " --protocol epr --trials 300 --seed 4 --format json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["trials"], 300);
  EXPECT_EQ(j["protocol"], "epr");
  EXPECT_EQ(j["per_run"]["xtest"]["check_failures"], 0);
  for (const auto& c : j["criteria"]) EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
}

TEST(Cli, ReportIsDeterministicAcrossWorkerCounts) {
  const std::string base = "run --circuit " + circuit("rotation.txt") + " --protocol p1 --trials 500 --seed 99";
  const auto a = run(base + " --workers 1");
  const auto b = run(base + " --workers 3");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto c = run(base + " --workers 1 --seed 100");
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, ReportToFileCsv) {
  const std::string path = ::testing::TempDir() + "qpip_cli_report.csv";
  const auto r = run("run --circuit " + circuit("t_gate.txt") + " --attack " + attack("flip_measured.txt") +
                     " --protocol p1 --run xtest --trials 50 --format csv --report " + path);
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str().rfind("run,trials,accepts,", 0), 0u) << ss.str();
  EXPECT_NE(ss.str().find("xtest,50,0,50,"), std::string::npos) << ss.str();
}

TEST(Cli, CoherentAttackText) {
  const auto r = run("run --circuit " + circuit("t_gate.txt") + " --attack " + attack("mixed.txt") +
                     " --protocol epr --trials 200 --format text");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("attack    "), std::string::npos) << r.out;
}

TEST(Cli, Check) {
  const auto r = run("check");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS bit-flip propagation"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("run").code, 1);
  EXPECT_EQ(run("run --circuit /nonexistent.txt").code, 1);
  EXPECT_EQ(run("run --circuit " + circuit("t_gate.txt") + " --protocol p3").code, 1);
  EXPECT_EQ(run("run --circuit " + circuit("t_gate.txt") + " --run sometimes").code, 1);
  EXPECT_EQ(run("run --circuit " + circuit("t_gate.txt") + " --trials 0").code, 1);
  EXPECT_EQ(run("run --circuit " + circuit("t_gate.txt") + " --format xml").code, 1);
}

TEST(Cli, InputErrorsExitOne) {
  EXPECT_EQ(run("oracle --circuit " + circuit("broken.txt")).code, 1);
  EXPECT_EQ(run("run --circuit " + circuit("broken.txt") + " --trials 5").code, 1);
  // attack written for m = 3 against a circuit with m = 13
  EXPECT_EQ(run("run --circuit " + circuit("hadamard.txt") + " --attack " + attack("flip_measured.txt") +
                " --trials 5")
                .code,
            1);
  // several Kraus terms need the epr engine
  EXPECT_EQ(run("run --circuit " + circuit("t_gate.txt") + " --attack " + attack("channel.txt") +
                " --protocol p1 --trials 5")
                .code,
            1);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run("--help").code, 0); }

}  // namespace
