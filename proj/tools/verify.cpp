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

// verify: run protocol experiments, query the circuit oracle, self-check.
//
// Exit status: 0 success, 1 usage or input error, 2 a checked criterion failed.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qpip/qpip.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kCriterionFailed = 2;

int cmd_run(const qpip::ExperimentConfig& cfg, const std::string& format, const std::string& report_path) {
  const auto report = qpip::run_experiment(cfg);
  const auto text = qpip::emit_report(report, format);
  if (report_path.empty() || report_path == "-") {
    std::cout << text;
  } else {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report to " + report_path);
    out << text;
    std::cerr << "accepted " << report.accepts << "/" << report.trials << ", report written to " << report_path
              << "\n";
  }
  for (const auto& c : report.criteria)
    if (!c.passed) std::cerr << "criterion failed: " << c.name << " (" << c.detail << ")\n";
  return report.all_passed() ? kOk : kCriterionFailed;
}

int cmd_oracle(const std::string& path) {
  const auto circuit = qpip::load_circuit(path);
  const auto label = qpip::classify_instance(circuit);
  const auto prog = qpip::compile_to_gadgets(circuit);
  std::cout << "p = " << std::setprecision(12) << label.p << "\n"
            << "label = " << qpip::label_name(label.label) << "\n"
            << "n = " << prog.n << ", t = " << prog.t << ", m = " << prog.dims().m() << "\n";
  return kOk;
}

int cmd_check() {
  bool ok = true;
  for (const auto& r : qpip::run_builtin_checks()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? kOk : kCriterionFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and check the verifier/prover protocols on small circuits"};
  app.require_subcommand(1);

  qpip::ExperimentConfig cfg;
  std::string attack, protocol = "epr", run = "random", format = "json", report_path;
  auto* run_cmd = app.add_subcommand("run", "Run a seeded batch of protocol executions");
  run_cmd->add_option("--circuit", cfg.circuit_path, "Circuit file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--attack", attack, "Attack file (terms '<re>,<im> <Pauli>')")->check(CLI::ExistingFile);
  run_cmd->add_option("--protocol", protocol, "p1 or epr")->check(CLI::IsMember({"p1", "epr"}))->capture_default_str();
  run_cmd->add_option("--run", run, "random, comp, xtest or ztest")
      ->check(CLI::IsMember({"random", "comp", "xtest", "ztest"}))
      ->capture_default_str();
  run_cmd->add_option("--trials", cfg.trials, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
  run_cmd->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  run_cmd->add_option("--workers", cfg.workers, "Worker threads (0: all cores)")->capture_default_str();
  run_cmd->add_option("--report", report_path, "Report path (default: stdout)");
  run_cmd->add_option("--format", format, "json, csv or text")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();

  std::string oracle_path;
  auto* oracle_cmd = app.add_subcommand("oracle", "Print p(U) and the instance label of a circuit");
  oracle_cmd->add_option("--circuit", oracle_path, "Circuit file")->required()->check(CLI::ExistingFile);

  auto* check_cmd = app.add_subcommand("check", "Run the built-in property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*run_cmd) {
      if (!attack.empty()) cfg.attack_path = attack;
      cfg.protocol = qpip::parse_protocol(protocol);
      cfg.run = qpip::parse_run_policy(run);
      return cmd_run(cfg, format, report_path);
    }
    if (*oracle_cmd) return cmd_oracle(oracle_path);
    if (*check_cmd) return cmd_check();
  } catch (const std::exception& e) {
    // parse, capacity and validation errors alike
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
