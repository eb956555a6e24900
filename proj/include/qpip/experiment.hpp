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

// Seeded batches of protocol runs and their reports.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpip/adversary.hpp"
#include "qpip/circuit.hpp"
#include "qpip/epr.hpp"
#include "qpip/protocol.hpp"
#include "qpip/stats.hpp"

namespace qpip {

enum class ProtocolKind { P1, Epr };
enum class RunPolicy { Random, Comp, XTest, ZTest };
enum class ReportFormat { Json, Csv, Text };

inline ProtocolKind parse_protocol(std::string_view s) {
  if (s == "p1") return ProtocolKind::P1;
  if (s == "epr") return ProtocolKind::Epr;
  throw std::invalid_argument("unknown protocol '" + std::string(s) + "' (expected p1 or epr)");
}

inline RunPolicy parse_run_policy(std::string_view s) {
  if (s == "random") return RunPolicy::Random;
  if (s == "comp") return RunPolicy::Comp;
  if (s == "xtest") return RunPolicy::XTest;
  if (s == "ztest") return RunPolicy::ZTest;
  throw std::invalid_argument("unknown run policy '" + std::string(s) + "' (expected random, comp, xtest or ztest)");
}

inline ReportFormat parse_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "text") return ReportFormat::Text;
  throw std::invalid_argument("unknown report format '" + std::string(s) + "' (expected json, csv or text)");
}

constexpr std::string_view protocol_name(ProtocolKind p) { return p == ProtocolKind::P1 ? "p1" : "epr"; }

constexpr std::string_view policy_name(RunPolicy r) {
  switch (r) {
    case RunPolicy::Random: return "random";
    case RunPolicy::Comp: return "comp";
    case RunPolicy::XTest: return "xtest";
    case RunPolicy::ZTest: return "ztest";
  }
  return "?";
}

struct ExperimentConfig {
  std::string circuit_path;
  std::optional<std::string> attack_path;
  ProtocolKind protocol = ProtocolKind::Epr;
  RunPolicy run = RunPolicy::Random;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency
  double level = 0.99;
};

/// An experiment with the inputs already loaded.
struct Experiment {
  Circuit circuit = Circuit(1);
  std::optional<AttackSpec> attack;
  ProtocolKind protocol = ProtocolKind::Epr;
  RunPolicy run = RunPolicy::Random;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  double level = 0.99;
  std::string circuit_label;  // path or description, reported verbatim
  std::string attack_label;
};

struct RunCounts {
  std::uint64_t trials = 0;
  std::uint64_t accepts = 0;
  std::uint64_t check_failures = 0;
  std::array<std::uint64_t, 2> output{0, 0};  // decrypted output bit histogram

  double acceptance() const { return trials ? static_cast<double>(accepts) / static_cast<double>(trials) : 0.0; }

  RunCounts& operator+=(const RunCounts& o) {
    trials += o.trials;
    accepts += o.accepts;
    check_failures += o.check_failures;
    output[0] += o.output[0];
    output[1] += o.output[1];
    return *this;
  }
};

struct Predictions {
  double p = 0.0;
  Label label = Label::Neither;
  double honest_acceptance = 0.0;  // 2/3 + p/3
  std::optional<double> test_rejection;
  std::optional<double> comp_acceptance_bound;
  std::optional<double> overall_acceptance_bound;
  bool outside_promise = false;
};

struct Criterion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string circuit;
  std::string attack;
  std::string protocol;
  std::string run_policy;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t t = 0;
  std::uint64_t trials = 0;
  std::uint64_t accepts = 0;
  double level = 0.99;
  Interval ci;
  std::array<RunCounts, 3> per_run{};
  Predictions predictions;
  std::vector<Criterion> criteria;

  double acceptance() const { return trials ? static_cast<double>(accepts) / static_cast<double>(trials) : 0.0; }
  bool all_passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.passed; });
  }
};

/// Simulated qubits a run needs at its peak.
inline std::size_t required_qubits(const GadgetProgram& prog, ProtocolKind protocol, bool coherent) {
  if (protocol == ProtocolKind::P1) return prog.n + 1;
  if (coherent) return 2 * prog.n + 3 * prog.t;
  return 2 * prog.n + prog.t + 2;
}

namespace detail {

inline RunType pick_run(RunPolicy policy, Rng& rng) {
  switch (policy) {
    case RunPolicy::Comp: return RunType::Computation;
    case RunPolicy::XTest: return RunType::XTest;
    case RunPolicy::ZTest: return RunType::ZTest;
    case RunPolicy::Random: break;
  }
  return random_run(rng);
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline void add_criteria(Report& r, bool attacked) {
  const auto& pr = r.predictions;
  const auto& comp = r.per_run[0];
  const auto& xt = r.per_run[1];
  const auto& zt = r.per_run[2];
  const bool random = r.run_policy == "random";

  if (!attacked) {
    if (xt.trials || zt.trials) {
      const bool ok = xt.accepts == xt.trials && zt.accepts == zt.trials;
      r.criteria.push_back({"test_runs_accept_all", ok,
                            std::to_string(xt.accepts + zt.accepts) + "/" + std::to_string(xt.trials + zt.trials)});
    }
    if (comp.trials) {
      const double slack = sigma_slack(pr.p, comp.trials);
      r.criteria.push_back({"comp_matches_oracle", std::abs(comp.acceptance() - pr.p) <= slack,
                            fmt(comp.acceptance()) + " vs p = " + fmt(pr.p) + " +- " + fmt(slack)});
    }
    if (random) {
      const double slack = sigma_slack(pr.honest_acceptance, r.trials);
      r.criteria.push_back({"overall_matches_completeness", std::abs(r.acceptance() - pr.honest_acceptance) <= slack,
                            fmt(r.acceptance()) + " vs " + fmt(pr.honest_acceptance) + " +- " + fmt(slack)});
    }
    return;
  }
  if (!pr.comp_acceptance_bound) return;
  if (comp.trials) {
    const double bound = *pr.comp_acceptance_bound;
    const double slack = sigma_slack(bound, comp.trials);
    r.criteria.push_back({"comp_within_bound", comp.acceptance() <= bound + slack,
                          fmt(comp.acceptance()) + " <= " + fmt(bound) + " + " + fmt(slack)});
  }
  if (xt.trials && zt.trials) {
    const double n_mass = *pr.test_rejection;
    const double rej = (1.0 - xt.acceptance()) + (1.0 - zt.acceptance());
    const double s = std::sqrt(std::pow(binomial_sigma(n_mass, xt.trials), 2) +
                               std::pow(binomial_sigma(n_mass, zt.trials), 2));
    const double slack = std::max(3.0 * s, 1.0 / static_cast<double>(std::min(xt.trials, zt.trials)));
    r.criteria.push_back({"test_detection", rej >= n_mass - slack,
                          "xtest+ztest rejection " + fmt(rej) + " >= " + fmt(n_mass) + " - " + fmt(slack)});
  }
  if (random && !pr.outside_promise) {
    const double bound = *pr.overall_acceptance_bound;
    const double slack = sigma_slack(bound, r.trials);
    r.criteria.push_back({"overall_within_bound", r.acceptance() <= bound + slack,
                          fmt(r.acceptance()) + " <= " + fmt(bound) + " + " + fmt(slack)});
  }
}

}  // namespace detail

inline Report run_experiment(const Experiment& ex) {
  if (ex.trials == 0) throw std::invalid_argument("trials must be at least 1");
  const GadgetProgram prog = compile_to_gadgets(ex.circuit);
  const bool coherent = ex.attack && !ex.attack->is_single_pauli();
  if (ex.attack) {
    if (ex.attack->dims != prog.dims()) {
      throw std::invalid_argument("attack layout has m = " + std::to_string(ex.attack->dims.m()) +
                                  " but the compiled program has m = 2t + n = " + std::to_string(prog.dims().m()));
    }
    if (coherent && ex.protocol == ProtocolKind::P1) {
      throw std::invalid_argument("attacks with several terms run on the epr protocol only");
    }
  }
  const std::size_t need = required_qubits(prog, ex.protocol, coherent);
  require_capacity(need, kMaxQubits,
                   "this program on protocol " + std::string(protocol_name(ex.protocol)) + " (t = " +
                       std::to_string(prog.t) + ", n = " + std::to_string(prog.n) + ")");

  unsigned workers = ex.workers ? ex.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, ex.trials));
  std::vector<std::array<RunCounts, 3>> partial(workers);
  std::vector<std::exception_ptr> errors(workers);

  auto work = [&](unsigned w) {
    try {
      std::unique_ptr<Prover> prover =
          ex.attack ? attacked_prover(*ex.attack) : std::unique_ptr<Prover>(std::make_unique<HonestProver>());
      for (std::uint64_t i = w; i < ex.trials; i += workers) {
        Rng rng(derive_seed(ex.seed, i));
        const RunType run = detail::pick_run(ex.run, rng);
        const Outcome o = ex.protocol == ProtocolKind::P1 ? execute(prog, run, *prover, rng)
                                                          : execute_epr_run(prog, *prover, run, rng);
        auto& c = partial[w][static_cast<std::size_t>(run)];
        ++c.trials;
        c.accepts += o.accept ? 1 : 0;
        c.check_failures += o.transcript.checks_passed() ? 0 : 1;
        ++c.output[o.transcript.decrypted & 1];
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Report r;
  r.circuit = ex.circuit_label;
  r.attack = ex.attack ? (ex.attack_label.empty() ? std::string("inline") : ex.attack_label) : "";
  r.protocol = std::string(protocol_name(ex.protocol));
  r.run_policy = std::string(policy_name(ex.run));
  r.seed = ex.seed;
  r.n = prog.n;
  r.t = prog.t;
  r.level = ex.level;
  for (const auto& p : partial)
    for (std::size_t k = 0; k < 3; ++k) r.per_run[k] += p[k];
  for (const auto& c : r.per_run) {
    r.trials += c.trials;
    r.accepts += c.accepts;
  }
  r.ci = wilson_interval(r.accepts, r.trials, ex.level);

  auto& pr = r.predictions;
  const auto label = classify_instance(ex.circuit);
  pr.p = label.p;
  pr.label = label.label;
  pr.honest_acceptance = 2.0 / 3.0 + pr.p / 3.0;
  if (ex.attack && ex.attack->kraus.size() == 1) {
    const auto& e = ex.attack->kraus.front();
    const auto dims = ex.attack->dims;
    pr.test_rejection = predicted_test_rejection(e, dims);
    pr.comp_acceptance_bound = predicted_comp_acceptance(e, dims, pr.p);
    const auto b = overall_acceptance_bound(e, dims, pr.p);
    pr.overall_acceptance_bound = b.bound;
    pr.outside_promise = b.outside_promise;
  }
  detail::add_criteria(r, ex.attack.has_value());
  return r;
}

inline Report run_experiment(const ExperimentConfig& cfg) {
  Experiment ex;
  ex.circuit = load_circuit(cfg.circuit_path);
  ex.circuit_label = cfg.circuit_path;
  if (cfg.attack_path) {
    ex.attack = load_attack(*cfg.attack_path, compile_to_gadgets(ex.circuit).dims());
    ex.attack_label = *cfg.attack_path;
  }
  ex.protocol = cfg.protocol;
  ex.run = cfg.run;
  ex.trials = cfg.trials;
  ex.seed = cfg.seed;
  ex.workers = cfg.workers;
  ex.level = cfg.level;
  return run_experiment(ex);
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json report_json(const Report& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["circuit"] = r.circuit;
  j["attack"] = r.attack.empty() ? ordered_json(nullptr) : ordered_json(r.attack);
  j["protocol"] = r.protocol;
  j["run_policy"] = r.run_policy;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["t"] = r.t;
  j["trials"] = r.trials;
  j["accepts"] = r.accepts;
  j["acceptance"] = r.acceptance();
  j["ci"] = {{"level", r.level}, {"low", r.ci.low}, {"high", r.ci.high}};
  ordered_json per_run = ordered_json::object();
  for (RunType run : kAllRunTypes) {
    const auto& c = r.per_run[static_cast<std::size_t>(run)];
    const auto ci = wilson_interval(c.accepts, c.trials, r.level);
    per_run[std::string(run_name(run))] = {{"trials", c.trials},
                                           {"accepts", c.accepts},
                                           {"check_failures", c.check_failures},
                                           {"output", {c.output[0], c.output[1]}},
                                           {"acceptance", c.acceptance()},
                                           {"ci_low", ci.low},
                                           {"ci_high", ci.high}};
  }
  j["per_run"] = per_run;
  const auto& pr = r.predictions;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  j["predictions"] = {{"p", pr.p},
                      {"label", std::string(label_name(pr.label))},
                      {"honest_acceptance", pr.honest_acceptance},
                      {"test_rejection", opt(pr.test_rejection)},
                      {"comp_acceptance_bound", opt(pr.comp_acceptance_bound)},
                      {"overall_acceptance_bound", opt(pr.overall_acceptance_bound)},
                      {"outside_promise", pr.outside_promise}};
  ordered_json crit = ordered_json::array();
  for (const auto& c : r.criteria) crit.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["criteria"] = crit;
  return j;
}

inline constexpr std::string_view kCsvHeader = "run,trials,accepts,check_failures,output0,output1,acceptance,ci_low,ci_high";

inline std::string emit_report(const Report& r, ReportFormat format) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::Json: return report_json(r).dump(2) + "\n";
    case ReportFormat::Csv: {
      os << kCsvHeader << "\n";
      auto row = [&](std::string_view name, const RunCounts& c) {
        const auto ci = wilson_interval(c.accepts, c.trials, r.level);
        os << name << ',' << c.trials << ',' << c.accepts << ',' << c.check_failures << ',' << c.output[0] << ','
           << c.output[1] << ',' << std::setprecision(10) << c.acceptance() << ',' << ci.low << ',' << ci.high
           << "\n";
      };
      RunCounts all;
      for (RunType run : kAllRunTypes) {
        const auto& c = r.per_run[static_cast<std::size_t>(run)];
        row(run_name(run), c);
        all += c;
      }
      row("all", all);
      return os.str();
    }
    case ReportFormat::Text: {
      os << "circuit   " << r.circuit << " (n = " << r.n << ", t = " << r.t << ")\n";
      if (!r.attack.empty()) os << "attack    " << r.attack << "\n";
      os << "protocol  " << r.protocol << ", runs " << r.run_policy << "\n";
      os << "seed      " << r.seed << "\n";
      os << "p         " << detail::fmt(r.predictions.p) << " (" << label_name(r.predictions.label) << ")\n";
      os << "accepted  " << r.accepts << "/" << r.trials << " = " << detail::fmt(r.acceptance()) << "  ["
         << detail::fmt(r.ci.low) << ", " << detail::fmt(r.ci.high) << "] at " << r.level << "\n";
      for (RunType run : kAllRunTypes) {
        const auto& c = r.per_run[static_cast<std::size_t>(run)];
        if (!c.trials) continue;
        os << "  " << std::left << std::setw(6) << run_name(run) << std::right << c.accepts << "/" << c.trials
           << " accepted, " << c.check_failures << " failed checks, output 0:" << c.output[0]
           << " 1:" << c.output[1] << "\n";
      }
      const auto& pr = r.predictions;
      if (pr.test_rejection) {
        os << "predicted test rejection " << detail::fmt(*pr.test_rejection) << ", comp acceptance <= "
           << detail::fmt(*pr.comp_acceptance_bound) << ", overall <= " << detail::fmt(*pr.overall_acceptance_bound)
           << (pr.outside_promise ? " (p > 1/3, bound not claimed)" : "") << "\n";
      } else if (r.attack.empty()) {
        os << "expected acceptance " << detail::fmt(pr.honest_acceptance) << "\n";
      }
      for (const auto& c : r.criteria) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
      return os.str();
    }
  }
  throw std::invalid_argument("unknown report format");
}

inline std::string emit_report(const Report& r, std::string_view format) {
  return emit_report(r, parse_format(format));
}

}  // namespace qpip
