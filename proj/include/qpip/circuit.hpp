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

// Circuits over {X, Z, H, CNOT, T}, their text format, and the gadget
// compiler used by the verification protocols.
//
// Text format, one item per line:
//
//   qubits <n>
//   X <i> | Z <i> | H <i> | T <i> | CNOT <control> <target>
//
// '#' starts a comment; blank lines are ignored. The output qubit is n-1.

#pragma once

#include <array>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qpip/pauli.hpp"
#include "qpip/statevec.hpp"

namespace qpip {

/// Parse failure with a 1-based line number (0 when not line-specific).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message, std::string source = {})
      : std::runtime_error(format(line, message, source)), line_(line), message_(message) {}

  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  static std::string format(std::size_t line, const std::string& message, const std::string& source) {
    std::string out = source.empty() ? std::string() : source + ":";
    if (line) out += std::to_string(line) + ": ";
    else if (!out.empty()) out += " ";
    return out + message;
  }

  std::size_t line_;
  std::string message_;
};

struct Instruction {
  Gate gate;
  std::array<std::size_t, 2> qubits{};  // CNOT: (control, target)

  std::span<const std::size_t> targets() const { return {qubits.data(), gate.arity()}; }
  friend bool operator==(const Instruction& a, const Instruction& b) {
    return a.gate == b.gate && a.qubits[0] == b.qubits[0] &&
           (a.gate.arity() == 1 || a.qubits[1] == b.qubits[1]);
  }
};

class Circuit {
 public:
  explicit Circuit(std::size_t num_qubits) : n_(num_qubits) {
    if (num_qubits == 0) throw std::invalid_argument("Circuit: needs at least one qubit");
  }

  std::size_t num_qubits() const { return n_; }
  std::size_t output_qubit() const { return n_ - 1; }
  const std::vector<Instruction>& gates() const { return gates_; }

  Circuit& add(GateKind kind, std::size_t q) {
    if (kind == GateKind::CNOT) throw std::invalid_argument("Circuit::add: CNOT needs two qubits");
    return push({Gate{kind}, {q, 0}});
  }

  Circuit& add(GateKind kind, std::size_t control, std::size_t target) {
    if (kind != GateKind::CNOT) throw std::invalid_argument("Circuit::add: only CNOT takes two qubits");
    return push({Gate{kind}, {control, target}});
  }

  std::size_t count(GateKind kind) const {
    std::size_t c = 0;
    for (const auto& g : gates_) c += g.gate.kind == kind;
    return c;
  }

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  Circuit& push(Instruction ins) {
    if (ins.gate.kind == GateKind::P || ins.gate.dagger) {
      throw std::invalid_argument("Circuit: gate set is {X, Z, H, CNOT, T}");
    }
    for (auto q : ins.targets()) {
      if (q >= n_) {
        throw std::out_of_range("target " + std::to_string(q) + " out of range for " +
                                std::to_string(n_) + " qubits");
      }
    }
    if (ins.gate.kind == GateKind::CNOT && ins.qubits[0] == ins.qubits[1]) {
      throw std::invalid_argument("CNOT control and target must differ");
    }
    gates_.push_back(ins);
    return *this;
  }

  std::size_t n_;
  std::vector<Instruction> gates_;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::size_t parse_index(std::string_view tok, std::size_t line, std::string_view what) {
  std::size_t value = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, "expected " + std::string(what) + ", got '" + std::string(tok) + "'");
  }
  return value;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline Circuit parse_circuit(std::string_view text) {
  std::optional<Circuit> circuit;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;

    if (!circuit) {
      if (tok[0] != "qubits" || tok.size() != 2) {
        throw ParseError(line_no, "expected header 'qubits <n>'");
      }
      const auto n = detail::parse_index(tok[1], line_no, "qubit count");
      if (n == 0) throw ParseError(line_no, "qubit count must be at least 1");
      circuit.emplace(n);
      continue;
    }

    GateKind kind;
    if (tok[0] == "X") kind = GateKind::X;
    else if (tok[0] == "Z") kind = GateKind::Z;
    else if (tok[0] == "H") kind = GateKind::H;
    else if (tok[0] == "T") kind = GateKind::T;
    else if (tok[0] == "CNOT") kind = GateKind::CNOT;
    else throw ParseError(line_no, "unknown gate '" + std::string(tok[0]) + "'");

    const std::size_t arity = kind == GateKind::CNOT ? 2 : 1;
    if (tok.size() != arity + 1) {
      throw ParseError(line_no, std::string(tok[0]) + " expects " + std::to_string(arity) + " qubit index(es)");
    }
    try {
      if (arity == 1) {
        circuit->add(kind, detail::parse_index(tok[1], line_no, "qubit index"));
      } else {
        circuit->add(kind, detail::parse_index(tok[1], line_no, "qubit index"),
                     detail::parse_index(tok[2], line_no, "qubit index"));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!circuit) throw ParseError(line_no, "missing header 'qubits <n>'");
  return *std::move(circuit);
}

inline Circuit load_circuit(const std::string& path) {
  const auto text = detail::read_file(path);
  try {
    return parse_circuit(text);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.message(), path);
  }
}

/// Canonical text form; parse_circuit(serialize(c)) == c.
inline std::string serialize(const Circuit& c) {
  std::string out = "qubits " + std::to_string(c.num_qubits()) + "\n";
  for (const auto& g : c.gates()) {
    out += gate_name(g.gate.kind);
    for (auto q : g.targets()) out += " " + std::to_string(q);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ideal output probability and the promise-problem label

/// Probability of reading 0 on the output qubit of U|0^n>, by direct
/// simulation of the uncompiled circuit.
inline double ideal_probability(const Circuit& circuit) {
  require_capacity(circuit.num_qubits(), kMaxQubits, "ideal_probability");
  State s(circuit.num_qubits());
  for (const auto& g : circuit.gates()) s.apply(g.gate, g.targets());
  return 1.0 - s.probability_one(circuit.output_qubit());
}

enum class Label { Yes, No, Neither };

constexpr std::string_view label_name(Label l) {
  switch (l) {
    case Label::Yes: return "YES";
    case Label::No: return "NO";
    case Label::Neither: return "NEITHER";
  }
  return "?";
}

struct InstanceLabel {
  Label label;
  double p;
};

/// YES iff p >= 2/3, NO iff p <= 1/3. Comparisons allow 1e-12 of rounding so
/// that circuits with p exactly 2/3 or 1/3 land on the promised side.
inline InstanceLabel classify_probability(double p) {
  constexpr double kSlack = 1e-12;
  if (p >= 2.0 / 3.0 - kSlack) return {Label::Yes, p};
  if (p <= 1.0 / 3.0 + kSlack) return {Label::No, p};
  return {Label::Neither, p};
}

inline InstanceLabel classify_instance(const Circuit& circuit) {
  return classify_probability(ideal_probability(circuit));
}

// ---------------------------------------------------------------------------
// Gadget programs

enum class RunType { Computation, XTest, ZTest };
enum class Variant { Comp, XVar, ZVar };

inline constexpr std::array<RunType, 3> kAllRunTypes = {RunType::Computation, RunType::XTest, RunType::ZTest};

constexpr std::string_view run_name(RunType r) {
  switch (r) {
    case RunType::Computation: return "comp";
    case RunType::XTest: return "xtest";
    case RunType::ZTest: return "ztest";
  }
  return "?";
}

constexpr std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Comp: return "Comp";
    case Variant::XVar: return "XVar";
    case Variant::ZVar: return "ZVar";
  }
  return "?";
}

/// Gadget figure used by each run type, indexed by RunType.
struct VariantSelector {
  std::array<Variant, 3> by_run{Variant::Comp, Variant::XVar, Variant::ZVar};

  constexpr Variant operator()(RunType r) const { return by_run[static_cast<std::size_t>(r)]; }
  friend constexpr bool operator==(const VariantSelector&, const VariantSelector&) = default;
};

inline constexpr VariantSelector kBareT{{Variant::Comp, Variant::XVar, Variant::ZVar}};
/// Inside an H expansion the test runs see the data in the swapped basis.
inline constexpr VariantSelector kSwappedT{{Variant::Comp, Variant::ZVar, Variant::XVar}};

/// Clifford applied directly: X/Z by key update only, H/CNOT by the prover.
struct DirectClifford {
  Instruction ins;
  friend bool operator==(const DirectClifford&, const DirectClifford&) = default;
};

struct TGadget {
  std::size_t wire;
  std::size_t index;  // position among the program's T-gadgets
  VariantSelector selector;
  friend bool operator==(const TGadget&, const TGadget&) = default;
};

using GadgetStep = std::variant<DirectClifford, TGadget>;

struct GadgetProgram {
  std::size_t n = 1;
  std::size_t t = 0;
  std::vector<GadgetStep> steps;

  ProtocolDims dims() const { return {n, t}; }
  std::size_t output_wire() const { return n - 1; }

  std::vector<const TGadget*> gadgets() const {
    std::vector<const TGadget*> out;
    for (const auto& s : steps)
      if (const auto* g = std::get_if<TGadget>(&s)) out.push_back(g);
    return out;
  }
};

/// Expands each H into H (TT) H (TT) H (TT) H and assigns every T-gadget the
/// figure it uses per run type. In the X-test run the three P's of an H use
/// (ZVar, XVar, ZVar); in the Z-test run (XVar, ZVar, XVar).
inline GadgetProgram compile_to_gadgets(const Circuit& circuit) {
  GadgetProgram prog;
  prog.n = circuit.num_qubits();
  auto add_t = [&](std::size_t wire, VariantSelector sel) {
    prog.steps.emplace_back(TGadget{wire, prog.t++, sel});
  };
  for (const auto& g : circuit.gates()) {
    switch (g.gate.kind) {
      case GateKind::T: add_t(g.qubits[0], kBareT); break;
      case GateKind::H: {
        const auto w = g.qubits[0];
        const Instruction h{Gate{GateKind::H}, {w, 0}};
        prog.steps.emplace_back(DirectClifford{h});
        for (int p = 0; p < 3; ++p) {
          const auto sel = (p == 1) ? kBareT : kSwappedT;
          add_t(w, sel);
          add_t(w, sel);
          prog.steps.emplace_back(DirectClifford{h});
        }
        break;
      }
      default: prog.steps.emplace_back(DirectClifford{g}); break;
    }
  }
  return prog;
}

}  // namespace qpip
