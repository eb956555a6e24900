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

// Honest-then-attack provers, attack files, and the closed-form soundness
// predictions they are compared against.

#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qpip/circuit.hpp"
#include "qpip/pauli.hpp"
#include "qpip/protocol.hpp"
#include "qpip/workspace.hpp"

namespace qpip {

/// Largest m for which a channel attack is checked densely and simulated
/// coherently.
inline constexpr std::size_t kMaxChannelRegisters = 6;

using KrausOperator = std::vector<PauliTerm>;

/// A channel {E_k} on the m attacked registers, each E_k = sum_Q alpha_Q Q.
struct AttackSpec {
  ProtocolDims dims;
  std::vector<KrausOperator> kraus;

  /// A single Kraus operator with a single Pauli term.
  bool is_single_pauli() const { return kraus.size() == 1 && kraus.front().size() == 1; }

  /// Throws std::invalid_argument when the spec is not a valid attack.
  void validate() const {
    if (kraus.empty()) throw std::invalid_argument("attack has no Kraus operators");
    const std::size_t m = dims.m();
    for (const auto& e : kraus) {
      if (e.empty()) throw std::invalid_argument("attack has an empty Kraus operator");
      std::set<std::string> seen;
      for (const auto& term : e) {
        if (term.pauli.size() != m) {
          throw std::invalid_argument("attack term " + term.pauli.letters_string() + " has length " +
                                      std::to_string(term.pauli.size()) + ", layout expects m = " +
                                      std::to_string(m));
        }
        if (!seen.insert(term.pauli.letters_string()).second) {
          throw std::invalid_argument("attack repeats Pauli " + term.pauli.letters_string());
        }
      }
    }
    if (is_single_pauli()) {
      if (std::abs(std::abs(kraus.front().front().coefficient) - 1.0) > kTolerance) {
        throw std::invalid_argument("single-Pauli attack needs a coefficient of modulus 1");
      }
      return;
    }
    if (m > kMaxChannelRegisters) {
      throw CapacityError("attacks with several terms are limited to m <= " + std::to_string(kMaxChannelRegisters) +
                          " (got m = " + std::to_string(m) + ")");
    }
    const auto dim = Eigen::Index{1} << m;
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& e : kraus) {
      const Eigen::MatrixXcd em = kraus_matrix(e);
      sum += em.adjoint() * em;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sum);
    if (eig.eigenvalues().maxCoeff() > 1.0 + kTolerance) {
      throw std::invalid_argument("attack is not a channel: sum of E^dagger E exceeds the identity");
    }
  }
};

// ---------------------------------------------------------------------------
// Attack file format

namespace detail {

inline Complex parse_coefficient(std::string_view text, std::size_t line) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw ParseError(line, "coefficient must be '<re>,<im>'");
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || s.empty()) {
      throw ParseError(line, "bad number '" + std::string(s) + "'");
    }
    return v;
  };
  return {number(text.substr(0, comma)), number(text.substr(comma + 1))};
}

}  // namespace detail

/// One term per line, "<re>,<im> <PauliString>". A line holding only "---"
/// starts the next Kraus operator. '#' starts a comment.
inline AttackSpec parse_attack(std::string_view text, ProtocolDims dims) {
  AttackSpec spec;
  spec.dims = dims;
  spec.kraus.emplace_back();
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() == 1 && tok[0] == "---") {
      if (spec.kraus.back().empty()) throw ParseError(line_no, "empty Kraus operator before '---'");
      spec.kraus.emplace_back();
      continue;
    }
    if (tok.size() != 2) throw ParseError(line_no, "expected '<re>,<im> <PauliString>'");
    PauliTerm term;
    term.coefficient = detail::parse_coefficient(tok[0], line_no);
    try {
      term.pauli = PauliString::parse(tok[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    spec.kraus.back().push_back(std::move(term));
  }
  if (spec.kraus.back().empty()) {
    if (spec.kraus.size() == 1) throw ParseError(line_no, "attack file has no terms");
    spec.kraus.pop_back();
  }
  spec.validate();
  return spec;
}

inline AttackSpec load_attack(const std::string& path, ProtocolDims dims) {
  const auto text = detail::read_file(path);
  try {
    return parse_attack(text, dims);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.message(), path);
  }
}

inline AttackSpec single_pauli_attack(const PauliString& q, ProtocolDims dims) {
  AttackSpec spec{dims, {{PauliTerm{q, {1.0, 0.0}}}}};
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Attacked prover

/// Honest gates, then the attack on the m registers just before control goes
/// back to the verifier.
///
/// A single Pauli is applied letter by letter: letters on measured gadget
/// registers right before those are handed back, data letters at the end.
/// Letters on classical-bit registers act on a copy of a known bit and only
/// change a global phase, so they are dropped. Any other attack keeps every
/// register coherent and applies the sampled Kraus operator at the end.
class AttackedProver : public HonestProver {
 public:
  explicit AttackedProver(AttackSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

  bool defers_measurement() const override { return !spec_.is_single_pauli(); }

  std::optional<Bit> t_gadget(ProverPort& port, const GadgetRegisters& regs) override {
    if (regs.index >= spec_.dims.t) throw std::invalid_argument("attack layout has fewer gadgets than the program");
    HonestProver::t_gadget(port, regs);
    if (spec_.is_single_pauli()) {
      const Pauli p = letter(spec_.dims.measured_register(regs.index));
      if (p != Pauli::I) port.apply_pauli(p, regs.data);
    }
    return std::nullopt;
  }

  void finish(ProverPort& port, const AttackLayout& layout) override {
    if (layout.dims != spec_.dims) {
      throw std::invalid_argument("attack layout (t=" + std::to_string(spec_.dims.t) +
                                  ", n=" + std::to_string(spec_.dims.n) + ") does not match the program (t=" +
                                  std::to_string(layout.dims.t) + ", n=" + std::to_string(layout.dims.n) + ")");
    }
    if (spec_.is_single_pauli()) {
      for (std::size_t w = 0; w < layout.dims.n; ++w) {
        const auto reg = layout.dims.data_register(w);
        const Pauli p = letter(reg);
        if (p != Pauli::I) port.apply_pauli(p, *layout.registers[reg]);
      }
      return;
    }
    std::vector<RegisterId> regs;
    for (const auto& r : layout.registers) {
      if (!r) throw ProtocolError("coherent attack needs every register of the layout");
      regs.push_back(*r);
    }
    if (spec_.kraus.size() == 1) {
      port.apply_kraus(spec_.kraus.front(), regs);
      port.normalize();
      return;
    }
    // Norm-weighted choice of one Kraus operator.
    const State before = port.snapshot();
    std::vector<State> branches;
    std::vector<double> weights;
    double total = 0.0;
    for (const auto& e : spec_.kraus) {
      port.restore(before);
      port.apply_kraus(e, regs);
      weights.push_back(port.norm_squared());
      total += weights.back();
      branches.push_back(port.snapshot());
    }
    if (total <= 0.0) throw std::runtime_error("attack annihilates the state");
    double u = port.rng().uniform() * total;
    std::size_t pick = 0;
    while (pick + 1 < weights.size() && u >= weights[pick]) u -= weights[pick++];
    port.restore(std::move(branches[pick]));
    port.normalize();
  }

  const AttackSpec& spec() const { return spec_; }

 private:
  Pauli letter(std::size_t reg) const { return spec_.kraus.front().front().pauli[reg]; }

  AttackSpec spec_;
};

inline std::unique_ptr<Prover> attacked_prover(const AttackSpec& spec) {
  return std::make_unique<AttackedProver>(spec);
}

// ---------------------------------------------------------------------------
// Predictions

struct BenignSplit {
  double benign = 0.0;
  double non_benign = 0.0;
};

/// |alpha_Q|^2 mass of a single Kraus operator on benign and non-benign
/// Paulis. Throws unless the masses sum to 1.
inline BenignSplit benign_split(std::span<const PauliTerm> terms, const ProtocolDims& dims) {
  BenignSplit s;
  for (const auto& t : terms) {
    (classify_benign(t.pauli, dims) ? s.benign : s.non_benign) += std::norm(t.coefficient);
  }
  if (std::abs(s.benign + s.non_benign - 1.0) > kTolerance) {
    throw std::invalid_argument("Kraus operator is not normalized: sum |alpha|^2 = " +
                                std::to_string(s.benign + s.non_benign));
  }
  return s;
}

/// Probability that one of the test runs rejects: the non-benign mass.
inline double predicted_test_rejection(std::span<const PauliTerm> terms, const ProtocolDims& dims) {
  return benign_split(terms, dims).non_benign;
}

/// Upper bound on computation-run acceptance: p * benign + non-benign.
inline double predicted_comp_acceptance(std::span<const PauliTerm> terms, const ProtocolDims& dims, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  const auto s = benign_split(terms, dims);
  return p * s.benign + s.non_benign;
}

struct AcceptanceBound {
  double bound = 0.0;
  /// p > 1/3: outside the NO side of the promise, the bound is not claimed.
  bool outside_promise = false;
};

/// Random-run acceptance bound: the computation run accepts with at most
/// p*B + N, and the non-benign mass N rejects in at least one of the two test
/// runs, so the tests contribute at most 2 - N. Total (p*B + 2) / 3.
inline AcceptanceBound overall_acceptance_bound(std::span<const PauliTerm> terms, const ProtocolDims& dims,
                                                double p) {
  const auto s = benign_split(terms, dims);
  const double comp = predicted_comp_acceptance(terms, dims, p);
  return {(comp + 2.0 - s.non_benign) / 3.0, p > 1.0 / 3.0 + 1e-12};
}

// ---------------------------------------------------------------------------
// Bit-flip propagation

struct BitflipSetting {
  Bit a = 0, b = 0;  // input pad
  Bit c = 0;         // observed outcome on the flipped measured wire
  Bit d = 0, e = 0;  // aux randomness
  Bit x = 0;         // reply bit; y = a^c^d^x
};

/// Runs a computation T-gadget on X^a Z^b |psi> with an X inserted on the
/// measured wire just before its measurement, post-selected on outcome c. The
/// verifier, who believes c, holds the key K of the honest formula evaluated
/// at c^1 instead. Checks that the output equals K Z^{a^c^x} P T|psi>, i.e.
/// the flip costs exactly an extra Z^{a^c^x} P under the pad.
inline bool lemma_bitflip_propagation_check(const BitflipSetting& s, const State& psi) {
  if (psi.num_qubits() != 1) throw std::invalid_argument("lemma_bitflip_propagation_check: |psi> must be one qubit");
  const Bit y = s.a ^ s.c ^ s.d ^ s.x;

  State st = psi;
  if (s.b) st.apply(Gate{GateKind::Z}, 0);
  if (s.a) st.apply(Gate{GateKind::X}, 0);
  TGadgetRandomness r{s.d, s.e, y, 0};
  st.append_qubit(aux_amplitudes(t_gadget_aux_state(Variant::Comp, r)));
  st.apply_cnot(1, 0);
  st.apply_x(0);  // the attack
  st.project(0, s.c);
  if (st.norm_squared() < 1e-12) return false;
  st.remove_qubit(0, s.c);
  st.normalize();
  if (s.x) st.apply(Gate{GateKind::P}, 0);

  const Bit c_true = s.c ^ 1;
  const auto key = verifier_t_gadget_update(Variant::Comp, {s.a, s.b}, c_true, r).pad;
  State expected = psi;
  expected.apply(Gate{GateKind::T}, 0);
  expected.apply(Gate{GateKind::P}, 0);
  if (s.a ^ s.c ^ s.x) expected.apply(Gate{GateKind::Z}, 0);
  if (key.b) expected.apply(Gate{GateKind::Z}, 0);
  if (key.a) expected.apply(Gate{GateKind::X}, 0);
  return fidelity_up_to_phase(st, expected) >= 1.0 - kTolerance;
}

}  // namespace qpip
