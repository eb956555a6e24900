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

// Register-addressed simulation workspace and the prover-side interface.
//
// Qubits are referred to by stable RegisterIds; the physical position inside
// the statevector changes as registers are added and measured away.

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpip/pauli.hpp"
#include "qpip/statevec.hpp"

namespace qpip {

using RegisterId = std::size_t;

/// Raised when a prover object breaks the message order of a protocol.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Workspace {
 public:
  explicit Workspace(std::size_t cap = kMaxQubits) : cap_(cap) {}

  RegisterId add(const std::array<Complex, 2>& amplitudes) {
    if (!state_) {
      state_.emplace(1, std::vector<Complex>{amplitudes[0], amplitudes[1]});
    } else {
      require_capacity(state_->num_qubits() + 1, cap_, "simulation");
      state_->append_qubit(amplitudes);
    }
    ids_.push_back(next_);
    return next_++;
  }

  RegisterId add(AuxState s) { return add(aux_amplitudes(s)); }

  /// Adds (|00> + |11>)/sqrt(2); returns (first, second).
  std::pair<RegisterId, RegisterId> add_epr() {
    const auto a = add(AuxState::Plus);
    const auto b = add(AuxState::Zero);
    apply(Gate{GateKind::CNOT}, a, b);
    return {a, b};
  }

  bool contains(RegisterId id) const { return std::find(ids_.begin(), ids_.end(), id) != ids_.end(); }

  std::size_t index(RegisterId id) const {
    const auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw std::out_of_range("register " + std::to_string(id) + " is not live");
    return static_cast<std::size_t>(it - ids_.begin());
  }

  std::vector<std::size_t> indices(std::span<const RegisterId> ids) const {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(index(id));
    return out;
  }

  void apply(Gate g, RegisterId r) { state().apply(g, index(r)); }
  void apply(Gate g, RegisterId r0, RegisterId r1) { state().apply(g, index(r0), index(r1)); }
  void apply(Gate g, std::span<const RegisterId> regs) {
    const auto idx = indices(regs);
    state().apply(g, idx);
  }
  void apply_pauli(Pauli p, RegisterId r) { qpip::apply_pauli(state(), p, index(r)); }

  /// |psi> -> sum_Q alpha_Q Q |psi> with letter i of each Q on regs[i]. No
  /// renormalization.
  void apply_kraus(std::span<const PauliTerm> terms, std::span<const RegisterId> regs) {
    const auto idx = indices(regs);
    const State input = state();
    std::vector<Complex> acc(input.dimension(), Complex{});
    for (const auto& term : terms) {
      State branch = input;
      qpip::apply_pauli(branch, term.pauli, idx);
      const auto amps = branch.amplitudes();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += term.coefficient * amps[i];
    }
    std::copy(acc.begin(), acc.end(), state().amplitudes().begin());
  }

  /// Born-rule measurement; the register is removed afterwards.
  Bit measure(RegisterId r, Rng& rng) {
    auto& s = state();
    const std::size_t q = index(r);
    const double total = s.norm_squared();
    if (total < 1e-24) throw std::runtime_error("measure: degenerate state");
    const Bit outcome = rng.uniform() < s.probability_one(q) / total ? 1 : 0;
    s.project(q, outcome);
    s.normalize();
    drop(q, outcome);
    return outcome;
  }

  /// Keeps only the branch where `r` reads `value` (unnormalized) and removes r.
  /// Returns the squared norm of the surviving branch.
  double project(RegisterId r, Bit value) {
    auto& s = state();
    const std::size_t q = index(r);
    s.project(q, value);
    const double w = s.norm_squared();
    drop(q, value);
    return w;
  }

  const State& state() const {
    if (!state_) throw std::logic_error("workspace holds no qubits");
    return *state_;
  }
  State& state() {
    if (!state_) throw std::logic_error("workspace holds no qubits");
    return *state_;
  }

  std::size_t live_count() const {
    return static_cast<std::size_t>(std::count_if(ids_.begin(), ids_.end(), [](RegisterId id) { return id != kDead; }));
  }

  std::size_t cap() const { return cap_; }

 private:
  static constexpr RegisterId kDead = std::numeric_limits<RegisterId>::max();

  void drop(std::size_t q, Bit value) {
    if (state_->num_qubits() > 1) {
      state_->remove_qubit(q, value);
      ids_.erase(ids_.begin() + static_cast<std::ptrdiff_t>(q));
    } else {
      ids_[q] = kDead;  // a State keeps at least one qubit; this one is inert
    }
  }

  std::size_t cap_;
  std::optional<State> state_;
  std::vector<RegisterId> ids_;
  RegisterId next_ = 0;
};

// ---------------------------------------------------------------------------
// Verifier randomness

/// Source of the verifier's fair coins and of measurement outcomes. Sampling
/// engines draw from an Rng; the exact view computation replays scripted
/// branches instead.
class Coins {
 public:
  virtual ~Coins() = default;
  virtual Bit flip() = 0;
  /// Computational-basis measurement of `r`; the register is removed.
  virtual Bit measure(Workspace& ws, RegisterId r) = 0;
};

class SampledCoins : public Coins {
 public:
  explicit SampledCoins(Rng& rng) : rng_(rng) {}
  Bit flip() override { return rng_.bit(); }
  Bit measure(Workspace& ws, RegisterId r) override { return ws.measure(r, rng_); }

 private:
  Rng& rng_;
};

/// Replays a fixed bit script. Flips contribute a factor 1/2 to weight();
/// measurements project without renormalizing, so the branch probability
/// stays in the state norm. Reads past the end of the script return 0 and
/// extend used().
class ScriptedCoins : public Coins {
 public:
  explicit ScriptedCoins(std::vector<Bit> script) : script_(std::move(script)) {}

  Bit flip() override {
    weight_ *= 0.5;
    return next();
  }
  Bit measure(Workspace& ws, RegisterId r) override {
    const Bit b = next();
    ws.project(r, b);
    return b;
  }

  double weight() const { return weight_; }
  std::size_t used() const { return pos_; }

  /// Advances `script` (truncated to `used` bits) to the next leaf of the
  /// depth-first enumeration. Returns false when every leaf was visited.
  static bool advance(std::vector<Bit>& script, std::size_t used) {
    script.resize(used, 0);
    while (!script.empty() && script.back() == 1) script.pop_back();
    if (script.empty()) return false;
    script.back() = 1;
    return true;
  }

 private:
  Bit next() {
    const Bit b = pos_ < script_.size() ? script_[pos_] : Bit{0};
    ++pos_;
    return b;
  }

  std::vector<Bit> script_;
  std::size_t pos_ = 0;
  double weight_ = 1.0;
};

// ---------------------------------------------------------------------------
// Prover interface

/// What a prover may touch during a run.
class ProverPort {
 public:
  ProverPort(Workspace& ws, Rng& rng) : ws_(ws), rng_(rng) {}

  void apply(Gate g, RegisterId r) { ws_.apply(g, r); }
  void apply(Gate g, RegisterId r0, RegisterId r1) { ws_.apply(g, r0, r1); }
  void apply(Gate g, std::span<const RegisterId> regs) { ws_.apply(g, regs); }
  void apply_pauli(Pauli p, RegisterId r) { ws_.apply_pauli(p, r); }
  void apply_kraus(std::span<const PauliTerm> terms, std::span<const RegisterId> regs) {
    ws_.apply_kraus(terms, regs);
  }
  /// Squared norm of the joint state; attacks use it for Kraus-branch selection.
  double norm_squared() const { return ws_.state().norm_squared(); }
  State snapshot() const { return ws_.state(); }
  void restore(State s) { ws_.state() = std::move(s); }
  void normalize() { ws_.state().normalize(); }
  Rng& rng() { return rng_; }

 private:
  Workspace& ws_;
  Rng& rng_;
};

struct GadgetRegisters {
  std::size_t index = 0;  // gadget position in the program
  std::size_t wire = 0;
  RegisterId data = 0;  // encrypted data qubit; handed back to be measured
  RegisterId aux = 0;   // auxiliary qubit; becomes the wire's data register
  std::optional<RegisterId> classical;  // stand-in register for x, when simulated
};

/// The m = 2t + n attacked registers in layout order: per gadget (measured,
/// classical), then data wires with the output last. Entries are empty when
/// the register is not simulated.
struct AttackLayout {
  ProtocolDims dims;
  std::vector<std::optional<RegisterId>> registers;
};

/// Prover side of a run. An engine drives it through the gadget program; the
/// prover never learns the run type.
///
/// A T-gadget is two calls: t_gadget() acts after the auxiliary qubit arrives
/// and returns either nothing (the data register is handed back and its
/// measured value becomes the message c) or an announced bit c. correction()
/// follows once the verifier's bit x is known.
class Prover {
 public:
  virtual ~Prover() = default;
  virtual void clifford(ProverPort& port, Gate g, std::span<const RegisterId> regs) = 0;
  virtual std::optional<Bit> t_gadget(ProverPort& port, const GadgetRegisters& regs) = 0;
  virtual void correction(ProverPort& port, const GadgetRegisters& regs, Bit x) = 0;
  virtual void finish(ProverPort& /*port*/, const AttackLayout& /*layout*/) {}
  /// Handed-back registers stay coherent until after finish().
  virtual bool defers_measurement() const { return false; }
};

class HonestProver : public Prover {
 public:
  void clifford(ProverPort& port, Gate g, std::span<const RegisterId> regs) override { port.apply(g, regs); }

  std::optional<Bit> t_gadget(ProverPort& port, const GadgetRegisters& regs) override {
    port.apply(Gate{GateKind::CNOT}, regs.aux, regs.data);
    return std::nullopt;
  }

  void correction(ProverPort& port, const GadgetRegisters& regs, Bit x) override {
    if (x) port.apply(Gate{GateKind::P}, regs.aux);
  }
};

/// Applies the honest gates but always announces c = 0 and keeps the data
/// register.
class EchoZeroProver : public HonestProver {
 public:
  std::optional<Bit> t_gadget(ProverPort& port, const GadgetRegisters& regs) override {
    port.apply(Gate{GateKind::CNOT}, regs.aux, regs.data);
    return Bit{0};
  }
};

}  // namespace qpip
