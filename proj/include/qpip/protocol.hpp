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

// The prepare-and-send verifier: one-time-padded input, per-gadget auxiliary
// qubits prepared on demand, key tracking, checks and the final verdict.

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "qpip/circuit.hpp"
#include "qpip/pauli.hpp"
#include "qpip/rng.hpp"
#include "qpip/statevec.hpp"
#include "qpip/workspace.hpp"

namespace qpip {

/// Verifier-private bits of one T-gadget. Unused fields stay 0.
struct TGadgetRandomness {
  Bit d = 0;
  Bit e = 0;  // Comp only
  Bit y = 0;  // Comp and ZVar
  Bit x = 0;  // XVar only; the other variants derive x
  friend constexpr bool operator==(const TGadgetRandomness&, const TGadgetRandomness&) = default;
};

/// Draws exactly the bits the variant uses: Comp (d, e, y), XVar (d, x),
/// ZVar (d, y).
inline TGadgetRandomness draw_randomness(Variant v, Coins& coins) {
  TGadgetRandomness r;
  r.d = coins.flip();
  switch (v) {
    case Variant::Comp:
      r.e = coins.flip();
      r.y = coins.flip();
      break;
    case Variant::XVar: r.x = coins.flip(); break;
    case Variant::ZVar: r.y = coins.flip(); break;
  }
  return r;
}

inline TGadgetRandomness draw_randomness(Variant v, Rng& rng) {
  SampledCoins coins(rng);
  return draw_randomness(v, coins);
}

/// The auxiliary qubit as physically prepared. Comp: X^d Z^e P^y T|+>, sent as
/// its relabelled twin Z^{e^d} P^{y^d} T|+>. XVar: X^d|0>. ZVar: Z^d P^y|+>.
inline AuxState t_gadget_aux_state(Variant v, const TGadgetRandomness& r) {
  switch (v) {
    case Variant::Comp: {
      const auto rl = relabel_aux(r.d, r.e, r.y);
      return magic_aux_state(rl.e, rl.y);
    }
    case Variant::XVar: return r.d ? AuxState::One : AuxState::Zero;
    case Variant::ZVar:
      if (r.y) return r.d ? AuxState::PMinus : AuxState::PPlus;
      return r.d ? AuxState::Minus : AuxState::Plus;
  }
  return AuxState::Zero;
}

struct VerifierReply {
  Bit x = 0;
  PadKey pad;
  std::optional<bool> check;  // XVar only: c == a ^ d
};

/// Reply bit and the wire's new pad after the gadget.
///
/// Comp: x = a^c^d^y and the output is X^{a^c} Z^{(a^c)(d^y) ^ a^b^c^e^y} T|psi>.
/// XVar: x was drawn up front; pad (d, 0). ZVar: x = y; pad (c, b^d^y).
inline VerifierReply verifier_t_gadget_update(Variant v, PadKey pad, Bit c, const TGadgetRandomness& r) {
  const Bit a = pad.a, b = pad.b;
  VerifierReply out;
  switch (v) {
    case Variant::Comp: {
      const Bit ac = a ^ c;
      out.x = static_cast<Bit>(ac ^ r.d ^ r.y);
      out.pad = {ac, static_cast<Bit>((ac & (r.d ^ r.y)) ^ a ^ b ^ c ^ r.e ^ r.y)};
      break;
    }
    case Variant::XVar:
      out.x = r.x;
      out.pad = {r.d, 0};
      out.check = (c == (a ^ r.d));
      break;
    case Variant::ZVar:
      out.x = r.y;
      out.pad = {c, static_cast<Bit>(b ^ r.d ^ r.y)};
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transcripts

struct GadgetMessage {
  Variant variant = Variant::Comp;
  Bit c = 0;
  Bit x = 0;
  std::optional<bool> check_passed;
  friend bool operator==(const GadgetMessage&, const GadgetMessage&) = default;
};

struct Transcript {
  RunType run = RunType::Computation;
  std::vector<GadgetMessage> gadgets;
  Bit output = 0;     // as reported by the prover
  Bit decrypted = 0;  // output ^ final X-key of the output wire
  KeyTable final_keys;
  friend bool operator==(const Transcript&, const Transcript&) = default;

  bool checks_passed() const {
    for (const auto& g : gadgets)
      if (g.check_passed == false) return false;
    return true;
  }
};

struct Outcome {
  bool accept = false;
  Transcript transcript;
};

/// Comp: decrypted output 0. XTest: every check and decrypted output 0.
/// ZTest: every check (output ignored). Failed checks take effect only here,
/// at the end of the run.
inline bool verdict(const Transcript& t) {
  switch (t.run) {
    case RunType::Computation: return t.decrypted == 0;
    case RunType::XTest: return t.checks_passed() && t.decrypted == 0;
    case RunType::ZTest: return t.checks_passed();
  }
  return false;
}

// ---------------------------------------------------------------------------
// Input encryption

inline KeyTable random_keys(std::size_t n, Coins& coins) {
  KeyTable keys(n);
  for (auto& k : keys) {
    k.a = coins.flip();
    k.b = coins.flip();
  }
  return keys;
}

/// Encrypted |0> (Comp, XTest) or |+> (ZTest) for one wire.
inline AuxState encrypted_input(RunType run, PadKey k) {
  if (run == RunType::ZTest) return k.b ? AuxState::Minus : AuxState::Plus;
  return k.a ? AuxState::One : AuxState::Zero;
}

inline std::pair<State, KeyTable> initial_input(RunType run, const KeyTable& keys) {
  if (keys.empty()) throw std::invalid_argument("initial_input: n must be at least 1");
  std::vector<AuxState> specs;
  for (const auto& k : keys) specs.push_back(encrypted_input(run, k));
  return {prepare_state(specs), keys};
}

inline std::pair<State, KeyTable> initial_input(RunType run, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("initial_input: n must be at least 1");
  SampledCoins coins(rng);
  return initial_input(run, random_keys(n, coins));
}

// ---------------------------------------------------------------------------
// Stand-alone honest gadget

struct GadgetResult {
  Bit c = 0;
  Bit x = 0;
  State state;
};

/// Honest prover side of one T-gadget on a bare State: CNOT from aux to data,
/// measure data -> c, obtain x = reply(c), apply P^x to aux. The measured
/// qubit is removed and the aux qubit takes the data qubit's place in the
/// ordering of the remaining qubits.
inline GadgetResult honest_t_gadget(State state, std::size_t data, std::size_t aux,
                                    const std::function<Bit(Bit)>& reply, Rng& rng) {
  state.check_qubit(data);
  state.check_qubit(aux);
  if (data == aux) throw std::invalid_argument("honest_t_gadget: data and aux must differ");
  state.apply_cnot(aux, data);
  // swap so the aux qubit sits in the data slot
  state.apply_cnot(data, aux);
  state.apply_cnot(aux, data);
  state.apply_cnot(data, aux);
  auto [c, post] = measure_computational(std::move(state), aux, rng);
  post.remove_qubit(aux, c);
  const std::size_t slot = data > aux ? data - 1 : data;
  const Bit x = reply(c);
  if (x) post.apply(Gate{GateKind::P}, slot);
  return {c, x, std::move(post)};
}

inline GadgetResult honest_t_gadget(State state, std::size_t data, std::size_t aux, Bit x, Rng& rng) {
  return honest_t_gadget(std::move(state), data, aux, [x](Bit) { return x; }, rng);
}

// ---------------------------------------------------------------------------
// Engine

namespace detail {

/// Registers the prover holds after finish(), in attack-layout order.
inline std::vector<RegisterId> prover_registers(const AttackLayout& layout) {
  std::vector<RegisterId> out;
  for (const auto& r : layout.registers)
    if (r) out.push_back(*r);
  return out;
}

struct P1Run {
  Workspace ws;
  Transcript transcript;
  AttackLayout layout;
  RegisterId output_register = 0;
};

/// Runs everything up to (not including) the output measurement.
inline P1Run run_p1(const GadgetProgram& prog, RunType run, Prover& prover, Coins& coins, Rng& prover_rng) {
  if (prover.defers_measurement()) {
    throw ProtocolError("this prover keeps measured registers coherent; use the EPR engine");
  }
  P1Run out;
  auto& ws = out.ws;
  ProverPort port(ws, prover_rng);
  out.transcript.run = run;

  KeyTable keys = random_keys(prog.n, coins);
  std::vector<RegisterId> wire(prog.n);
  for (std::size_t w = 0; w < prog.n; ++w) wire[w] = ws.add(encrypted_input(run, keys[w]));

  const auto dims = prog.dims();
  out.layout.dims = dims;
  out.layout.registers.assign(dims.m(), std::nullopt);

  for (const auto& step : prog.steps) {
    if (const auto* dc = std::get_if<DirectClifford>(&step)) {
      const auto& ins = dc->ins;
      const auto targets = ins.targets();
      const GateKind k = ins.gate.kind;
      if (k == GateKind::X || k == GateKind::Z) {
        if (run == RunType::Computation) keys = clifford_key_update(ins.gate, std::move(keys), targets);
        continue;
      }
      std::vector<RegisterId> regs;
      for (auto q : targets) regs.push_back(wire[q]);
      prover.clifford(port, ins.gate, regs);
      keys = clifford_key_update(ins.gate, std::move(keys), targets);
      continue;
    }
    const auto& tg = std::get<TGadget>(step);
    const Variant v = tg.selector(run);
    const auto rnd = draw_randomness(v, coins);
    GadgetRegisters gr;
    gr.index = tg.index;
    gr.wire = tg.wire;
    gr.data = wire[tg.wire];
    gr.aux = ws.add(t_gadget_aux_state(v, rnd));

    const auto announced = prover.t_gadget(port, gr);
    Bit c;
    if (announced) {
      c = *announced & 1;
      out.layout.registers[dims.measured_register(tg.index)] = gr.data;  // still with the prover
    } else {
      c = coins.measure(ws, gr.data);
    }
    const auto reply = verifier_t_gadget_update(v, keys[tg.wire], c, rnd);
    prover.correction(port, gr, reply.x);
    keys[tg.wire] = reply.pad;
    wire[tg.wire] = gr.aux;
    out.transcript.gadgets.push_back({v, c, reply.x, reply.check});
  }

  for (std::size_t w = 0; w < prog.n; ++w) out.layout.registers[dims.data_register(w)] = wire[w];
  prover.finish(port, out.layout);
  out.output_register = wire[prog.output_wire()];
  out.transcript.final_keys = std::move(keys);
  return out;
}

}  // namespace detail

/// One p1 run of `prog` against `prover`. The prover reports the
/// computational-basis value of the output wire.
inline Outcome execute(const GadgetProgram& prog, RunType run, Prover& prover, Rng& rng) {
  SampledCoins coins(rng);
  auto r = detail::run_p1(prog, run, prover, coins, rng);
  auto& t = r.transcript;
  t.output = r.ws.measure(r.output_register, rng);
  t.decrypted = t.output ^ t.final_keys[prog.output_wire()].a;
  Outcome o;
  o.accept = verdict(t);
  o.transcript = std::move(t);
  return o;
}

inline RunType random_run(Rng& rng) { return kAllRunTypes[rng.below(3)]; }

/// Verifier picks the run type uniformly, then executes.
inline Outcome execute_random(const GadgetProgram& prog, Prover& prover, Rng& rng) {
  const RunType run = random_run(rng);
  return execute(prog, run, prover, rng);
}

}  // namespace qpip
