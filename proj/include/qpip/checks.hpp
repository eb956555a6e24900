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

// Quick self-checks run by `verify check`.

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qpip/adversary.hpp"
#include "qpip/circuit.hpp"
#include "qpip/epr.hpp"
#include "qpip/pauli.hpp"
#include "qpip/protocol.hpp"
#include "qpip/statevec.hpp"

namespace qpip {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using GateSequence = std::vector<Gate>;

/// True iff two single-qubit gate sequences (applied left to right) agree up
/// to global phase. Compared on the maximally entangled state, so one
/// fidelity covers the whole operator.
inline bool same_up_to_phase(const GateSequence& lhs, const GateSequence& rhs) {
  auto run = [](const GateSequence& seq) {
    State s = prepare_state({AuxState::Plus, AuxState::Zero});
    s.apply_cnot(0, 1);
    for (const auto& g : seq) s.apply(g, 0);
    return s;
  };
  return fidelity_up_to_phase(run(lhs), run(rhs)) >= 1.0 - kTolerance;
}

namespace detail {

inline Gate g(GateKind k, bool dagger = false) { return Gate{k, dagger}; }

inline CheckResult check_identities() {
  using K = GateKind;
  // Sequences list gates in application order, the reverse of the operator
  // product in the name.
  struct Identity {
    const char* name;
    GateSequence lhs, rhs;
  };
  const std::vector<Identity> ids = {
      {"XZ = ZX", {g(K::Z), g(K::X)}, {g(K::X), g(K::Z)}},
      {"PZ = ZP", {g(K::Z), g(K::P)}, {g(K::P), g(K::Z)}},
      {"PX = XZP", {g(K::X), g(K::P)}, {g(K::P), g(K::Z), g(K::X)}},
      {"TZ = ZT", {g(K::Z), g(K::T)}, {g(K::T), g(K::Z)}},
      {"TX = XZPT", {g(K::X), g(K::T)}, {g(K::T), g(K::P), g(K::Z), g(K::X)}},
      {"PP = Z", {g(K::P), g(K::P)}, {g(K::Z)}},
      {"TT = P", {g(K::T), g(K::T)}, {g(K::P)}},
      {"HPHPHPH = H", {g(K::H), g(K::P), g(K::H), g(K::P), g(K::H), g(K::P), g(K::H)}, {g(K::H)}},
      {"HHHH = I", {g(K::H), g(K::H), g(K::H), g(K::H)}, {}},
  };
  std::string failed;
  for (const auto& id : ids)
    if (!same_up_to_phase(id.lhs, id.rhs)) failed += std::string(failed.empty() ? "" : ", ") + id.name;
  // P^{a xor b} = Z^{ab} P^{a+b}
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      GateSequence lhs, rhs;
      if (a ^ b) lhs.push_back(g(K::P));
      for (int k = 0; k < a + b; ++k) rhs.push_back(g(K::P));
      if (a & b) rhs.push_back(g(K::Z));
      if (!same_up_to_phase(lhs, rhs)) failed += " P^(a^b) a=" + std::to_string(a) + " b=" + std::to_string(b);
    }
  // aux relabelling
  for (int bits = 0; bits < 8; ++bits) {
    const Bit d = bits & 1, e = (bits >> 1) & 1, y = (bits >> 2) & 1;
    State lhs = prepare_state({AuxState::Plus});
    lhs.apply(g(K::T), 0);
    if (y) lhs.apply(g(K::P), 0);
    if (e) lhs.apply(g(K::Z), 0);
    if (d) lhs.apply(g(K::X), 0);
    const auto rl = relabel_aux(d, e, y);
    const State rhs = prepare_state({magic_aux_state(rl.e, rl.y)});
    if (fidelity_up_to_phase(lhs, rhs) < 1.0 - kTolerance) failed += " relabel d,e,y=" + std::to_string(bits);
  }
  return {"gate identities", failed.empty(), failed.empty() ? "all hold up to global phase" : failed};
}

inline CheckResult check_key_updates() {
  int bad = 0;
  for (GateKind k : {GateKind::X, GateKind::Z, GateKind::H, GateKind::P, GateKind::CNOT}) {
    const Gate gate{k};
    const std::size_t wires = gate.arity();
    for (int code = 0; code < (1 << (2 * wires)); ++code) {
      KeyTable keys(wires);
      for (std::size_t w = 0; w < wires; ++w) keys[w] = {Bit((code >> (2 * w)) & 1), Bit((code >> (2 * w + 1)) & 1)};
      std::vector<std::size_t> targets(wires);
      for (std::size_t w = 0; w < wires; ++w) targets[w] = w;
      const KeyTable after = clifford_key_update(gate, keys, targets);
      // The prover applies G to K|phi> (nothing at all for X and Z); the
      // result must be K' G|phi> up to phase.
      const bool physical = k != GateKind::X && k != GateKind::Z;
      Rng rng(static_cast<std::uint64_t>(code) + 17);
      const State phi = random_state(wires, rng);
      auto encrypt = [&](State s, const KeyTable& kt) {
        for (std::size_t w = 0; w < wires; ++w) {
          if (kt[w].b) s.apply(Gate{GateKind::Z}, w);
          if (kt[w].a) s.apply(Gate{GateKind::X}, w);
        }
        return s;
      };
      State lhs = encrypt(phi, keys);
      if (physical) lhs.apply(gate, targets);
      State logical = phi;
      logical.apply(gate, targets);
      if (fidelity_up_to_phase(lhs, encrypt(logical, after)) < 1.0 - kTolerance) ++bad;
    }
  }
  return {"clifford key updates", bad == 0, std::to_string(bad) + " mismatches"};
}

inline CheckResult check_t_gadget(std::size_t states_per_setting = 3) {
  Rng rng(2024);
  int bad = 0, total = 0;
  for (int bits = 0; bits < 32; ++bits) {
    const Bit a = bits & 1, b = (bits >> 1) & 1, d = (bits >> 2) & 1, e = (bits >> 3) & 1, y = (bits >> 4) & 1;
    const TGadgetRandomness r{d, e, y, 0};
    for (std::size_t k = 0; k < states_per_setting; ++k) {
      ++total;
      const State psi = random_state(1, rng);
      State st = psi;
      if (b) st.apply(Gate{GateKind::Z}, 0);
      if (a) st.apply(Gate{GateKind::X}, 0);
      st.append_qubit(aux_amplitudes(t_gadget_aux_state(Variant::Comp, r)));
      PadKey pad;
      const auto res = honest_t_gadget(
          st, 0, 1,
          [&](Bit c) {
            const auto reply = verifier_t_gadget_update(Variant::Comp, {a, b}, c, r);
            pad = reply.pad;
            return reply.x;
          },
          rng);
      State expected = psi;
      expected.apply(Gate{GateKind::T}, 0);
      if (pad.b) expected.apply(Gate{GateKind::Z}, 0);
      if (pad.a) expected.apply(Gate{GateKind::X}, 0);
      if (fidelity_up_to_phase(res.state, expected) < 1.0 - kTolerance) ++bad;
    }
  }
  return {"T-gadget key formula", bad == 0, std::to_string(total - bad) + "/" + std::to_string(total)};
}

inline CheckResult check_bitflip_lemma() {
  Rng rng(99);
  std::vector<State> states = {prepare_state({AuxState::Zero}), prepare_state({AuxState::One}),
                               prepare_state({AuxState::Plus})};
  for (int k = 0; k < 3; ++k) states.push_back(random_state(1, rng));
  int bad = 0, total = 0;
  for (const auto& psi : states)
    for (int bits = 0; bits < 64; ++bits) {
      ++total;
      const BitflipSetting s{Bit(bits & 1),        Bit((bits >> 1) & 1), Bit((bits >> 2) & 1),
                             Bit((bits >> 3) & 1), Bit((bits >> 4) & 1), Bit((bits >> 5) & 1)};
      if (!lemma_bitflip_propagation_check(s, psi)) ++bad;
    }
  return {"bit-flip propagation", bad == 0, std::to_string(total - bad) + "/" + std::to_string(total)};
}

inline CheckResult check_twirl(int samples = 40) {
  Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const std::size_t m = 1 + static_cast<std::size_t>(i % 2);
    const auto paulis = all_paulis(m);
    std::vector<PauliTerm> terms;
    double norm = 0.0;
    for (const auto& p : paulis) {
      const Complex c{rng.normal(), rng.normal()};
      terms.push_back({p, c});
      norm += std::norm(c);
    }
    for (auto& t : terms) t.coefficient /= std::sqrt(norm);
    const State probe = random_state(m, rng);
    std::vector<std::size_t> keep(m);
    for (std::size_t q = 0; q < m; ++q) keep[q] = q;
    worst = std::max(worst, twirl_residual(terms, reduced_density(probe, keep)));
  }
  return {"Pauli twirl", worst <= kTolerance, "max residual " + std::to_string(worst)};
}

inline CheckResult check_view_distance() {
  double worst = 0.0;
  for (const char* src : {"qubits 1\n", "qubits 1\nT 0\n"}) {
    const auto prog = compile_to_gadgets(parse_circuit(src));
    worst = std::max(worst, prover_view_distance(prog, [] { return std::make_unique<HonestProver>(); }));
    worst = std::max(worst, prover_view_distance(prog, [] { return std::make_unique<EchoZeroProver>(); }));
  }
  return {"prover view distance", worst <= kTolerance, "max distance " + std::to_string(worst)};
}

inline CheckResult check_honest_tests(int trials = 200) {
  const auto prog = compile_to_gadgets(parse_circuit("qubits 2\nH 0\nCNOT 0 1\nT 1\n"));
  HonestProver hp;
  int rejects = 0;
  for (int i = 0; i < trials; ++i) {
    for (RunType run : {RunType::XTest, RunType::ZTest}) {
      Rng r1(derive_seed(5, static_cast<std::uint64_t>(i)));
      Rng r2(derive_seed(6, static_cast<std::uint64_t>(i)));
      rejects += execute(prog, run, hp, r1).accept ? 0 : 1;
      rejects += execute_epr_run(prog, hp, run, r2).accept ? 0 : 1;
    }
  }
  return {"honest test runs", rejects == 0, std::to_string(rejects) + " rejections in " + std::to_string(4 * trials)};
}

}  // namespace detail

inline std::vector<CheckResult> run_builtin_checks() {
  return {detail::check_identities(),   detail::check_key_updates(), detail::check_t_gadget(),
          detail::check_bitflip_lemma(), detail::check_twirl(),       detail::check_view_distance(),
          detail::check_honest_tests()};
}

}  // namespace qpip
