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

// Delayed-choice verifier: sends halves of EPR pairs and uniform bits, picks
// the run type only after the prover is done, then measures its halves.

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qpip/circuit.hpp"
#include "qpip/protocol.hpp"
#include "qpip/workspace.hpp"

namespace qpip {

/// State of an EPR interaction after the prover has finished and
/// before the verifier has chosen the run type.
class DeferredTranscript {
 public:
  const GadgetProgram& program() const { return program_; }
  const Workspace& workspace() const { return ws_; }
  /// Simulated qubits right now.
  std::size_t live_qubits() const { return ws_.live_count(); }
  /// c per gadget; empty while the handed-back register is still unmeasured.
  const std::vector<std::optional<Bit>>& c() const { return c_; }
  const std::vector<Bit>& x() const { return x_; }
  const AttackLayout& layout() const { return layout_; }
  bool finalized() const { return finalized_; }

 private:
  friend DeferredTranscript detail_run_epr(const GadgetProgram&, Prover&, Coins&, Rng&);
  friend Outcome finalize_run(DeferredTranscript&, RunType, Rng&);

  GadgetProgram program_;
  Workspace ws_;
  std::vector<RegisterId> input_half_;   // verifier side, per wire
  std::vector<RegisterId> gadget_half_;  // verifier side, per gadget
  std::vector<std::optional<Bit>> c_;
  std::vector<std::optional<RegisterId>> pending_;  // handed back, unmeasured
  std::vector<Bit> x_;
  AttackLayout layout_;
  RegisterId output_ = 0;
  bool finalized_ = false;
};

/// EPR interaction with coins from `coins`. The x bits are fresh fair
/// coins. A prover that defers measurement gets a register |x> standing in
/// for each classical bit, so attacks can act on that slot.
inline DeferredTranscript detail_run_epr(const GadgetProgram& prog, Prover& prover, Coins& coins,
                                         Rng& prover_rng) {
  DeferredTranscript dt;
  dt.program_ = prog;
  auto& ws = dt.ws_;
  ProverPort port(ws, prover_rng);
  const auto dims = prog.dims();
  const bool coherent = prover.defers_measurement();

  std::vector<RegisterId> wire(prog.n);
  for (std::size_t w = 0; w < prog.n; ++w) {
    const auto [v, p] = ws.add_epr();
    dt.input_half_.push_back(v);
    wire[w] = p;
  }
  dt.layout_.dims = dims;
  dt.layout_.registers.assign(dims.m(), std::nullopt);
  dt.c_.assign(prog.t, std::nullopt);
  dt.pending_.assign(prog.t, std::nullopt);
  dt.x_.assign(prog.t, 0);
  dt.gadget_half_.assign(prog.t, 0);

  for (const auto& step : prog.steps) {
    if (const auto* dc = std::get_if<DirectClifford>(&step)) {
      const GateKind k = dc->ins.gate.kind;
      if (k == GateKind::X || k == GateKind::Z) continue;  // key update only, decided at finalize
      std::vector<RegisterId> regs;
      for (auto q : dc->ins.targets()) regs.push_back(wire[q]);
      prover.clifford(port, dc->ins.gate, regs);
      continue;
    }
    const auto& tg = std::get<TGadget>(step);
    const auto [v, p] = ws.add_epr();
    dt.gadget_half_[tg.index] = v;
    GadgetRegisters gr;
    gr.index = tg.index;
    gr.wire = tg.wire;
    gr.data = wire[tg.wire];
    gr.aux = p;

    const auto announced = prover.t_gadget(port, gr);
    if (announced) {
      dt.c_[tg.index] = *announced & 1;
      dt.layout_.registers[dims.measured_register(tg.index)] = gr.data;
    } else if (coherent) {
      dt.pending_[tg.index] = gr.data;
      dt.layout_.registers[dims.measured_register(tg.index)] = gr.data;
    } else {
      dt.c_[tg.index] = coins.measure(ws, gr.data);
    }
    const Bit x = coins.flip();
    dt.x_[tg.index] = x;
    if (coherent) {
      gr.classical = ws.add(x ? AuxState::One : AuxState::Zero);
      dt.layout_.registers[dims.classical_register(tg.index)] = gr.classical;
    }
    prover.correction(port, gr, x);
    wire[tg.wire] = gr.aux;
  }

  for (std::size_t w = 0; w < prog.n; ++w) dt.layout_.registers[dims.data_register(w)] = wire[w];
  prover.finish(port, dt.layout_);
  dt.output_ = wire[prog.output_wire()];
  return dt;
}

inline DeferredTranscript execute_epr(const GadgetProgram& prog, Prover& prover, Rng& rng) {
  SampledCoins coins(rng);
  return detail_run_epr(prog, prover, coins, rng);
}

/// Chooses nothing itself: `run` is the verifier's late choice. Measures the
/// pending c registers and the output first, then the input halves, then the
/// gadget halves in gadget order.
///
/// Comp gadget: d fair, y = a^c^d^x; T, P^{y^d}, Z^d, H on the half, measure
/// -> e; keys as in the prepare-and-send gadget. XVar: measure -> d, check
/// c == a^d. ZVar: y = x; P^y, H, measure -> d.
inline Outcome finalize_run(DeferredTranscript& dt, RunType run, Rng& rng) {
  if (dt.finalized_) throw ProtocolError("finalize_run: transcript already finalized");
  dt.finalized_ = true;
  auto& ws = dt.ws_;
  const auto& prog = dt.program_;

  Transcript t;
  t.run = run;
  std::vector<Bit> c(prog.t, 0);
  for (std::size_t k = 0; k < prog.t; ++k) {
    if (dt.pending_[k]) dt.c_[k] = ws.measure(*dt.pending_[k], rng);
    c[k] = dt.c_[k].value_or(0);
  }
  t.output = ws.measure(dt.output_, rng);

  KeyTable keys(prog.n);
  for (std::size_t w = 0; w < prog.n; ++w) {
    if (run == RunType::ZTest) {
      ws.apply(Gate{GateKind::H}, dt.input_half_[w]);
      keys[w] = {0, ws.measure(dt.input_half_[w], rng)};
    } else {
      keys[w] = {ws.measure(dt.input_half_[w], rng), 0};
    }
  }

  for (const auto& step : prog.steps) {
    if (const auto* dc = std::get_if<DirectClifford>(&step)) {
      const GateKind k = dc->ins.gate.kind;
      if ((k == GateKind::X || k == GateKind::Z) && run != RunType::Computation) continue;
      keys = clifford_key_update(dc->ins.gate, std::move(keys), dc->ins.targets());
      continue;
    }
    const auto& tg = std::get<TGadget>(step);
    const Variant v = tg.selector(run);
    const RegisterId half = dt.gadget_half_[tg.index];
    const Bit ck = c[tg.index];
    const Bit xk = dt.x_[tg.index];
    auto& key = keys[tg.wire];
    GadgetMessage msg{v, ck, xk, std::nullopt};
    switch (v) {
      case Variant::Comp: {
        TGadgetRandomness r;
        r.d = rng.bit();
        r.y = static_cast<Bit>(key.a ^ ck ^ r.d ^ xk);
        ws.apply(Gate{GateKind::T}, half);
        if (r.y ^ r.d) ws.apply(Gate{GateKind::P}, half);
        if (r.d) ws.apply(Gate{GateKind::Z}, half);
        ws.apply(Gate{GateKind::H}, half);
        r.e = ws.measure(half, rng);
        key = verifier_t_gadget_update(v, key, ck, r).pad;
        break;
      }
      case Variant::XVar: {
        const Bit d = ws.measure(half, rng);
        msg.check_passed = (ck == (key.a ^ d));
        key = {d, 0};
        break;
      }
      case Variant::ZVar: {
        const Bit y = xk;
        if (y) ws.apply(Gate{GateKind::P}, half);
        ws.apply(Gate{GateKind::H}, half);
        const Bit d = ws.measure(half, rng);
        key = {ck, static_cast<Bit>(key.b ^ d ^ y)};
        break;
      }
    }
    t.gadgets.push_back(msg);
  }

  t.decrypted = t.output ^ keys[prog.output_wire()].a;
  t.final_keys = std::move(keys);
  Outcome o;
  o.accept = verdict(t);
  o.transcript = std::move(t);
  return o;
}

/// Interaction followed by finalize_run for a run type the caller fixed. The
/// prover never sees `run`, so fixing it up front changes nothing it observes.
inline Outcome execute_epr_run(const GadgetProgram& prog, Prover& prover, RunType run, Rng& rng) {
  auto dt = execute_epr(prog, prover, rng);
  return finalize_run(dt, run, rng);
}

// ---------------------------------------------------------------------------
// Prover-view comparison

namespace detail {

/// Classical messages (c..., x...) -> unnormalized prover density matrix.
using View = std::map<std::vector<Bit>, Eigen::MatrixXcd>;

inline std::vector<Bit> message_key(const std::vector<Bit>& c, const std::vector<Bit>& x) {
  std::vector<Bit> k = c;
  k.insert(k.end(), x.begin(), x.end());
  return k;
}

inline void accumulate(View& view, std::vector<Bit> key, const Eigen::MatrixXcd& rho) {
  auto [it, fresh] = view.try_emplace(std::move(key), rho);
  if (!fresh) {
    if (it->second.rows() != rho.rows()) throw std::logic_error("prover view: register count differs between branches");
    it->second += rho;
  }
}

inline Eigen::MatrixXcd prover_density(const Workspace& ws, const AttackLayout& layout) {
  const auto regs = prover_registers(layout);
  const auto keep = ws.indices(regs);
  return partial_trace(ws.state(), keep);
}

/// Depth-first walk over every coin and measurement branch of `run_once`.
template <class F>
void enumerate_branches(F&& run_once, std::size_t max_leaves) {
  std::vector<Bit> script;
  std::size_t leaves = 0;
  do {
    if (++leaves > max_leaves) {
      throw CapacityError("prover_view_distance: more than " + std::to_string(max_leaves) + " branches");
    }
    ScriptedCoins coins(script);
    run_once(coins);
    const std::size_t used = coins.used();
    if (!ScriptedCoins::advance(script, used)) break;
  } while (true);
}

}  // namespace detail

inline constexpr std::size_t kMaxViewBranches = std::size_t{1} << 20;
inline constexpr std::size_t kMaxViewQubits = 20;

/// Trace distance between what the prover holds (quantum registers plus the
/// classical messages) at the end of a p1 run, averaged over run types and
/// verifier randomness, and at the end of an EPR run. Computed exactly by
/// enumerating every branch.
///
/// `make_prover` must return a fresh prover whose actions depend only on the
/// messages it sees, with no internal randomness.
template <class MakeProver>
double prover_view_distance(const GadgetProgram& prog, MakeProver&& make_prover) {
  if (2 * prog.dims().m() > kMaxViewQubits) {
    throw CapacityError("prover_view_distance: 2m = " + std::to_string(2 * prog.dims().m()) + " exceeds " +
                        std::to_string(kMaxViewQubits));
  }
  Rng unused(0);
  detail::View p1, p2;

  for (RunType run : kAllRunTypes) {
    detail::enumerate_branches(
        [&](ScriptedCoins& coins) {
          auto prover = make_prover();
          auto r = detail::run_p1(prog, run, *prover, coins, unused);
          std::vector<Bit> c, x;
          for (const auto& g : r.transcript.gadgets) {
            c.push_back(g.c);
            x.push_back(g.x);
          }
          const double w = coins.weight() / 3.0;
          detail::accumulate(p1, detail::message_key(c, x), w * detail::prover_density(r.ws, r.layout));
        },
        kMaxViewBranches);
  }

  detail::enumerate_branches(
      [&](ScriptedCoins& coins) {
        auto prover = make_prover();
        auto dt = detail_run_epr(prog, *prover, coins, unused);
        std::vector<Bit> c;
        for (const auto& ck : dt.c()) c.push_back(ck.value_or(0));
        detail::accumulate(p2, detail::message_key(c, dt.x()),
                           coins.weight() * detail::prover_density(dt.workspace(), dt.layout()));
      },
      kMaxViewBranches);

  double distance = 0.0;
  for (const auto& [key, rho] : p1) {
    const auto it = p2.find(key);
    distance += trace_norm(it == p2.end() ? rho : Eigen::MatrixXcd(rho - it->second));
  }
  for (const auto& [key, rho] : p2)
    if (!p1.contains(key)) distance += trace_norm(rho);
  return 0.5 * distance;
}

}  // namespace qpip
