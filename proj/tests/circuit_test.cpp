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

#include <cmath>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qpip/circuit.hpp"

namespace {

using qpip::Circuit;
using qpip::GateKind;
using qpip::Label;
using qpip::ParseError;
using qpip::RunType;
using qpip::Variant;

constexpr double kTol = 1e-9;

TEST(Parse, Basic) {
  const auto c = qpip::parse_circuit("qubits 2\nH 0\nCNOT 0 1\nT 1\n");
  EXPECT_EQ(c.num_qubits(), 2u);
  ASSERT_EQ(c.gates().size(), 3u);
  EXPECT_EQ(c.gates()[1].gate.kind, GateKind::CNOT);
  EXPECT_EQ(c.gates()[1].qubits[0], 0u);
  EXPECT_EQ(c.gates()[1].qubits[1], 1u);
  EXPECT_EQ(c.count(GateKind::T), 1u);
}

TEST(Parse, CommentsBlankLinesAndWhitespace) {
  const auto c = qpip::parse_circuit("# header comment\n\n  qubits   3  \n\tX 2 # flip\n\nZ 0\n");
  EXPECT_EQ(c.num_qubits(), 3u);
  EXPECT_EQ(c.gates().size(), 2u);
}

TEST(Parse, NoTrailingNewline) { EXPECT_EQ(qpip::parse_circuit("qubits 1\nT 0").gates().size(), 1u); }

struct BadInput {
  const char* text;
  std::size_t line;
};

class ParseErrors : public ::testing::TestWithParam<BadInput> {};

TEST_P(ParseErrors, ReportsLine) {
  try {
    qpip::parse_circuit(GetParam().text);
    FAIL() << "expected ParseError for: " << GetParam().text;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), GetParam().line) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Circuit, ParseErrors,
    ::testing::Values(BadInput{"", 1}, BadInput{"# only a comment\n", 2}, BadInput{"H 0\n", 1},
                      BadInput{"qubits\n", 1}, BadInput{"qubits 0\n", 1}, BadInput{"qubits two\n", 1},
                      BadInput{"qubits 2\nQ 0\n", 2}, BadInput{"qubits 2\nH\n", 2}, BadInput{"qubits 2\nH 0 1\n", 2},
                      BadInput{"qubits 2\nCNOT 0\n", 2}, BadInput{"qubits 2\nCNOT 1 1\n", 2},
                      BadInput{"qubits 2\nX 2\n", 2}, BadInput{"qubits 2\n\n\nT -1\n", 4},
                      BadInput{"qubits 2\nh 0\n", 2}, BadInput{"qubits 2\nP 0\n", 2},
                      BadInput{"qubits 1\nqubits 1\n", 2}));

TEST(Parse, LoadMissingFile) { EXPECT_ANY_THROW(qpip::load_circuit("/nonexistent/circuit.txt")); }

TEST(Parse, LoadPrefixesPath) {
  const std::string path = ::testing::TempDir() + "qpip_bad_circuit.txt";
  std::ofstream(path) << "qubits 1\nY 0\n";
  try {
    qpip::load_circuit(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
  }
}

TEST(Serialize, RoundTrip) {
  Circuit c(3);
  c.add(GateKind::H, 0).add(GateKind::CNOT, 0, 2).add(GateKind::T, 2).add(GateKind::X, 1).add(GateKind::Z, 1);
  EXPECT_EQ(qpip::parse_circuit(qpip::serialize(c)), c);
  EXPECT_EQ(qpip::serialize(c), "qubits 3\nH 0\nCNOT 0 2\nT 2\nX 1\nZ 1\n");
}

TEST(CircuitBuilder, Errors) {
  Circuit c(2);
  EXPECT_THROW(c.add(GateKind::CNOT, 0), std::invalid_argument);
  EXPECT_THROW(c.add(GateKind::H, 0, 1), std::invalid_argument);
  EXPECT_THROW(c.add(GateKind::P, 0), std::invalid_argument);
  EXPECT_THROW(c.add(GateKind::X, 5), std::out_of_range);
  EXPECT_THROW(Circuit(0), std::invalid_argument);
}

// Values below come from the dense oracle, not the library simulator.
TEST(IdealProbability, SmallCircuits) {
  EXPECT_NEAR(qpip::ideal_probability(qpip::parse_circuit("qubits 1\n")), 1.0, kTol);
  EXPECT_NEAR(qpip::ideal_probability(qpip::parse_circuit("qubits 1\nX 0\n")), 0.0, kTol);
  EXPECT_NEAR(qpip::ideal_probability(qpip::parse_circuit("qubits 1\nH 0\n")), 0.5, kTol);
  const double hth = oracle::probability_zero(1, {{'H', 0}, {'T', 0}, {'H', 0}});
  EXPECT_NEAR(hth, (2.0 + std::sqrt(2.0)) / 4.0, kTol);
  EXPECT_NEAR(qpip::ideal_probability(qpip::parse_circuit("qubits 1\nH 0\nT 0\nH 0\n")), hth, kTol);
}

TEST(IdealProbability, RandomCircuitsMatchOracle) {
  qpip::Rng rng(404);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.below(3);
    Circuit c(n);
    std::vector<oracle::Step> steps;
    const int len = 1 + static_cast<int>(rng.below(12));
    for (int k = 0; k < len; ++k) {
      const auto q = rng.below(n);
      switch (rng.below(n > 1 ? 5 : 4)) {
        case 0: c.add(GateKind::X, q); steps.push_back({'X', q}); break;
        case 1: c.add(GateKind::Z, q); steps.push_back({'Z', q}); break;
        case 2: c.add(GateKind::H, q); steps.push_back({'H', q}); break;
        case 3: c.add(GateKind::T, q); steps.push_back({'T', q}); break;
        default: {
          const auto t = (q + 1 + rng.below(n - 1)) % n;
          c.add(GateKind::CNOT, q, t);
          steps.push_back({'C', q, t});
        }
      }
    }
    EXPECT_NEAR(qpip::ideal_probability(c), oracle::probability_zero(n, steps), kTol) << qpip::serialize(c);
  }
}

TEST(Classify, Thresholds) {
  EXPECT_EQ(qpip::classify_probability(1.0).label, Label::Yes);
  EXPECT_EQ(qpip::classify_probability(2.0 / 3.0).label, Label::Yes);
  EXPECT_EQ(qpip::classify_probability(0.5).label, Label::Neither);
  EXPECT_EQ(qpip::classify_probability(1.0 / 3.0).label, Label::No);
  EXPECT_EQ(qpip::classify_probability(0.0).label, Label::No);
  EXPECT_EQ(qpip::classify_instance(qpip::parse_circuit("qubits 2\nX 1\n")).label, Label::No);
  EXPECT_EQ(qpip::label_name(Label::Neither), "NEITHER");
}

TEST(Compile, BareTGadget) {
  const auto prog = qpip::compile_to_gadgets(qpip::parse_circuit("qubits 2\nT 1\nX 0\n"));
  EXPECT_EQ(prog.n, 2u);
  EXPECT_EQ(prog.t, 1u);
  ASSERT_EQ(prog.steps.size(), 2u);
  const auto& g = std::get<qpip::TGadget>(prog.steps[0]);
  EXPECT_EQ(g.wire, 1u);
  EXPECT_EQ(g.selector(RunType::Computation), Variant::Comp);
  EXPECT_EQ(g.selector(RunType::XTest), Variant::XVar);
  EXPECT_EQ(g.selector(RunType::ZTest), Variant::ZVar);
  EXPECT_TRUE(std::holds_alternative<qpip::DirectClifford>(prog.steps[1]));
  EXPECT_EQ(prog.dims().m(), 4u);
}

TEST(Compile, HadamardExpansionShape) {
  const auto prog = qpip::compile_to_gadgets(qpip::parse_circuit("qubits 1\nH 0\n"));
  EXPECT_EQ(prog.t, 6u);
  ASSERT_EQ(prog.steps.size(), 10u);
  std::string shape;
  for (const auto& s : prog.steps) shape += std::holds_alternative<qpip::TGadget>(s) ? 'T' : 'H';
  EXPECT_EQ(shape, "HTTHTTHTTH");
  const auto gadgets = prog.gadgets();
  ASSERT_EQ(gadgets.size(), 6u);
  const Variant xtest[] = {Variant::ZVar, Variant::ZVar, Variant::XVar, Variant::XVar, Variant::ZVar, Variant::ZVar};
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_EQ(gadgets[k]->index, k);
    EXPECT_EQ(gadgets[k]->selector(RunType::Computation), Variant::Comp);
    EXPECT_EQ(gadgets[k]->selector(RunType::XTest), xtest[k]);
    EXPECT_NE(gadgets[k]->selector(RunType::ZTest), xtest[k]);
  }
}

// Replacing every gadget with T and every Clifford with itself reproduces
// the circuit's unitary up to phase.
TEST(Compile, PreservesUnitary) {
  qpip::Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(2);
    Circuit c(n);
    for (int k = 0; k < 6; ++k) {
      const auto q = rng.below(n);
      const GateKind kinds[] = {GateKind::X, GateKind::Z, GateKind::H, GateKind::T};
      if (n == 2 && rng.bit()) c.add(GateKind::CNOT, q, 1 - q);
      else c.add(kinds[rng.below(4)], q);
    }
    const auto prog = qpip::compile_to_gadgets(c);
    const oracle::Mat id = oracle::Mat::Identity(1 << n, 1 << n);
    oracle::Mat u = id, v = id;
    for (const auto& g : c.gates()) {
      if (g.gate.kind == GateKind::CNOT) { u = oracle::cnot(g.qubits[0], g.qubits[1], n) * u; continue; }
      const oracle::Mat m = g.gate.kind == GateKind::X ? oracle::X()
                            : g.gate.kind == GateKind::Z ? oracle::Z()
                            : g.gate.kind == GateKind::H ? oracle::H()
                                                         : oracle::T();
      u = oracle::embed(m, g.qubits[0], n) * u;
    }
    for (const auto& s : prog.steps) {
      if (const auto* t = std::get_if<qpip::TGadget>(&s)) {
        v = oracle::embed(oracle::T(), t->wire, n) * v;
        continue;
      }
      const auto& ins = std::get<qpip::DirectClifford>(s).ins;
      if (ins.gate.kind == GateKind::CNOT) { v = oracle::cnot(ins.qubits[0], ins.qubits[1], n) * v; continue; }
      const oracle::Mat m = ins.gate.kind == GateKind::X ? oracle::X()
                            : ins.gate.kind == GateKind::Z ? oracle::Z()
                                                           : oracle::H();
      v = oracle::embed(m, ins.qubits[0], n) * v;
    }
    EXPECT_LT(oracle::phase_distance(v, u), kTol) << qpip::serialize(c);
  }
}

TEST(Compile, EmptyCircuit) {
  const auto prog = qpip::compile_to_gadgets(Circuit(3));
  EXPECT_EQ(prog.t, 0u);
  EXPECT_TRUE(prog.steps.empty());
  EXPECT_EQ(prog.output_wire(), 2u);
}

}  // namespace
