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
#include <numbers>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qpip/adversary.hpp"
#include "qpip/epr.hpp"

namespace {

using qpip::AttackSpec;
using qpip::Complex;
using qpip::ParseError;
using qpip::PauliString;
using qpip::PauliTerm;
using qpip::ProtocolDims;
using qpip::RunType;

constexpr double kTol = 1e-9;
const double kR = std::numbers::sqrt2 / 2.0;

qpip::GadgetProgram program(const char* text) { return qpip::compile_to_gadgets(qpip::parse_circuit(text)); }

TEST(ParseAttack, SinglePauli) {
  const auto spec = qpip::parse_attack("1,0 X.I.I\n", {1, 1});
  EXPECT_TRUE(spec.is_single_pauli());
  ASSERT_EQ(spec.kraus.size(), 1u);
  EXPECT_EQ(spec.kraus[0][0].pauli.letters_string(), "X.I.I");
  EXPECT_NEAR(std::abs(spec.kraus[0][0].coefficient - Complex{1, 0}), 0.0, kTol);
}

TEST(ParseAttack, SuperpositionAndComments) {
  const auto spec =
      qpip::parse_attack("# unitary mix\n0.70710678118654752,0 ZII\n\n0,0.70710678118654752 IIX # phase\n", {1, 1});
  EXPECT_FALSE(spec.is_single_pauli());
  ASSERT_EQ(spec.kraus[0].size(), 2u);
  EXPECT_NEAR(spec.kraus[0][1].coefficient.imag(), kR, 1e-12);
}

TEST(ParseAttack, Channel) {
  const auto spec = qpip::parse_attack("0.6,0 I.I.I\n---\n0.8,0 I.I.X\n", {1, 1});
  ASSERT_EQ(spec.kraus.size(), 2u);
  EXPECT_FALSE(spec.is_single_pauli());
}

TEST(ParseAttack, TrailingSeparatorIgnored) {
  EXPECT_EQ(qpip::parse_attack("1,0 ZII\n---\n", {1, 1}).kraus.size(), 1u);
}

struct BadAttack {
  const char* text;
  bool parse_error;  // otherwise a validation error
};

class ParseAttackErrors : public ::testing::TestWithParam<BadAttack> {};

TEST_P(ParseAttackErrors, Rejected) {
  const auto& c = GetParam();
  if (c.parse_error) EXPECT_THROW(qpip::parse_attack(c.text, {1, 1}), ParseError) << c.text;
  else EXPECT_THROW(qpip::parse_attack(c.text, {1, 1}), std::invalid_argument) << c.text;
}

INSTANTIATE_TEST_SUITE_P(
    Attack, ParseAttackErrors,
    ::testing::Values(BadAttack{"", true}, BadAttack{"# nothing\n", true}, BadAttack{"1 XII\n", true},
                      BadAttack{"1,x XII\n", true}, BadAttack{"1,0 XQI\n", true}, BadAttack{"1,0\n", true},
                      BadAttack{"1,0 XII extra\n", true}, BadAttack{"---\n1,0 XII\n", true},
                      BadAttack{"1,0 XI\n", false}, BadAttack{"0.5,0 XII\n", false},
                      BadAttack{"0.8,0 XII\n0.8,0 ZII\n", false}, BadAttack{"0.5,0 XII\n0.5,0 XII\n", false},
                      BadAttack{"1,0 III\n---\n1,0 XII\n", false}));

TEST(ParseAttack, ParseErrorLine) {
  try {
    qpip::parse_attack("1,0 XII\n\n1,0 ZZZ junk\n", {1, 1});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseAttack, ChannelTooWide) {
  // m = 2*3 + 1 = 7 registers is past the dense check limit.
  EXPECT_THROW(qpip::parse_attack("0.6,0 IIIIIII\n0.8,0 XIIIIII\n", {1, 3}), qpip::CapacityError);
  EXPECT_NO_THROW(qpip::parse_attack("1,0 XIIIIII\n", {1, 3}));
}

TEST(ParseAttack, LoadFromFile) {
  EXPECT_ANY_THROW(qpip::load_attack("/nonexistent/attack.txt", {1, 1}));
}

TEST(Predictions, BenignSplit) {
  const ProtocolDims d{1, 1};
  const std::vector<PauliTerm> e = {{PauliString::parse("ZII"), {0.6, 0}}, {PauliString::parse("XIZ"), {0, 0.8}}};
  const auto s = qpip::benign_split(e, d);
  EXPECT_NEAR(s.benign, 0.36, kTol);
  EXPECT_NEAR(s.non_benign, 0.64, kTol);
  EXPECT_NEAR(qpip::predicted_test_rejection(e, d), 0.64, kTol);
  EXPECT_NEAR(qpip::predicted_comp_acceptance(e, d, 0.25), 0.25 * 0.36 + 0.64, kTol);
  const auto bound = qpip::overall_acceptance_bound(e, d, 0.25);
  EXPECT_NEAR(bound.bound, (0.25 * 0.36 + 2.0) / 3.0, kTol);
  EXPECT_FALSE(bound.outside_promise);
  EXPECT_TRUE(qpip::overall_acceptance_bound(e, d, 0.5).outside_promise);
}

TEST(Predictions, HonestBoundIsSevenNinthsAtThreshold) {
  const std::vector<PauliTerm> id = {{PauliString::parse("III"), {1, 0}}};
  EXPECT_NEAR(qpip::overall_acceptance_bound(id, {1, 1}, 1.0 / 3.0).bound, 7.0 / 9.0, kTol);
}

TEST(Predictions, Errors) {
  const ProtocolDims d{1, 1};
  const std::vector<PauliTerm> half = {{PauliString::parse("ZII"), {0.5, 0}}};
  EXPECT_THROW(qpip::benign_split(half, d), std::invalid_argument);
  const std::vector<PauliTerm> one = {{PauliString::parse("ZII"), {1, 0}}};
  EXPECT_THROW(qpip::predicted_comp_acceptance(one, d, 1.5), std::invalid_argument);
  EXPECT_THROW(qpip::predicted_comp_acceptance(one, d, std::nan("")), std::invalid_argument);
}

TEST(BitflipPropagation, AllSettingsOnRandomStates) {
  qpip::Rng rng(6);
  for (int k = 0; k < 4; ++k) {
    const auto psi = qpip::random_state(1, rng);
    for (int bits = 0; bits < 64; ++bits) {
      const qpip::BitflipSetting s{qpip::Bit(bits & 1),        qpip::Bit((bits >> 1) & 1), qpip::Bit((bits >> 2) & 1),
                                   qpip::Bit((bits >> 3) & 1), qpip::Bit((bits >> 4) & 1), qpip::Bit((bits >> 5) & 1)};
      EXPECT_TRUE(qpip::lemma_bitflip_propagation_check(s, psi)) << bits;
    }
  }
}

TEST(BitflipPropagation, RejectsWideInput) {
  EXPECT_THROW(qpip::lemma_bitflip_propagation_check({}, qpip::prepare_state({qpip::AuxState::Zero, qpip::AuxState::Zero})),
               std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Attacked runs

struct Rates {
  double comp, xtest, ztest;  // acceptance per run type
};

Rates rates(const qpip::GadgetProgram& prog, const AttackSpec& spec, bool epr, int trials, std::uint64_t seed) {
  double acc[3] = {0, 0, 0};
  for (RunType run : qpip::kAllRunTypes) {
    for (int i = 0; i < trials; ++i) {
      qpip::Rng rng(qpip::derive_seed(seed, static_cast<std::uint64_t>(i)));
      auto prover = qpip::attacked_prover(spec);
      const auto o = epr ? qpip::execute_epr_run(prog, *prover, run, rng) : qpip::execute(prog, run, *prover, rng);
      acc[static_cast<int>(run)] += o.accept;
    }
  }
  return {acc[0] / trials, acc[1] / trials, acc[2] / trials};
}

TEST(AttackedRuns, FlipOnMeasuredRegisterCaughtByXTest) {
  const auto prog = program("qubits 1\nT 0\n");
  const auto spec = qpip::single_pauli_attack(PauliString::parse("XII"), prog.dims());
  for (bool epr : {false, true}) {
    const auto r = rates(prog, spec, epr, 200, 1);
    EXPECT_EQ(r.comp, 0.0) << epr;
    EXPECT_EQ(r.xtest, 0.0) << epr;
    EXPECT_EQ(r.ztest, 1.0) << epr;
  }
}

TEST(AttackedRuns, PhaseOnMeasuredRegisterIsHarmless) {
  const auto prog = program("qubits 1\nT 0\n");
  const auto spec = qpip::single_pauli_attack(PauliString::parse("ZIZ"), prog.dims());
  for (bool epr : {false, true}) {
    const auto r = rates(prog, spec, epr, 200, 2);
    EXPECT_EQ(r.comp, 1.0);
    EXPECT_EQ(r.xtest, 1.0);
    EXPECT_EQ(r.ztest, 1.0);
  }
}

TEST(AttackedRuns, FlipOnOutputFlipsTheAnswer) {
  const auto prog = program("qubits 1\nT 0\n");
  const auto spec = qpip::single_pauli_attack(PauliString::parse("IIX"), prog.dims());
  for (bool epr : {false, true}) {
    const auto r = rates(prog, spec, epr, 200, 3);
    EXPECT_EQ(r.comp, 0.0);
    EXPECT_EQ(r.xtest, 0.0);
    EXPECT_EQ(r.ztest, 1.0);
  }
}

TEST(AttackedRuns, YOnDataCaughtByBothTests) {
  // Program without gadgets: the output wire is the only register.
  const auto prog = program("qubits 1\nX 0\nX 0\n");
  const auto spec = qpip::single_pauli_attack(PauliString::parse("Y"), prog.dims());
  const auto r = rates(prog, spec, false, 200, 4);
  EXPECT_EQ(r.xtest, 0.0);
  EXPECT_EQ(r.ztest, 1.0);  // Z-test ignores the output value
}

TEST(AttackedRuns, XSlotLetterIsInert) {
  const auto prog = program("qubits 1\nT 0\n");
  const auto spec = qpip::single_pauli_attack(PauliString::parse("IXI"), prog.dims());
  const auto r = rates(prog, spec, true, 200, 5);
  EXPECT_EQ(r.comp, 1.0);
  EXPECT_EQ(r.xtest, 1.0);
  EXPECT_EQ(r.ztest, 1.0);
}

TEST(AttackedRuns, CoherentSuperpositionMatchesPrediction) {
  // (ZII + i IIX)/sqrt2: non-benign mass 1/2, caught in the X test half the
  // time; the Z test sees only Z-type effects on measured registers.
  const auto prog = program("qubits 1\nT 0\n");
  const auto spec = qpip::parse_attack("0.70710678118654752,0 ZII\n0,0.70710678118654752 IIX\n", prog.dims());
  const auto r = rates(prog, spec, true, 2000, 6);
  const double n = qpip::predicted_test_rejection(spec.kraus[0], prog.dims());
  EXPECT_NEAR(1.0 - r.xtest, n, 4.0 * std::sqrt(0.25 / 2000));
  EXPECT_EQ(r.ztest, 1.0);
  EXPECT_LE(r.comp, qpip::predicted_comp_acceptance(spec.kraus[0], prog.dims(), 1.0) + 4.0 * std::sqrt(0.25 / 2000));
}

TEST(AttackedRuns, ChannelSamplesKrausByWeight) {
  const auto prog = program("qubits 1\nT 0\n");
  const auto spec = qpip::parse_attack("0.6,0 III\n---\n0.8,0 IIX\n", prog.dims());
  const auto r = rates(prog, spec, true, 2000, 7);
  EXPECT_NEAR(r.comp, 0.36, 4.0 * std::sqrt(0.36 * 0.64 / 2000));
  EXPECT_NEAR(r.xtest, 0.36, 4.0 * std::sqrt(0.36 * 0.64 / 2000));
}

TEST(AttackedRuns, CoherentAttackNeedsEprEngine) {
  const auto prog = program("qubits 1\nT 0\n");
  const auto spec = qpip::parse_attack("0.6,0 III\n---\n0.8,0 IIX\n", prog.dims());
  auto prover = qpip::attacked_prover(spec);
  qpip::Rng rng(1);
  EXPECT_THROW(qpip::execute(prog, RunType::Computation, *prover, rng), qpip::ProtocolError);
}

TEST(AttackedRuns, LayoutMismatch) {
  const auto spec = qpip::single_pauli_attack(PauliString::parse("IIX"), {1, 1});
  auto prover = qpip::attacked_prover(spec);
  qpip::Rng rng(1);
  EXPECT_THROW(qpip::execute(program("qubits 1\nT 0\nT 0\n"), RunType::Computation, *prover, rng),
               std::invalid_argument);
  EXPECT_THROW(qpip::execute(program("qubits 1\n"), RunType::Computation, *prover, rng), std::invalid_argument);
}

TEST(AttackedRuns, FlipBeforeDiagonalGatesFlipsTheAnswer) {
  // A flipped measurement leaves the wire with the pad computed for the
  // other outcome, i.e. a logical X (times a phase) after the first T. Only
  // diagonal gates follow, so the computation run always decodes 1.
  const auto prog = program("qubits 1\nT 0\nT 0\n");
  const auto spec = qpip::single_pauli_attack(PauliString::parse("XIIII"), prog.dims());
  for (bool epr : {false, true}) {
    const auto r = rates(prog, spec, epr, 300, 8);
    EXPECT_EQ(r.comp, 0.0) << epr;
    EXPECT_EQ(r.xtest, 0.0) << epr;
    EXPECT_LE(r.comp, qpip::predicted_comp_acceptance(spec.kraus[0], prog.dims(), 1.0));
  }
}

}  // namespace
