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

// Pauli-group algebra and one-time-pad key bookkeeping.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qpip/statevec.hpp"

namespace qpip {

enum class Pauli : std::uint8_t { I, X, Y, Z };

constexpr char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

/// Single-letter product a*b = i^phase * letter.
struct PauliProduct {
  Pauli letter;
  int phase;  // power of i, in [0, 4)
};

constexpr PauliProduct multiply(Pauli a, Pauli b) {
  if (a == Pauli::I) return {b, 0};
  if (b == Pauli::I) return {a, 0};
  if (a == b) return {Pauli::I, 0};
  // XY = iZ, YZ = iX, ZX = iY; reversed order picks up -i.
  const int ia = static_cast<int>(a);
  const int ib = static_cast<int>(b);
  const Pauli third = static_cast<Pauli>(6 - ia - ib);
  const bool cyclic = (ia % 3) + 1 == ib;  // X->Y, Y->Z, Z->X
  return {third, cyclic ? 1 : 3};
}

/// m-qubit Pauli operator i^phase * (P_0 x P_1 x ... x P_{m-1}).
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::size_t length) : letters_(length, Pauli::I) {}
  explicit PauliString(std::vector<Pauli> letters, int phase = 0)
      : letters_(std::move(letters)), phase_(((phase % 4) + 4) % 4) {}

  /// Parses the dot-separated form, e.g. "X.I.Z". A bare "XIZ" is accepted too.
  static PauliString parse(std::string_view text) {
    std::vector<Pauli> letters;
    for (char ch : text) {
      switch (ch) {
        case 'I': letters.push_back(Pauli::I); break;
        case 'X': letters.push_back(Pauli::X); break;
        case 'Y': letters.push_back(Pauli::Y); break;
        case 'Z': letters.push_back(Pauli::Z); break;
        case '.': break;
        default:
          throw std::invalid_argument("invalid Pauli letter '" + std::string(1, ch) + "' in \"" +
                                      std::string(text) + "\"");
      }
    }
    if (letters.empty()) throw std::invalid_argument("empty Pauli string");
    return PauliString(std::move(letters));
  }

  /// Single letter `p` on `qubit` of an otherwise identity string.
  static PauliString single(std::size_t length, std::size_t qubit, Pauli p) {
    PauliString s(length);
    s.letters_.at(qubit) = p;
    return s;
  }

  std::size_t size() const { return letters_.size(); }
  int phase() const { return phase_; }
  Complex phase_factor() const {
    constexpr Complex kPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return kPowers[phase_];
  }
  Pauli operator[](std::size_t i) const { return letters_[i]; }
  std::span<const Pauli> letters() const { return letters_; }
  void set(std::size_t i, Pauli p) { letters_.at(i) = p; }

  bool is_identity() const {
    for (auto l : letters_)
      if (l != Pauli::I) return false;
    return true;
  }

  /// Letters only, dot separated.
  std::string letters_string() const {
    std::string out;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      if (i) out += '.';
      out += pauli_char(letters_[i]);
    }
    return out;
  }

  std::string to_string() const {
    static constexpr std::string_view kPhase[4] = {"+", "+i*", "-", "-i*"};
    return std::string(kPhase[phase_]) + letters_string();
  }

  /// Same letters, phase ignored.
  bool same_letters(const PauliString& other) const { return letters_ == other.letters_; }

  bool commutes_with(const PauliString& other) const {
    if (size() != other.size()) throw std::invalid_argument("commutes_with: length mismatch");
    int anti = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      const auto a = letters_[i];
      const auto b = other.letters_[i];
      if (a != Pauli::I && b != Pauli::I && a != b) ++anti;
    }
    return anti % 2 == 0;
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

  friend std::ostream& operator<<(std::ostream& os, const PauliString& p) {
    return os << p.to_string();
  }

 private:
  std::vector<Pauli> letters_;
  int phase_ = 0;
};

/// Product p*q with exact phase tracking.
inline PauliString compose(const PauliString& p, const PauliString& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("compose: length mismatch (" + std::to_string(p.size()) + " vs " +
                                std::to_string(q.size()) + ")");
  }
  std::vector<Pauli> letters(p.size());
  int phase = p.phase() + q.phase();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto prod = multiply(p[i], q[i]);
    letters[i] = prod.letter;
    phase += prod.phase;
  }
  return PauliString(std::move(letters), phase);
}

/// Applies one Pauli letter to a statevector qubit.
inline void apply_pauli(State& state, Pauli p, std::size_t qubit) {
  switch (p) {
    case Pauli::I: break;
    case Pauli::X: state.apply_x(qubit); break;
    case Pauli::Z: state.apply_phase(qubit, -1.0); break;
    case Pauli::Y:  // Y = iXZ
      state.apply_phase(qubit, -1.0);
      state.apply_x(qubit);
      state.apply_matrix(qubit, {Complex{0, 1}, 0.0, 0.0, Complex{0, 1}});
      break;
  }
}

/// Applies `p` with letter i acting on physical qubit qubits[i].
inline void apply_pauli(State& state, const PauliString& p, std::span<const std::size_t> qubits) {
  if (qubits.size() != p.size()) throw std::invalid_argument("apply_pauli: register count mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) apply_pauli(state, p[i], qubits[i]);
  if (p.phase() != 0) state.scale(p.phase_factor());
}

inline Eigen::Matrix2cd pauli_matrix(Pauli p) {
  Eigen::Matrix2cd m;
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

/// Dense 2^m x 2^m matrix; letter 0 is the most significant tensor factor.
inline Eigen::MatrixXcd pauli_matrix(const PauliString& p) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Eigen::Matrix2cd f = pauli_matrix(p[i]);
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < 2; ++r)
      for (Eigen::Index c = 0; c < 2; ++c) next(Eigen::seqN(r, out.rows(), 2), Eigen::seqN(c, out.cols(), 2)) = f(r, c) * out;
    out = std::move(next);
  }
  return p.phase_factor() * out;
}

/// Enumerates all 4^m phase-free Pauli strings of length m, in base-4 order.
inline std::vector<PauliString> all_paulis(std::size_t m) {
  std::vector<PauliString> out;
  const std::size_t count = std::size_t{1} << (2 * m);
  out.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    std::vector<Pauli> letters(m);
    for (std::size_t i = 0; i < m; ++i) letters[i] = static_cast<Pauli>((code >> (2 * (m - 1 - i))) & 3U);
    out.emplace_back(std::move(letters));
  }
  return out;
}

// ---------------------------------------------------------------------------
// One-time pad keys

/// Encryption key X^a Z^b of one wire.
struct PadKey {
  Bit a = 0;  // X-key
  Bit b = 0;  // Z-key
  friend constexpr bool operator==(const PadKey&, const PadKey&) = default;
};

using KeyTable = std::vector<PadKey>;

/// Counts for the attacked-register layout: n data qubits, t T-gadgets.
struct ProtocolDims {
  std::size_t n = 1;
  std::size_t t = 0;

  constexpr std::size_t m() const { return 2 * t + n; }
  /// Register carrying gadget k's measured qubit.
  constexpr std::size_t measured_register(std::size_t k) const { return 2 * k; }
  /// Register standing in for gadget k's classical bit x.
  constexpr std::size_t classical_register(std::size_t k) const { return 2 * k + 1; }
  constexpr std::size_t data_register(std::size_t wire) const { return 2 * t + wire; }
  constexpr std::size_t output_register() const { return 2 * t + n - 1; }

  bool is_measured(std::size_t reg) const {
    return reg == output_register() || (reg < 2 * t && reg % 2 == 0);
  }

  friend constexpr bool operator==(const ProtocolDims&, const ProtocolDims&) = default;
};

/// Key update for a Clifford gate.
///
/// X and Z are applied by key update alone (the prover does nothing):
/// X: a ^= 1, Z: b ^= 1. H, P and CNOT are applied physically by the prover
/// and the keys follow conjugation, G X^a Z^b = X^a' Z^b' G up to phase:
/// H swaps (a, b), P maps (a, b) -> (a, a^b), CNOT(i -> j) maps
/// b_i ^= b_j and a_j ^= a_i.
inline KeyTable clifford_key_update(Gate gate, KeyTable keys, std::span<const std::size_t> targets) {
  if (gate.kind == GateKind::T) {
    throw std::invalid_argument("clifford_key_update: T is handled by the T-gadget");
  }
  if (targets.size() != gate.arity()) throw std::invalid_argument("clifford_key_update: wrong target count");
  for (auto q : targets) {
    if (q >= keys.size()) throw std::out_of_range("clifford_key_update: target out of range");
  }
  auto& k = keys[targets[0]];
  switch (gate.kind) {
    case GateKind::X: k.a ^= 1; break;
    case GateKind::Z: k.b ^= 1; break;
    case GateKind::H: std::swap(k.a, k.b); break;
    case GateKind::P: k.b ^= k.a; break;
    case GateKind::CNOT: {
      if (targets[0] == targets[1]) throw std::invalid_argument("clifford_key_update: duplicate CNOT targets");
      auto& c = keys[targets[0]];
      auto& t = keys[targets[1]];
      c.b ^= t.b;
      t.a ^= c.a;
      break;
    }
    case GateKind::T: break;
  }
  return keys;
}

inline KeyTable clifford_key_update(Gate gate, KeyTable keys, std::initializer_list<std::size_t> targets) {
  return clifford_key_update(gate, std::move(keys), std::span<const std::size_t>(targets.begin(), targets.size()));
}

/// Pauli string X^a Z^b on every wire of `keys` (phase dropped).
inline PauliString key_pauli(const KeyTable& keys) {
  std::vector<Pauli> letters(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& k = keys[i];
    letters[i] = k.a ? (k.b ? Pauli::Y : Pauli::X) : (k.b ? Pauli::Z : Pauli::I);
  }
  return PauliString(std::move(letters));
}

// ---------------------------------------------------------------------------
// Kraus terms in the Pauli basis

struct PauliTerm {
  PauliString pauli;
  Complex coefficient{1.0, 0.0};
};

/// E = sum_Q alpha_Q Q as a dense matrix.
inline Eigen::MatrixXcd kraus_matrix(std::span<const PauliTerm> terms) {
  if (terms.empty()) throw std::invalid_argument("kraus_matrix: no terms");
  const auto dim = Eigen::Index{1} << terms.front().pauli.size();
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& term : terms) {
    if (term.pauli.size() != terms.front().pauli.size()) throw std::invalid_argument("kraus_matrix: mixed lengths");
    e += term.coefficient * pauli_matrix(term.pauli);
  }
  return e;
}

/// Max-entry deviation between the Pauli-twirled action of E on `probe` and
/// sum_Q |alpha_Q|^2 Q probe Q^dagger. Zero (to rounding) for every E.
inline double twirl_residual(std::span<const PauliTerm> kraus, const DensityMatrix& probe) {
  if (kraus.empty()) throw std::invalid_argument("twirl_residual: no terms");
  const std::size_t m = kraus.front().pauli.size();
  if (probe.dim() != (std::size_t{1} << m)) throw std::invalid_argument("twirl_residual: probe dimension mismatch");
  const Eigen::MatrixXcd e = kraus_matrix(kraus);
  const Eigen::MatrixXcd& rho = probe.matrix();

  Eigen::MatrixXcd twirled = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  const auto paulis = all_paulis(m);
  for (const auto& q : paulis) {
    const Eigen::MatrixXcd qm = pauli_matrix(q);
    const Eigen::MatrixXcd conj = qm.adjoint() * e * qm;
    twirled += conj * rho * conj.adjoint();
  }
  twirled /= static_cast<double>(paulis.size());

  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  for (const auto& term : kraus) {
    const Eigen::MatrixXcd qm = pauli_matrix(term.pauli);
    expected += std::norm(term.coefficient) * qm * rho * qm.adjoint();
  }
  return (twirled - expected).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Auxiliary-state relabelling and attack classification

/// X^d Z^e P^y T|+> equals Z^{e^d} P^{y^d} T|+> up to global phase.
struct RelabelledAux {
  Bit e;
  Bit y;
  friend constexpr bool operator==(const RelabelledAux&, const RelabelledAux&) = default;
};

constexpr RelabelledAux relabel_aux(Bit d, Bit e, Bit y) {
  return {static_cast<Bit>(e ^ d), static_cast<Bit>(y ^ d)};
}

/// The member of the preparable set equal to Z^e P^y T|+>.
constexpr AuxState magic_aux_state(Bit e, Bit y) {
  if (y) return e ? AuxState::PTMinus : AuxState::PTPlus;
  return e ? AuxState::TMinus : AuxState::TPlus;
}

/// True iff every measured register of the layout carries I or Z.
inline bool classify_benign(const PauliString& q, const ProtocolDims& dims) {
  if (q.size() != dims.m()) {
    throw std::invalid_argument("classify_benign: Pauli has length " + std::to_string(q.size()) +
                                ", layout expects m = " + std::to_string(dims.m()));
  }
  for (std::size_t reg = 0; reg < q.size(); ++reg) {
    if (dims.is_measured(reg) && (q[reg] == Pauli::X || q[reg] == Pauli::Y)) return false;
  }
  return true;
}

}  // namespace qpip
