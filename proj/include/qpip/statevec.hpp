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

// Dense statevector simulation of small registers.
//
// Ordering convention: qubit 0 is the most significant bit of the amplitude
// index. For an n-qubit state, qubit q lives at bit (n - 1 - q).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qpip/rng.hpp"

namespace qpip {

using Complex = std::complex<double>;

inline constexpr double kTolerance = 1e-9;
inline constexpr std::size_t kMaxQubits = 24;

/// Raised when a simulation would exceed the dense-simulation qubit cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_capacity(std::size_t num_qubits, std::size_t cap = kMaxQubits,
                             std::string_view what = "state") {
  if (num_qubits > cap) {
    throw CapacityError(std::string(what) + " needs " + std::to_string(num_qubits) +
                        " qubits; dense simulation is capped at " + std::to_string(cap));
  }
}

enum class GateKind { X, Z, H, P, T, CNOT };

struct Gate {
  GateKind kind;
  bool dagger = false;

  constexpr std::size_t arity() const { return kind == GateKind::CNOT ? 2 : 1; }
  friend constexpr bool operator==(const Gate&, const Gate&) = default;
};

constexpr std::string_view gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::X: return "X";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::P: return "P";
    case GateKind::T: return "T";
    case GateKind::CNOT: return "CNOT";
  }
  return "?";
}

/// Single-qubit states the verifier can prepare.
enum class AuxState { Zero, One, Plus, Minus, PPlus, PMinus, TPlus, TMinus, PTPlus, PTMinus };

inline constexpr std::array<AuxState, 10> kAllAuxStates = {
    AuxState::Zero,  AuxState::One,    AuxState::Plus,  AuxState::Minus,  AuxState::PPlus,
    AuxState::PMinus, AuxState::TPlus, AuxState::TMinus, AuxState::PTPlus, AuxState::PTMinus};

/// Amplitudes (alpha, beta) of alpha|0> + beta|1>.
inline std::array<Complex, 2> aux_amplitudes(AuxState s) {
  const double r = std::numbers::sqrt2 / 2.0;
  const Complex t = std::polar(1.0, std::numbers::pi / 4.0);
  const Complex i{0.0, 1.0};
  switch (s) {
    case AuxState::Zero: return {1.0, 0.0};
    case AuxState::One: return {0.0, 1.0};
    case AuxState::Plus: return {r, r};
    case AuxState::Minus: return {r, -r};
    case AuxState::PPlus: return {r, r * i};
    case AuxState::PMinus: return {r, -r * i};
    case AuxState::TPlus: return {r, r * t};
    case AuxState::TMinus: return {r, -r * t};
    case AuxState::PTPlus: return {r, r * i * t};
    case AuxState::PTMinus: return {r, -r * i * t};
  }
  return {1.0, 0.0};
}

/// 2x2 matrix of a single-qubit gate, row-major.
inline std::array<Complex, 4> gate_matrix(Gate g) {
  const double r = std::numbers::sqrt2 / 2.0;
  const Complex i{0.0, g.dagger ? -1.0 : 1.0};
  switch (g.kind) {
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Z: return {1.0, 0.0, 0.0, -1.0};
    case GateKind::H: return {r, r, r, -r};
    case GateKind::P: return {1.0, 0.0, 0.0, i};
    case GateKind::T:
      return {1.0, 0.0, 0.0, std::polar(1.0, (g.dagger ? -1.0 : 1.0) * std::numbers::pi / 4.0)};
    case GateKind::CNOT: break;
  }
  throw std::invalid_argument("gate_matrix: CNOT is not a single-qubit gate");
}

/// Dense amplitude vector over num_qubits qubits.
///
/// States built by prepare_state / measure_computational are normalized.
/// Branch enumeration works with deliberately sub-normalized vectors, so the
/// norm is checked by is_normalized() rather than enforced on every mutation.
class State {
 public:
  /// |0...0> on num_qubits qubits.
  explicit State(std::size_t num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits == 0) throw std::invalid_argument("State: num_qubits must be >= 1");
    require_capacity(num_qubits);
    amps_.assign(std::size_t{1} << num_qubits, Complex{});
    amps_[0] = 1.0;
  }

  State(std::size_t num_qubits, std::vector<Complex> amplitudes)
      : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
    if (num_qubits == 0) throw std::invalid_argument("State: num_qubits must be >= 1");
    require_capacity(num_qubits);
    if (amps_.size() != (std::size_t{1} << num_qubits)) {
      throw std::invalid_argument("State: amplitude count must be 2^num_qubits");
    }
  }

  std::size_t num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  std::span<Complex> amplitudes() { return amps_; }
  Complex operator[](std::size_t index) const { return amps_[index]; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }
  double norm() const { return std::sqrt(norm_squared()); }
  bool is_normalized(double tol = kTolerance) const { return std::abs(norm() - 1.0) <= tol; }

  void normalize() {
    const double n = norm();
    if (n < 1e-300) throw std::runtime_error("State::normalize: degenerate (zero-norm) state");
    for (auto& a : amps_) a /= n;
  }

  void scale(Complex factor) {
    for (auto& a : amps_) a *= factor;
  }

  std::size_t mask(std::size_t qubit) const {
    check_qubit(qubit);
    return std::size_t{1} << (num_qubits_ - 1 - qubit);
  }

  void check_qubit(std::size_t qubit) const {
    if (qubit >= num_qubits_) {
      throw std::out_of_range("qubit index " + std::to_string(qubit) + " out of range for " +
                              std::to_string(num_qubits_) + "-qubit state");
    }
  }

  /// Applies a 2x2 matrix (row-major) to one qubit.
  void apply_matrix(std::size_t qubit, const std::array<Complex, 4>& m) {
    const std::size_t bit = mask(qubit);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & bit) continue;
      const Complex a0 = amps_[i];
      const Complex a1 = amps_[i | bit];
      amps_[i] = m[0] * a0 + m[1] * a1;
      amps_[i | bit] = m[2] * a0 + m[3] * a1;
    }
  }

  /// Multiplies amplitudes whose `qubit` bit is 1 by `phase`.
  void apply_phase(std::size_t qubit, Complex phase) {
    const std::size_t bit = mask(qubit);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & bit) amps_[i] *= phase;
    }
  }

  void apply_x(std::size_t qubit) {
    const std::size_t bit = mask(qubit);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (!(i & bit)) std::swap(amps_[i], amps_[i | bit]);
    }
  }

  void apply_cnot(std::size_t control, std::size_t target) {
    if (control == target) throw std::invalid_argument("CNOT: control and target must differ");
    const std::size_t c = mask(control);
    const std::size_t t = mask(target);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if ((i & c) && !(i & t)) std::swap(amps_[i], amps_[i | t]);
    }
  }

  void apply(Gate g, std::span<const std::size_t> targets) {
    if (targets.size() != g.arity()) {
      throw std::invalid_argument(std::string(gate_name(g.kind)) + " expects " +
                                  std::to_string(g.arity()) + " target(s)");
    }
    for (auto q : targets) check_qubit(q);
    switch (g.kind) {
      case GateKind::X: apply_x(targets[0]); break;
      case GateKind::Z: apply_phase(targets[0], -1.0); break;
      case GateKind::P: apply_phase(targets[0], Complex{0.0, g.dagger ? -1.0 : 1.0}); break;
      case GateKind::T:
        apply_phase(targets[0], std::polar(1.0, (g.dagger ? -1.0 : 1.0) * std::numbers::pi / 4.0));
        break;
      case GateKind::H: apply_matrix(targets[0], gate_matrix(g)); break;
      case GateKind::CNOT: apply_cnot(targets[0], targets[1]); break;
    }
  }

  void apply(Gate g, std::size_t q) {
    const std::array<std::size_t, 1> t{q};
    apply(g, t);
  }

  void apply(Gate g, std::size_t q0, std::size_t q1) {
    const std::array<std::size_t, 2> t{q0, q1};
    apply(g, t);
  }

  /// Probability (relative to the current norm) that `qubit` reads 1.
  double probability_one(std::size_t qubit) const {
    const std::size_t bit = mask(qubit);
    double p1 = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & bit) p1 += std::norm(amps_[i]);
    }
    return p1;
  }

  /// Zeroes the amplitudes inconsistent with `qubit` = `value`. No renormalization.
  void project(std::size_t qubit, Bit value) {
    const std::size_t bit = mask(qubit);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (static_cast<Bit>((i & bit) != 0) != value) amps_[i] = 0.0;
    }
  }

  /// Appends a new least-significant qubit in state alpha|0> + beta|1>.
  void append_qubit(const std::array<Complex, 2>& amplitudes) {
    require_capacity(num_qubits_ + 1);
    std::vector<Complex> out(amps_.size() * 2);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      out[2 * i] = amps_[i] * amplitudes[0];
      out[2 * i + 1] = amps_[i] * amplitudes[1];
    }
    amps_ = std::move(out);
    ++num_qubits_;
  }

  /// Removes `qubit`, which must already be projected onto |value>.
  void remove_qubit(std::size_t qubit, Bit value) {
    if (num_qubits_ == 1) throw std::invalid_argument("remove_qubit: cannot remove the last qubit");
    const std::size_t bit = mask(qubit);
    const std::size_t low = bit - 1;
    std::vector<Complex> out(amps_.size() / 2);
    for (std::size_t j = 0; j < out.size(); ++j) {
      const std::size_t i = ((j & ~low) << 1) | (j & low) | (value ? bit : 0);
      out[j] = amps_[i];
    }
    amps_ = std::move(out);
    --num_qubits_;
  }

 private:
  std::size_t num_qubits_;
  std::vector<Complex> amps_;
};

/// Tensor product, in order, of the listed single-qubit states.
inline State prepare_state(std::span<const AuxState> specs) {
  if (specs.empty()) throw std::invalid_argument("prepare_state: empty spec list");
  require_capacity(specs.size());
  const auto first = aux_amplitudes(specs[0]);
  State s(1, {first[0], first[1]});
  for (std::size_t k = 1; k < specs.size(); ++k) s.append_qubit(aux_amplitudes(specs[k]));
  return s;
}

inline State prepare_state(std::initializer_list<AuxState> specs) {
  return prepare_state(std::span<const AuxState>(specs.begin(), specs.size()));
}

inline State apply_gate(State state, Gate gate, std::span<const std::size_t> targets) {
  if (gate.kind == GateKind::CNOT && targets.size() == 2 && targets[0] == targets[1]) {
    throw std::invalid_argument("apply_gate: duplicate CNOT targets");
  }
  state.apply(gate, targets);
  return state;
}

inline State apply_gate(State state, Gate gate, std::initializer_list<std::size_t> targets) {
  return apply_gate(std::move(state), gate, std::span<const std::size_t>(targets.begin(), targets.size()));
}

/// Born-rule measurement of one qubit. The register keeps all its qubits; the
/// measured one is collapsed and the state renormalized.
inline std::pair<Bit, State> measure_computational(State state, std::size_t qubit, Rng& rng) {
  const double total = state.norm_squared();
  if (total < 1e-24) throw std::runtime_error("measure_computational: degenerate state");
  const double p1 = state.probability_one(qubit) / total;
  const Bit outcome = rng.uniform() < p1 ? 1 : 0;
  state.project(qubit, outcome);
  state.normalize();
  return {outcome, std::move(state)};
}

inline Complex inner_product(const State& a, const State& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw std::invalid_argument("inner_product: qubit count mismatch");
  }
  Complex s{};
  for (std::size_t i = 0; i < a.dimension(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

/// |<a|b>|, insensitive to global phase. 1 iff a and b agree up to phase.
inline double fidelity_up_to_phase(const State& a, const State& b) {
  return std::min(1.0, std::abs(inner_product(a, b)));
}

/// Density matrix over `dim` basis states.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("DensityMatrix: matrix must be square");
  }

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Complex operator()(std::size_t r, std::size_t c) const {
    return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  Complex trace() const { return m_.trace(); }

  bool is_hermitian(double tol = kTolerance) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

  /// Hermitian, unit trace and positive semidefinite within `tol`.
  bool is_valid(double tol = kTolerance) const {
    return is_hermitian(tol) && std::abs(trace() - Complex{1.0, 0.0}) <= tol &&
           min_eigenvalue() >= -tol;
  }

 private:
  Eigen::MatrixXcd m_;
};

/// Partial trace keeping `keep` (in the listed order). Sub-normalized inputs
/// give correspondingly scaled outputs.
inline Eigen::MatrixXcd partial_trace(const State& state, std::span<const std::size_t> keep) {
  if (keep.empty()) throw std::invalid_argument("reduced_density: keep set is empty");
  const std::size_t n = state.num_qubits();
  std::vector<bool> kept(n, false);
  for (auto q : keep) {
    state.check_qubit(q);
    if (kept[q]) throw std::invalid_argument("reduced_density: duplicate qubit in keep set");
    kept[q] = true;
  }
  std::vector<std::size_t> traced;
  for (std::size_t q = 0; q < n; ++q)
    if (!kept[q]) traced.push_back(q);

  const std::size_t dk = std::size_t{1} << keep.size();
  const std::size_t dt = std::size_t{1} << traced.size();
  // Index of the full basis state for (kept bits k, traced bits t).
  auto compose = [&](std::size_t k, std::size_t t) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < keep.size(); ++j) {
      if ((k >> (keep.size() - 1 - j)) & 1U) idx |= state.mask(keep[j]);
    }
    for (std::size_t j = 0; j < traced.size(); ++j) {
      if ((t >> (traced.size() - 1 - j)) & 1U) idx |= state.mask(traced[j]);
    }
    return idx;
  };
  Eigen::MatrixXcd psi(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dt));
  for (std::size_t k = 0; k < dk; ++k)
    for (std::size_t t = 0; t < dt; ++t)
      psi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = state[compose(k, t)];
  return psi * psi.adjoint();
}

inline DensityMatrix reduced_density(const State& state, std::span<const std::size_t> keep) {
  return DensityMatrix(partial_trace(state, keep));
}

inline DensityMatrix reduced_density(const State& state, std::initializer_list<std::size_t> keep) {
  return reduced_density(state, std::span<const std::size_t>(keep.begin(), keep.size()));
}

/// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
inline double trace_norm(const Eigen::MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum();
}

/// Haar-ish random normalized state (Gaussian amplitudes).
inline State random_state(std::size_t num_qubits, Rng& rng) {
  std::vector<Complex> amps(std::size_t{1} << num_qubits);
  for (auto& a : amps) a = Complex{rng.normal(), rng.normal()};
  State s(num_qubits, std::move(amps));
  s.normalize();
  return s;
}

}  // namespace qpip
