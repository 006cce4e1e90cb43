#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qopf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Eigen::Index;

// Qubit q corresponds to bit q of the basis-state index (qubit 0 is the
// least significant bit).

class StateVector {
 public:
  /// |0…0⟩ on `num_qubits` qubits.
  explicit StateVector(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  Index dimension() const { return amps_.size(); }
  const CVector& amplitudes() const { return amps_; }
  double norm() const { return amps_.norm(); }

  /// Replaces the amplitudes; throws QuantumError on size or norm mismatch.
  void set_amplitudes(CVector amps);

  /// 2x2 unitary on `target`, applied only where every qubit in
  /// `control_mask` is 1.
  void apply_single(int target, const Eigen::Matrix2cd& u, std::uint64_t control_mask = 0);

  /// Dense 2^k unitary on `targets` (targets[0] is the least significant
  /// bit of the sub-index), conditioned on `control_mask`.
  void apply_unitary(const std::vector<int>& targets, const CMatrix& u,
                     std::uint64_t control_mask = 0);

  /// Discrete Fourier transform |m⟩ → N^{-1/2} Σ_k e^{±2πi mk/N} |k⟩ on the
  /// contiguous register [first, first + count); `inverse` selects the minus sign.
  void apply_register_fourier(int first, int count, bool inverse);

  /// Probability of measuring `qubit` as 1.
  double probability_one(int qubit) const;

 private:
  void check_qubit(int q) const;

  int num_qubits_;
  CVector amps_;
};

/// Loads a unit vector verbatim (simulation privilege).
StateVector prepare_state(const CVector& amplitudes);
StateVector prepare_state(const Eigen::VectorXd& amplitudes);

enum class GateKind { H, X, Y, Z, Rx, Ry, Rz, Phase, Cnot, Cz, Unitary };

struct Gate {
  GateKind kind = GateKind::H;
  std::vector<int> targets;
  std::vector<int> controls;
  double angle = 0.0;
  CMatrix matrix;  // only for GateKind::Unitary

  std::string name() const;
  /// Matrix acting on `targets` (controls excluded).
  CMatrix target_matrix() const;
};

namespace gates {
Gate h(int q);
Gate x(int q);
Gate y(int q);
Gate z(int q);
Gate rx(int q, double angle);
Gate ry(int q, double angle);
Gate rz(int q, double angle);
Gate phase(int q, double angle);
Gate cnot(int control, int target);
Gate cz(int a, int b);
Gate controlled(std::vector<int> controls, Gate g);
Gate unitary(std::vector<int> targets, CMatrix u);
}  // namespace gates

class Circuit {
 public:
  explicit Circuit(int num_qubits) : num_qubits_(num_qubits) {}

  int num_qubits() const { return num_qubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }

  /// Validates qubit indices and unitarity before appending.
  Circuit& add(Gate g);

 private:
  int num_qubits_;
  std::vector<Gate> gates_;
};

void apply_gate(StateVector& state, const Gate& gate);
void apply_circuit(StateVector& state, const Circuit& circuit);

/// Textbook QFT on [first, first + count) built from H, controlled phases
/// and swaps; equivalent to apply_register_fourier(first, count, false).
Circuit qft_circuit(int num_qubits, int first, int count);

struct PauliTerm {
  Complex coefficient;
  std::string word;  // word[k] acts on qubit n-1-k
};

struct PauliDecomposition {
  int num_qubits = 0;
  std::vector<PauliTerm> terms;

  CMatrix reconstruct() const;
  /// Σ c_i P_i v.
  CVector apply(const CVector& v) const;
};

/// Dense matrix of a Pauli word.
CMatrix pauli_matrix(const std::string& word);

/// out = P·in for a single Pauli word, without forming the matrix.
void apply_pauli(const std::string& word, const CVector& in, CVector& out);

/// c_i = tr(P_i M) / 2^n over all 4^n words, dropping |c_i| ≤ threshold.
PauliDecomposition pauli_decompose(const CMatrix& m, double threshold = 1e-12);

/// ⟨ψ|O|ψ⟩ for Hermitian O; throws QuantumError otherwise.
double expectation(const StateVector& state, const CMatrix& op);
double expectation(const StateVector& state, const PauliDecomposition& op);

/// Shot-sampled estimate of ⟨ψ|O|ψ⟩: each Pauli term is measured `shots`
/// times in its eigenbasis. Requires real coefficients.
double sampled_expectation(const StateVector& state, const PauliDecomposition& op,
                           int shots, std::mt19937_64& rng);

/// exp(iHt) from the eigendecomposition of Hermitian H.
CMatrix unitary_from_hamiltonian(const CMatrix& h, double t);

bool is_hermitian(const CMatrix& m, double tol = 1e-10);
bool is_unitary(const CMatrix& m, double tol = 1e-12);

}  // namespace qopf
