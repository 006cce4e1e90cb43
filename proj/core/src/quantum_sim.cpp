#include "qopf/quantum_sim.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "qopf/errors.hpp"

namespace qopf {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

std::uint64_t bit(int q) { return std::uint64_t{1} << q; }

}  // namespace

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 0 || num_qubits > 30) {
    throw QuantumError("qubit count must be in [0, 30], got " + std::to_string(num_qubits));
  }
  amps_ = CVector::Zero(Index{1} << num_qubits);
  amps_(0) = 1.0;
}

void StateVector::set_amplitudes(CVector amps) {
  if (amps.size() != amps_.size()) {
    throw QuantumError("amplitude vector has length " + std::to_string(amps.size()) +
                       ", expected " + std::to_string(amps_.size()));
  }
  if (std::abs(amps.norm() - 1.0) > 1e-8) {
    throw QuantumError("state must have unit norm (got " + std::to_string(amps.norm()) + ")");
  }
  amps_ = std::move(amps);
}

void StateVector::check_qubit(int q) const {
  if (q < 0 || q >= num_qubits_) {
    throw QuantumError("qubit index " + std::to_string(q) + " out of range for " +
                       std::to_string(num_qubits_) + " qubits");
  }
}

void StateVector::apply_single(int target, const Eigen::Matrix2cd& u, std::uint64_t control_mask) {
  check_qubit(target);
  const std::uint64_t t = bit(target);
  const auto dim = static_cast<std::uint64_t>(amps_.size());
  const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (std::uint64_t i = 0; i < dim; ++i) {
    if ((i & t) || (i & control_mask) != control_mask) continue;
    const auto i0 = static_cast<Index>(i);
    const auto i1 = static_cast<Index>(i | t);
    const Complex a0 = amps_(i0);
    const Complex a1 = amps_(i1);
    amps_(i0) = u00 * a0 + u01 * a1;
    amps_(i1) = u10 * a0 + u11 * a1;
  }
}

void StateVector::apply_unitary(const std::vector<int>& targets, const CMatrix& u,
                                std::uint64_t control_mask) {
  const auto k = static_cast<int>(targets.size());
  const Index sub = Index{1} << k;
  if (u.rows() != sub || u.cols() != sub) {
    throw QuantumError("unitary size does not match the number of targets");
  }
  std::uint64_t target_mask = 0;
  for (int q : targets) {
    check_qubit(q);
    if (target_mask & bit(q)) throw QuantumError("duplicate target qubit");
    target_mask |= bit(q);
  }
  if (target_mask & control_mask) throw QuantumError("control qubit overlaps a target");

  std::vector<std::uint64_t> offsets(static_cast<std::size_t>(sub));
  for (Index s = 0; s < sub; ++s) {
    std::uint64_t off = 0;
    for (int j = 0; j < k; ++j) {
      if (s & (Index{1} << j)) off |= bit(targets[static_cast<std::size_t>(j)]);
    }
    offsets[static_cast<std::size_t>(s)] = off;
  }
  CVector buf(sub);
  const auto dim = static_cast<std::uint64_t>(amps_.size());
  for (std::uint64_t base = 0; base < dim; ++base) {
    if ((base & target_mask) || (base & control_mask) != control_mask) continue;
    for (Index s = 0; s < sub; ++s) buf(s) = amps_(static_cast<Index>(base | offsets[static_cast<std::size_t>(s)]));
    const CVector out = u * buf;
    for (Index s = 0; s < sub; ++s) amps_(static_cast<Index>(base | offsets[static_cast<std::size_t>(s)])) = out(s);
  }
}

void StateVector::apply_register_fourier(int first, int count, bool inverse) {
  if (count <= 0) return;
  check_qubit(first);
  check_qubit(first + count - 1);
  const Index n = Index{1} << count;
  const Index stride = Index{1} << first;
  const Index block = n * stride;
  const double root_n = std::sqrt(static_cast<double>(n));

  Eigen::FFT<double> fft;
  std::vector<Complex> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
  for (Index base = 0; base < amps_.size(); base += block) {
    for (Index lo = 0; lo < stride; ++lo) {
      for (Index m = 0; m < n; ++m) in[static_cast<std::size_t>(m)] = amps_(base + lo + m * stride);
      if (inverse) {
        fft.fwd(out, in);  // Σ e^{-2πi mk/N}
        for (auto& v : out) v /= root_n;
      } else {
        fft.inv(out, in);  // N^{-1} Σ e^{+2πi mk/N}
        for (auto& v : out) v *= root_n;
      }
      for (Index m = 0; m < n; ++m) amps_(base + lo + m * stride) = out[static_cast<std::size_t>(m)];
    }
  }
}

double StateVector::probability_one(int qubit) const {
  check_qubit(qubit);
  double p = 0.0;
  for (Index i = 0; i < amps_.size(); ++i) {
    if (static_cast<std::uint64_t>(i) & bit(qubit)) p += std::norm(amps_(i));
  }
  return p;
}

StateVector prepare_state(const CVector& amplitudes) {
  const auto n = amplitudes.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw QuantumError("state length must be a power of two, got " + std::to_string(n));
  }
  StateVector s(std::countr_zero(static_cast<std::uint64_t>(n)));
  s.set_amplitudes(amplitudes);
  return s;
}

StateVector prepare_state(const Eigen::VectorXd& amplitudes) {
  return prepare_state(CVector(amplitudes.cast<Complex>()));
}

// ------------------------------------------------------------------ gates

std::string Gate::name() const {
  switch (kind) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::Rx: return "RX";
    case GateKind::Ry: return "RY";
    case GateKind::Rz: return "RZ";
    case GateKind::Phase: return "P";
    case GateKind::Cnot: return "CNOT";
    case GateKind::Cz: return "CZ";
    case GateKind::Unitary: return "U";
  }
  return "?";
}

CMatrix Gate::target_matrix() const {
  CMatrix m(2, 2);
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  switch (kind) {
    case GateKind::H:
      m << 1.0, 1.0, 1.0, -1.0;
      return m / std::sqrt(2.0);
    case GateKind::X:
    case GateKind::Cnot:
      m << 0.0, 1.0, 1.0, 0.0;
      return m;
    case GateKind::Y:
      m << 0.0, -kI, kI, 0.0;
      return m;
    case GateKind::Z:
    case GateKind::Cz:
      m << 1.0, 0.0, 0.0, -1.0;
      return m;
    case GateKind::Rx:
      m << c, -kI * s, -kI * s, c;
      return m;
    case GateKind::Ry:
      m << c, -s, s, c;
      return m;
    case GateKind::Rz:
      m << std::exp(-kI * angle / 2.0), 0.0, 0.0, std::exp(kI * angle / 2.0);
      return m;
    case GateKind::Phase:
      m << 1.0, 0.0, 0.0, std::exp(kI * angle);
      return m;
    case GateKind::Unitary:
      return matrix;
  }
  return m;
}

namespace gates {
namespace {
Gate single(GateKind k, int q, double angle = 0.0) {
  Gate g;
  g.kind = k;
  g.targets = {q};
  g.angle = angle;
  return g;
}
}  // namespace

Gate h(int q) { return single(GateKind::H, q); }
Gate x(int q) { return single(GateKind::X, q); }
Gate y(int q) { return single(GateKind::Y, q); }
Gate z(int q) { return single(GateKind::Z, q); }
Gate rx(int q, double a) { return single(GateKind::Rx, q, a); }
Gate ry(int q, double a) { return single(GateKind::Ry, q, a); }
Gate rz(int q, double a) { return single(GateKind::Rz, q, a); }
Gate phase(int q, double a) { return single(GateKind::Phase, q, a); }

Gate cnot(int control, int target) {
  Gate g = single(GateKind::Cnot, target);
  g.controls = {control};
  return g;
}

Gate cz(int a, int b) {
  Gate g = single(GateKind::Cz, b);
  g.controls = {a};
  return g;
}

Gate controlled(std::vector<int> controls, Gate g) {
  g.controls.insert(g.controls.end(), controls.begin(), controls.end());
  return g;
}

Gate unitary(std::vector<int> targets, CMatrix u) {
  Gate g;
  g.kind = GateKind::Unitary;
  g.targets = std::move(targets);
  g.matrix = std::move(u);
  return g;
}
}  // namespace gates

Circuit& Circuit::add(Gate g) {
  std::uint64_t used = 0;
  auto claim = [&](int q) {
    if (q < 0 || q >= num_qubits_) {
      throw QuantumError(g.name() + " gate uses qubit " + std::to_string(q) +
                         " outside a " + std::to_string(num_qubits_) + "-qubit circuit");
    }
    if (used & bit(q)) throw QuantumError(g.name() + " gate repeats qubit " + std::to_string(q));
    used |= bit(q);
  };
  for (int q : g.targets) claim(q);
  for (int q : g.controls) claim(q);
  const CMatrix m = g.target_matrix();
  if (m.rows() != (Index{1} << g.targets.size()) || !is_unitary(m)) {
    throw QuantumError(g.name() + " gate matrix is not a unitary of matching size");
  }
  gates_.push_back(std::move(g));
  return *this;
}

void apply_gate(StateVector& state, const Gate& gate) {
  std::uint64_t cmask = 0;
  for (int c : gate.controls) {
    if (c < 0 || c >= state.num_qubits()) {
      throw QuantumError("control qubit " + std::to_string(c) + " out of range");
    }
    cmask |= bit(c);
  }
  if (gate.targets.size() == 1) {
    if (cmask & bit(gate.targets[0])) throw QuantumError("control qubit overlaps the target");
    const CMatrix m = gate.target_matrix();
    state.apply_single(gate.targets[0], Eigen::Matrix2cd(m), cmask);
  } else {
    state.apply_unitary(gate.targets, gate.target_matrix(), cmask);
  }
}

void apply_circuit(StateVector& state, const Circuit& circuit) {
  if (circuit.num_qubits() != state.num_qubits()) {
    throw QuantumError("circuit and state qubit counts differ");
  }
  for (const auto& g : circuit.gates()) apply_gate(state, g);
}

Circuit qft_circuit(int num_qubits, int first, int count) {
  Circuit c(num_qubits);
  for (int j = count - 1; j >= 0; --j) {
    const int q = first + j;
    c.add(gates::h(q));
    for (int k = j - 1; k >= 0; --k) {
      const double angle = kPi / static_cast<double>(1 << (j - k));
      c.add(gates::controlled({first + k}, gates::phase(q, angle)));
    }
  }
  for (int j = 0; j < count / 2; ++j) {
    const int a = first + j;
    const int b = first + count - 1 - j;
    c.add(gates::cnot(a, b));
    c.add(gates::cnot(b, a));
    c.add(gates::cnot(a, b));
  }
  return c;
}

// ------------------------------------------------------------------ Pauli

namespace {

struct PauliMasks {
  std::uint64_t x = 0;     // bit flips (X or Y)
  std::uint64_t zy = 0;    // sign bits (Z or Y)
  int num_y = 0;
};

PauliMasks masks_of(const std::string& word) {
  PauliMasks m;
  const int n = static_cast<int>(word.size());
  for (int k = 0; k < n; ++k) {
    const std::uint64_t b = bit(n - 1 - k);
    switch (word[static_cast<std::size_t>(k)]) {
      case 'I': break;
      case 'X': m.x |= b; break;
      case 'Y': m.x |= b; m.zy |= b; ++m.num_y; break;
      case 'Z': m.zy |= b; break;
      default: throw QuantumError("invalid Pauli letter in '" + word + "'");
    }
  }
  return m;
}

// (Pψ)_r = (-i)^{nY} (-1)^{|r & zy|} ψ_{r⊕x}
Complex y_phase(int num_y) {
  switch (num_y % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

std::string word_from_index(std::uint64_t idx, int n) {
  static const char letters[4] = {'I', 'X', 'Y', 'Z'};
  std::string w(static_cast<std::size_t>(n), 'I');
  for (int k = n - 1; k >= 0; --k) {
    w[static_cast<std::size_t>(k)] = letters[idx & 3U];
    idx >>= 2;
  }
  return w;
}

}  // namespace

void apply_pauli(const std::string& word, const CVector& in, CVector& out) {
  if (in.size() != (Index{1} << word.size())) {
    throw QuantumError("Pauli word length does not match the vector size");
  }
  const auto m = masks_of(word);
  const Complex g = y_phase(m.num_y);
  out.resize(in.size());
  for (Index r = 0; r < in.size(); ++r) {
    const auto ur = static_cast<std::uint64_t>(r);
    const double sign = (std::popcount(ur & m.zy) & 1) ? -1.0 : 1.0;
    out(r) = g * sign * in(static_cast<Index>(ur ^ m.x));
  }
}

CMatrix pauli_matrix(const std::string& word) {
  const Index dim = Index{1} << word.size();
  CMatrix p = CMatrix::Zero(dim, dim);
  CVector e = CVector::Zero(dim), col;
  for (Index c = 0; c < dim; ++c) {
    e.setZero();
    e(c) = 1.0;
    apply_pauli(word, e, col);
    p.col(c) = col;
  }
  return p;
}

PauliDecomposition pauli_decompose(const CMatrix& m, double threshold) {
  const Index dim = m.rows();
  if (m.cols() != dim || dim == 0 || (dim & (dim - 1)) != 0) {
    throw QuantumError("pauli_decompose needs a square matrix with power-of-two size");
  }
  const int n = std::countr_zero(static_cast<std::uint64_t>(dim));
  PauliDecomposition d;
  d.num_qubits = n;
  const std::uint64_t words = std::uint64_t{1} << (2 * n);
  for (std::uint64_t idx = 0; idx < words; ++idx) {
    std::string w = word_from_index(idx, n);
    const auto pm = masks_of(w);
    const Complex g = y_phase(pm.num_y);
    // tr(P M) = Σ_r P_{r, r⊕x} M_{r⊕x, r}
    Complex tr = 0.0;
    for (Index r = 0; r < dim; ++r) {
      const auto ur = static_cast<std::uint64_t>(r);
      const double sign = (std::popcount(ur & pm.zy) & 1) ? -1.0 : 1.0;
      tr += sign * m(static_cast<Index>(ur ^ pm.x), r);
    }
    const Complex c = g * tr / static_cast<double>(dim);
    if (std::abs(c) > threshold) d.terms.push_back(PauliTerm{c, std::move(w)});
  }
  return d;
}

CMatrix PauliDecomposition::reconstruct() const {
  const Index dim = Index{1} << num_qubits;
  CMatrix m = CMatrix::Zero(dim, dim);
  for (const auto& t : terms) m += t.coefficient * pauli_matrix(t.word);
  return m;
}

CVector PauliDecomposition::apply(const CVector& v) const {
  CVector out = CVector::Zero(v.size());
  CVector tmp;
  for (const auto& t : terms) {
    apply_pauli(t.word, v, tmp);
    out += t.coefficient * tmp;
  }
  return out;
}

// ----------------------------------------------------------- expectations

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_unitary(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

double expectation(const StateVector& state, const CMatrix& op) {
  if (op.rows() != state.dimension() || op.cols() != state.dimension()) {
    throw QuantumError("operator size does not match the state");
  }
  if (!is_hermitian(op)) throw QuantumError("expectation requires a Hermitian operator");
  const auto& psi = state.amplitudes();
  return psi.dot(op * psi).real();
}

double expectation(const StateVector& state, const PauliDecomposition& op) {
  if (op.num_qubits != state.num_qubits()) {
    throw QuantumError("operator and state qubit counts differ");
  }
  double total = 0.0;
  CVector tmp;
  const auto& psi = state.amplitudes();
  for (const auto& t : op.terms) {
    if (std::abs(t.coefficient.imag()) > 1e-10) {
      throw QuantumError("expectation requires a Hermitian operator (complex Pauli coefficient)");
    }
    apply_pauli(t.word, psi, tmp);
    total += t.coefficient.real() * psi.dot(tmp).real();
  }
  return total;
}

double sampled_expectation(const StateVector& state, const PauliDecomposition& op,
                           int shots, std::mt19937_64& rng) {
  if (shots <= 0) throw QuantumError("shot count must be positive");
  double total = 0.0;
  CVector tmp;
  const auto& psi = state.amplitudes();
  for (const auto& t : op.terms) {
    if (std::abs(t.coefficient.imag()) > 1e-10) {
      throw QuantumError("sampled expectation requires real Pauli coefficients");
    }
    apply_pauli(t.word, psi, tmp);
    const double exact = psi.dot(tmp).real();
    const double p_plus = std::clamp(0.5 * (1.0 + exact), 0.0, 1.0);
    std::binomial_distribution<int> outcome(shots, p_plus);
    const int plus = outcome(rng);
    total += t.coefficient.real() * (2.0 * plus - shots) / shots;
  }
  return total;
}

CMatrix unitary_from_hamiltonian(const CMatrix& h, double t) {
  if (!is_hermitian(h)) throw QuantumError("unitary_from_hamiltonian requires a Hermitian matrix");
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const auto& v = es.eigenvectors();
  CVector phases(h.rows());
  for (Index k = 0; k < h.rows(); ++k) phases(k) = std::exp(kI * es.eigenvalues()(k) * t);
  return v * phases.asDiagonal() * v.adjoint();
}

}  // namespace qopf
