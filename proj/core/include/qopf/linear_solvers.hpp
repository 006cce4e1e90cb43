#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qopf {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Block sizes of a KKT system ordered (ΔX, ΔZ, Δλ, Δμ). All zero for
/// systems that do not come from the interior point method.
struct KktBlocks {
  Index nx = 0;
  Index ni = 0;
  Index ne = 0;

  Index size() const { return nx + 2 * ni + ne; }
};

struct LinearSystem {
  MatrixXd a;
  VectorXd b;
  KktBlocks blocks;

  Index size() const { return a.rows(); }
  /// Throws DimensionError / Error on shape mismatch or non-finite entries.
  void validate() const;
};

struct SolveReport {
  VectorXd x;
  double residual = std::numeric_limits<double>::quiet_NaN();  // ‖Ax-b‖/‖b‖, recomputed
  double kappa_raw = std::numeric_limits<double>::quiet_NaN();
  double kappa_precond = std::numeric_limits<double>::quiet_NaN();
  std::string backend;

  bool flagged = false;      // result above the requested tolerance
  std::string message;

  // Backend diagnostics; unused fields keep their defaults.
  int ilu_shift_retries = 0;
  double ilu_shift = 0.0;
  int qubits = 0;
  double post_selection_probability = std::numeric_limits<double>::quiet_NaN();
  int optimizer_iterations = 0;
  int restarts_used = 0;
  int layers = 0;
  double final_cost = std::numeric_limits<double>::quiet_NaN();
  double unnormalized_cost = std::numeric_limits<double>::quiet_NaN();
  std::size_t pauli_terms = 0;
};

/// ‖Ax - b‖₂ / ‖b‖₂ (absolute norm when b = 0).
double relative_residual(const MatrixXd& a, const VectorXd& x, const VectorXd& b);

/// LU with partial pivoting. Throws SingularMatrixError when a pivot
/// vanishes to working precision.
SolveReport direct_solve(const LinearSystem& system);

/// σ_max / σ_min from a full SVD; +∞ when σ_min is zero.
double condition_number(const MatrixXd& a);

// ------------------------------------------------------------- ILU(0)

using SparsityPattern = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Structural nonzeros (exact zeros excluded).
SparsityPattern pattern_of(const MatrixXd& a);

/// Incomplete factors of P·A (+ shift·I): unit lower L and upper U with
/// nonzeros only on the pattern. P is the row permutation `row_perm`,
/// meaning row i of P·A is row row_perm[i] of A.
struct IluFactors {
  MatrixXd l;
  MatrixXd u;
  std::vector<Index> row_perm;
  SparsityPattern pattern;  // pattern the factors are restricted to
  double shift = 0.0;
  int shift_retries = 0;
  int fill_level = 0;
  double fill_ratio = 1.0;  // pattern nonzeros over nonzeros of P·A (diagonal included)
  std::string fill_policy() const { return "ILU(" + std::to_string(fill_level) + ")"; }

  Index size() const { return l.rows(); }
  MatrixXd product() const { return l * u; }
  /// P·A for a matrix of matching size.
  MatrixXd permute_rows(const MatrixXd& a) const;
  /// M⁻¹ v with M = Pᵀ L U.
  VectorXd solve(const VectorXd& v) const;
};

/// Plain ILU(0) of `a` restricted to `pattern` (diagonal always included),
/// no pivoting. Throws ZeroPivotError naming the offending row.
IluFactors ilu0_factorize(const MatrixXd& a, const SparsityPattern& pattern);

/// Row permutation maximizing Π|a_{perm[i], i}| over structurally nonzero
/// diagonals (weighted bipartite matching). Identity when no perfect
/// matching exists.
std::vector<Index> max_product_row_permutation(const MatrixXd& a);

/// Symbolic ILU(k): entries whose fill level is ≤ `level`, the level of an
/// original nonzero being 0 and of fill created through pivot k being
/// lev(i,k) + lev(k,j) + 1. Level 0 returns `base` plus the diagonal.
SparsityPattern fill_pattern(const SparsityPattern& base, int level);

struct IluOptions {
  int fill_level = 0;  // 0 is ILU(0)
  bool static_pivoting = true;
  int max_shift_retries = 3;
  double shift_scale = 1e-8;      // δ = shift_scale·‖A‖∞ on the first retry
  double shift_growth = 100.0;    // multiplier per further escalation
};

/// ILU(k) on the row-permuted matrix with the diagonal-shift fallback.
IluFactors build_ilu_preconditioner(const MatrixXd& a, const IluOptions& options = {});

/// (M⁻¹A, M⁻¹b) via triangular solves, M = Pᵀ L U.
LinearSystem apply_left_preconditioning(const LinearSystem& system, const IluFactors& factors);

// ------------------------------------------------------ quantum embedding

/// A real symmetric 2^n system with ‖A_q‖₂ = 1 and ‖b_q‖₂ = 1, plus the
/// data needed to map solutions back to the source system.
struct EmbeddedSystem {
  MatrixXd a_q;
  VectorXd b_q;
  int num_qubits = 0;

  Index original_size = 0;
  Index padded_size = 0;     // power of two ≥ original_size
  bool dilated = false;      // [[0, A], [Aᵀ, 0]] applied after padding
  double matrix_scale = 1.0; // spectral norm divided out of A
  double rhs_norm = 1.0;     // ‖b‖ divided out of b

  LinearSystem source;

  /// Source-space solution from a solution of A_q x_q = b_q.
  VectorXd recover(const VectorXd& x_q) const;
  /// Inverse of recover for exact solutions (zero padding entries).
  VectorXd embed_solution(const VectorXd& x) const;
};

EmbeddedSystem quantum_embedding(const LinearSystem& system);

}  // namespace qopf
