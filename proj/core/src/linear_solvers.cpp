#include "qopf/linear_solvers.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "qopf/errors.hpp"

namespace qopf {

void LinearSystem::validate() const {
  if (a.rows() != a.cols()) {
    throw DimensionError("linear system matrix must be square, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (b.size() != a.rows()) {
    throw DimensionError("right-hand side has " + std::to_string(b.size()) +
                         " entries, matrix has " + std::to_string(a.rows()) + " rows");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw Error("linear system contains non-finite entries");
  }
}

double relative_residual(const MatrixXd& a, const VectorXd& x, const VectorXd& b) {
  const double r = (a * x - b).norm();
  const double nb = b.norm();
  return nb > 0.0 ? r / nb : r;
}

SolveReport direct_solve(const LinearSystem& system) {
  system.validate();
  // Rows are equilibrated so barrier terms of very different size do not
  // mask each other; PartialPivLU does not report singularity, so the U
  // diagonal of the scaled matrix is inspected.
  const VectorXd row_max = system.a.cwiseAbs().rowwise().maxCoeff();
  for (Index i = 0; i < row_max.size(); ++i) {
    if (!(row_max(i) > 0.0)) {
      throw SingularMatrixError("matrix is singular to working precision (pivot " +
                                std::to_string(i) + ")");
    }
  }
  const VectorXd d = row_max.cwiseInverse();
  const Eigen::PartialPivLU<MatrixXd> lu(d.asDiagonal() * system.a);
  const auto& m = lu.matrixLU();
  const double tiny = std::numeric_limits<double>::epsilon() * static_cast<double>(system.size());
  for (Index i = 0; i < m.rows(); ++i) {
    if (!(std::abs(m(i, i)) > tiny)) {
      throw SingularMatrixError("matrix is singular to working precision (pivot " +
                                std::to_string(i) + ")");
    }
  }
  SolveReport rep;
  rep.backend = "classical_lu";
  rep.x = lu.solve(d.asDiagonal() * system.b);
  rep.residual = relative_residual(system.a, rep.x, system.b);
  return rep;
}

double condition_number(const MatrixXd& a) {
  if (a.size() == 0) return 1.0;
  const Eigen::BDCSVD<MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

// ------------------------------------------------------ quantum embedding

namespace {

Index next_power_of_two(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

int log2_exact(Index p) {
  int q = 0;
  while ((Index{1} << q) < p) ++q;
  return q;
}

}  // namespace

EmbeddedSystem quantum_embedding(const LinearSystem& system) {
  system.validate();
  EmbeddedSystem e;
  e.source = system;
  e.original_size = system.size();
  e.padded_size = next_power_of_two(std::max<Index>(e.original_size, 1));

  MatrixXd ap = MatrixXd::Identity(e.padded_size, e.padded_size);
  ap.topLeftCorner(e.original_size, e.original_size) = system.a;
  VectorXd bp = VectorXd::Zero(e.padded_size);
  bp.head(e.original_size) = system.b;

  const double asym = (ap - ap.transpose()).cwiseAbs().maxCoeff();
  const double amax = ap.cwiseAbs().maxCoeff();
  e.dilated = asym > 1e-14 * std::max(amax, 1.0);

  MatrixXd h;
  VectorXd rhs;
  if (e.dilated) {
    const Index p = e.padded_size;
    h = MatrixXd::Zero(2 * p, 2 * p);
    h.topRightCorner(p, p) = ap;
    h.bottomLeftCorner(p, p) = ap.transpose();
    rhs = VectorXd::Zero(2 * p);
    rhs.head(p) = bp;
  } else {
    h = 0.5 * (ap + ap.transpose());
    rhs = bp;
  }

  const Eigen::BDCSVD<MatrixXd> svd(h);
  e.matrix_scale = svd.singularValues()(0);
  if (!(e.matrix_scale > 0.0)) throw SingularMatrixError("cannot embed a zero matrix");
  e.rhs_norm = rhs.norm();
  if (!(e.rhs_norm > 0.0)) throw Error("cannot embed a zero right-hand side");

  e.a_q = h / e.matrix_scale;
  e.b_q = rhs / e.rhs_norm;
  e.num_qubits = log2_exact(e.a_q.rows());
  return e;
}

VectorXd EmbeddedSystem::recover(const VectorXd& x_q) const {
  if (x_q.size() != a_q.rows()) {
    throw DimensionError("embedded solution has the wrong length");
  }
  const Index offset = dilated ? padded_size : 0;
  return x_q.segment(offset, original_size) * (rhs_norm / matrix_scale);
}

VectorXd EmbeddedSystem::embed_solution(const VectorXd& x) const {
  if (x.size() != original_size) {
    throw DimensionError("solution has the wrong length for this embedding");
  }
  VectorXd x_q = VectorXd::Zero(a_q.rows());
  const Index offset = dilated ? padded_size : 0;
  x_q.segment(offset, original_size) = x * (matrix_scale / rhs_norm);
  return x_q;
}

}  // namespace qopf
