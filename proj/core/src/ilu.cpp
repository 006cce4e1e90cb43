#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qopf/errors.hpp"
#include "qopf/linear_solvers.hpp"

namespace qopf {

SparsityPattern pattern_of(const MatrixXd& a) {
  return (a.array() != 0.0).matrix();
}

MatrixXd IluFactors::permute_rows(const MatrixXd& a) const {
  MatrixXd out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) out.row(i) = a.row(row_perm[static_cast<std::size_t>(i)]);
  return out;
}

VectorXd IluFactors::solve(const VectorXd& v) const {
  VectorXd w(v.size());
  for (Index i = 0; i < v.size(); ++i) w(i) = v(row_perm[static_cast<std::size_t>(i)]);
  l.triangularView<Eigen::UnitLower>().solveInPlace(w);
  u.triangularView<Eigen::Upper>().solveInPlace(w);
  return w;
}

SparsityPattern fill_pattern(const SparsityPattern& base, int level) {
  if (level < 0) throw OptionError("fill level must be non-negative");
  const Index n = base.rows();
  if (base.cols() != n) throw DimensionError("fill_pattern needs a square pattern");
  constexpr int kNone = std::numeric_limits<int>::max() / 4;
  Eigen::MatrixXi lev = Eigen::MatrixXi::Constant(n, n, kNone);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (base(i, j) || i == j) lev(i, j) = 0;
    }
  }
  for (Index i = 1; i < n; ++i) {
    for (Index k = 0; k < i; ++k) {
      if (lev(i, k) > level) continue;
      for (Index j = k + 1; j < n; ++j) {
        if (lev(k, j) > level) continue;
        lev(i, j) = std::min(lev(i, j), lev(i, k) + lev(k, j) + 1);
      }
    }
  }
  return (lev.array() <= level).matrix();
}

IluFactors ilu0_factorize(const MatrixXd& a, const SparsityPattern& pattern) {
  const Index n = a.rows();
  if (a.cols() != n || pattern.rows() != n || pattern.cols() != n) {
    throw DimensionError("ilu0: matrix and pattern must be square and of equal size");
  }
  SparsityPattern pat = pattern;
  pat.diagonal().setConstant(true);

  const double scale = a.cwiseAbs().maxCoeff();
  const double tiny = 1e-12 * (scale > 0.0 ? scale : 1.0);

  // IKJ variant operating in place on a copy restricted to the pattern.
  MatrixXd w = a.cwiseProduct(pat.cast<double>());
  if (n > 0 && std::abs(w(0, 0)) <= tiny) throw ZeroPivotError(0, "ilu0: zero pivot at row 0");
  for (Index i = 1; i < n; ++i) {
    for (Index k = 0; k < i; ++k) {
      if (!pat(i, k)) continue;
      w(i, k) /= w(k, k);
      const double lik = w(i, k);
      for (Index j = k + 1; j < n; ++j) {
        if (pat(i, j)) w(i, j) -= lik * w(k, j);
      }
    }
    if (std::abs(w(i, i)) <= tiny) throw ZeroPivotError(i, "ilu0: zero pivot at row " + std::to_string(i));
  }

  IluFactors f;
  f.l = MatrixXd::Identity(n, n);
  f.l.triangularView<Eigen::StrictlyLower>() = w.triangularView<Eigen::StrictlyLower>();
  f.u = w.triangularView<Eigen::Upper>();
  f.row_perm.resize(static_cast<std::size_t>(n));
  std::iota(f.row_perm.begin(), f.row_perm.end(), Index{0});
  f.pattern = std::move(pat);
  return f;
}

std::vector<Index> max_product_row_permutation(const MatrixXd& a) {
  const Index n = a.rows();
  std::vector<Index> identity(static_cast<std::size_t>(n));
  std::iota(identity.begin(), identity.end(), Index{0});
  if (n == 0) return identity;

  // Assignment over columns (workers) and rows (jobs) minimizing
  // Σ log(colmax_j) - log|a_ij|; structural zeros are forbidden.
  constexpr double kForbidden = 1e18;
  const auto N = static_cast<std::size_t>(n);
  std::vector<std::vector<double>> cost(N + 1, std::vector<double>(N + 1, kForbidden));
  for (Index j = 0; j < n; ++j) {
    const double colmax = a.col(j).cwiseAbs().maxCoeff();
    if (colmax == 0.0) return identity;
    for (Index i = 0; i < n; ++i) {
      const double v = std::abs(a(i, j));
      if (v > 0.0) {
        cost[static_cast<std::size_t>(j) + 1][static_cast<std::size_t>(i) + 1] =
            std::log(colmax) - std::log(v);
      }
    }
  }

  // Hungarian algorithm with potentials (shortest augmenting paths).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(N + 1, 0.0), v(N + 1, 0.0);
  std::vector<std::size_t> match(N + 1, 0), way(N + 1, 0);
  for (std::size_t worker = 1; worker <= N; ++worker) {
    match[0] = worker;
    std::size_t j0 = 0;
    std::vector<double> minv(N + 1, inf);
    std::vector<char> used(N + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= N; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= N; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Index> perm(N);
  for (std::size_t row = 1; row <= N; ++row) {
    const std::size_t col = match[row];
    if (cost[col][row] >= kForbidden) return identity;  // no structural matching
    perm[col - 1] = static_cast<Index>(row - 1);
  }
  return perm;
}

IluFactors build_ilu_preconditioner(const MatrixXd& a, const IluOptions& options) {
  const Index n = a.rows();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  if (options.static_pivoting) perm = max_product_row_permutation(a);

  MatrixXd pa(n, n);
  for (Index i = 0; i < n; ++i) pa.row(i) = a.row(perm[static_cast<std::size_t>(i)]);
  SparsityPattern base = pattern_of(pa);
  base.diagonal().setConstant(true);
  const SparsityPattern pattern = fill_pattern(base, options.fill_level);
  const double fill_ratio = static_cast<double>(pattern.count()) / static_cast<double>(std::max<Index>(base.count(), 1));
  const double norm_inf = a.cwiseAbs().rowwise().sum().maxCoeff();

  double shift = 0.0;
  for (int attempt = 0;; ++attempt) {
    try {
      MatrixXd shifted = pa;
      shifted.diagonal().array() += shift;
      IluFactors f = ilu0_factorize(shifted, pattern);
      f.row_perm = perm;
      f.shift = shift;
      f.shift_retries = attempt;
      f.fill_level = options.fill_level;
      f.fill_ratio = fill_ratio;
      return f;
    } catch (const ZeroPivotError&) {
      if (attempt >= options.max_shift_retries) throw;
      shift = shift == 0.0 ? options.shift_scale * norm_inf : shift * options.shift_growth;
    }
  }
}

LinearSystem apply_left_preconditioning(const LinearSystem& system, const IluFactors& factors) {
  system.validate();
  if (factors.size() != system.size()) {
    throw DimensionError("preconditioner size does not match the system");
  }
  if ((factors.u.diagonal().array() == 0.0).any()) {
    throw SingularMatrixError("preconditioner has a singular triangular factor");
  }
  LinearSystem out;
  out.blocks = system.blocks;
  out.a = factors.permute_rows(system.a);
  factors.l.triangularView<Eigen::UnitLower>().solveInPlace(out.a);
  factors.u.triangularView<Eigen::Upper>().solveInPlace(out.a);
  out.b = factors.solve(system.b);
  return out;
}

}  // namespace qopf
