#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fpcross/error.hpp"

namespace fpcross {

namespace detail {

/// Row pivots of Gaussian elimination with partial pivoting on a tall matrix.
/// Returns an empty vector if some column has no usable pivot.
inline std::vector<Eigen::Index> lu_row_pivots(const Eigen::MatrixXd& m) {
  using Eigen::Index;
  const Index n = m.rows();
  const Index r = m.cols();
  const double tiny = 1e-14 * std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::MatrixXd w = m;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<Index> rows;
  for (Index j = 0; j < r; ++j) {
    Index best = -1;
    double best_val = tiny;
    for (Index i = 0; i < n; ++i) {
      if (!used[static_cast<std::size_t>(i)] && std::abs(w(i, j)) > best_val) {
        best = i;
        best_val = std::abs(w(i, j));
      }
    }
    if (best < 0) return {};
    used[static_cast<std::size_t>(best)] = true;
    rows.push_back(best);
    const Eigen::RowVectorXd pivot_row = w.row(best) / w(best, j);
    for (Index i = 0; i < n; ++i)
      if (!used[static_cast<std::size_t>(i)]) w.row(i) -= w(i, j) * pivot_row;
  }
  return rows;
}

}  // namespace detail

/// Selects r rows of a tall n x r matrix whose square submatrix has
/// quasi-maximal volume: on return every entry of m * inv(m[rows, :]) has
/// magnitude <= 1 + delta (unless the iteration cap was hit).
///
/// Starts from the pivots of a partially pivoted LU and then swaps in the
/// row carrying the largest coefficient until the bound holds.
inline std::vector<Eigen::Index> maxvol(const Eigen::MatrixXd& m, double delta = 0.01,
                                        Eigen::Index max_iters = 0) {
  using Eigen::Index;
  const Index n = m.rows();
  const Index r = m.cols();
  detail::require(r >= 1, "maxvol: matrix must have at least one column");
  detail::require(n >= r, "maxvol: matrix must have at least as many rows as columns");
  detail::require(delta >= 0.0, "maxvol: delta must be nonnegative");
  if (!m.allFinite()) throw NonFiniteError("maxvol: matrix has nonfinite entries");
  if (max_iters <= 0) max_iters = 100 * r + 100;

  std::vector<Index> rows = detail::lu_row_pivots(m);
  if (rows.empty()) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.transpose());
    if (qr.rank() < r) throw std::invalid_argument("maxvol: matrix is rank deficient");
    const auto& perm = qr.colsPermutation().indices();
    rows.assign(perm.data(), perm.data() + r);
  }

  Eigen::MatrixXd sub(r, r);
  for (Index j = 0; j < r; ++j) sub.row(j) = m.row(rows[static_cast<std::size_t>(j)]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sub.transpose());
  Eigen::MatrixXd b = lu.solve(m.transpose()).transpose();  // m * inv(sub)
  if (!b.allFinite()) throw std::invalid_argument("maxvol: matrix is rank deficient");

  for (Index it = 0; it < max_iters; ++it) {
    Index i = 0;
    Index j = 0;
    const double big = b.cwiseAbs().maxCoeff(&i, &j);
    if (big <= 1.0 + delta) break;
    rows[static_cast<std::size_t>(j)] = i;
    const Eigen::VectorXd col = b.col(j);
    Eigen::RowVectorXd row = b.row(i);
    row(j) -= 1.0;
    b.noalias() -= col * row / col(i);
  }
  return rows;
}

}  // namespace fpcross
