#pragma once

// Chebyshev machinery on the extrema grid: differentiation matrices,
// polynomial values, interpolation coefficients of a nodal TT-tensor,
// evaluation of the interpolant, and Clenshaw-Curtis quadrature.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpcross/error.hpp"
#include "fpcross/grid.hpp"
#include "fpcross/tt.hpp"

namespace fpcross {

/// First-order Chebyshev differentiation matrix on cheb_nodes(n, a, b).
inline MatrixXd cheb_diff1(Index n, double a, double b) {
  detail::require(n >= 2, "cheb_diff1: need at least 2 nodes");
  detail::require(a < b, "cheb_diff1: need a < b");
  const VectorXd x = cheb_nodes(n, -1.0, 1.0);
  const double corner = (2.0 * static_cast<double>((n - 1) * (n - 1)) + 1.0) / 6.0;
  MatrixXd dm(n, n);
  for (Index i = 0; i < n; ++i) {
    const double ci = (i == 0 || i == n - 1) ? 2.0 : 1.0;
    for (Index j = 0; j < n; ++j) {
      const double cj = (j == 0 || j == n - 1) ? 2.0 : 1.0;
      if (i != j) {
        const double sign = (i + j) % 2 == 0 ? 1.0 : -1.0;
        dm(i, j) = (ci / cj) * sign / (x[i] - x[j]);
      } else if (i == 0) {
        dm(i, j) = corner;
      } else if (i == n - 1) {
        dm(i, j) = -corner;
      } else {
        dm(i, j) = -x[j] / (2.0 * (1.0 - x[j] * x[j]));
      }
    }
  }
  return dm * (2.0 / (b - a));
}

/// Second-order differentiation matrix: the square of cheb_diff1.
inline MatrixXd cheb_diff2(Index n, double a, double b) {
  const MatrixXd d1 = cheb_diff1(n, a, b);
  return d1 * d1;
}

/// [T_0(x), ..., T_{n_max}(x)] by the three-term recurrence.
inline VectorXd cheb_poly_eval(Index n_max, double x) {
  detail::require(n_max >= 0, "cheb_poly_eval: n_max must be >= 0");
  VectorXd t(n_max + 1);
  t[0] = 1.0;
  if (n_max >= 1) t[1] = x;
  for (Index k = 1; k < n_max; ++k) t[k + 1] = 2.0 * x * t[k] - t[k - 1];
  return t;
}

/// Coefficients of the tensor-product Chebyshev interpolant, in TT-format.
struct ChebCoeffs {
  TTTensor tensor;
  ChebGrid grid;
};

namespace detail {

/// DCT-I of every column via the FFT of its even extension: for each column g
/// of length N, returns the first N entries of Re(fft([g, g(N-2:1)])) with the
/// ends halved, divided by N - 1.
inline MatrixXd cheb_transform_columns(const MatrixXd& g) {
  const Index n = g.rows();
  const Index m = 2 * n - 2;
  Eigen::FFT<double> fft;
  std::vector<double> ext(static_cast<std::size_t>(m));
  std::vector<std::complex<double>> spec;
  MatrixXd out(n, g.cols());
  for (Index c = 0; c < g.cols(); ++c) {
    for (Index i = 0; i < n; ++i) ext[static_cast<std::size_t>(i)] = g(i, c);
    for (Index i = n; i < m; ++i) ext[static_cast<std::size_t>(i)] = g(m - i, c);
    fft.fwd(spec, ext);
    for (Index i = 0; i < n; ++i) out(i, c) = spec[static_cast<std::size_t>(i)].real();
    out(0, c) /= 2.0;
    out(n - 1, c) /= 2.0;
  }
  return out / static_cast<double>(n - 1);
}

}  // namespace detail

/// Interpolation coefficients of a nodal TT-tensor: every core fiber along the
/// mode index is mapped to Chebyshev coefficients, then the result is rounded.
inline ChebCoeffs interp_coeffs(const TTTensor& nodal, const ChebGrid& grid, double eps) {
  if (nodal.mode_sizes() != grid.sizes())
    throw std::invalid_argument("interp_coeffs: tensor mode sizes differ from grid sizes");
  std::vector<TTCore> cores;
  for (const TTCore& c : nodal.cores()) {
    detail::require(c.mode_size() >= 2, "interp_coeffs: every mode needs at least 2 nodes");
    const Index r0 = c.left_rank();
    const Index n = c.mode_size();
    const Index r1 = c.right_rank();
    // Columns are the (a, b) rank pairs, rows the mode index.
    MatrixXd fibers(n, r0 * r1);
    for (Index b = 0; b < r1; ++b)
      for (Index a = 0; a < r0; ++a)
        for (Index i = 0; i < n; ++i) fibers(i, a + r0 * b) = c(a, i, b);
    const MatrixXd coef = detail::cheb_transform_columns(fibers);
    TTCore out(r0, n, r1);
    for (Index b = 0; b < r1; ++b)
      for (Index a = 0; a < r0; ++a)
        for (Index i = 0; i < n; ++i) out(a, i, b) = coef(i, a + r0 * b);
    cores.push_back(std::move(out));
  }
  return ChebCoeffs{tt_round(TTTensor(std::move(cores)), eps), grid};
}

/// Values of the interpolant at P points (rows of a P x d matrix). Points
/// must lie in the grid's closed box; there is no extrapolation.
inline VectorXd interp_eval(const ChebCoeffs& coeffs, const MatrixXd& points) {
  const ChebGrid& grid = coeffs.grid;
  const Index d = grid.dims();
  if (points.cols() != d) throw std::invalid_argument("interp_eval: points have the wrong dimension");
  const Index p_count = points.rows();

  MatrixXd cur = MatrixXd::Ones(p_count, 1);
  for (Index k = 0; k < d; ++k) {
    const TTCore& c = coeffs.tensor.core(k);
    const Index n = c.mode_size();
    const Index r0 = c.left_rank();
    const Index r1 = c.right_rank();
    const Interval& box = grid.bounds(k);
    const double slack = 1e-12 * box.width();

    MatrixXd tvals(p_count, n);
    for (Index p = 0; p < p_count; ++p) {
      const double x = points(p, k);
      if (!(x >= box.lo - slack && x <= box.hi + slack))
        throw std::domain_error("interp_eval: point coordinate " + std::to_string(x) + " in dimension " +
                                std::to_string(k) + " lies outside [" + std::to_string(box.lo) + ", " +
                                std::to_string(box.hi) + "]");
      const double ref = std::clamp(grid.to_reference(k, x), -1.0, 1.0);
      tvals(p, 0) = 1.0;
      if (n > 1) tvals(p, 1) = ref;
      for (Index j = 1; j + 1 < n; ++j) tvals(p, j + 1) = 2.0 * ref * tvals(p, j) - tvals(p, j - 1);
    }

    MatrixXd perm(n, r0 * r1);
    for (Index b = 0; b < r1; ++b)
      for (Index a = 0; a < r0; ++a)
        for (Index i = 0; i < n; ++i) perm(i, a + r0 * b) = c(a, i, b);
    const MatrixXd contracted = tvals * perm;  // P x (r0 * r1)

    MatrixXd next = MatrixXd::Zero(p_count, r1);
    for (Index b = 0; b < r1; ++b)
      for (Index a = 0; a < r0; ++a) next.col(b).array() += cur.col(a).array() * contracted.col(a + r0 * b).array();
    cur = std::move(next);
  }
  return cur.col(0);
}

/// Clenshaw-Curtis weights on cheb_nodes(n, a, b).
inline VectorXd cc_weights(Index n, double a, double b) {
  detail::require(n >= 2, "cc_weights: need at least 2 nodes");
  detail::require(a < b, "cc_weights: need a < b");
  const Index deg = n - 1;
  VectorXd w = VectorXd::Zero(n);
  VectorXd v = VectorXd::Ones(std::max<Index>(deg - 1, 0));
  const double dd = static_cast<double>(deg);
  auto theta = [&](Index i) { return std::numbers::pi * static_cast<double>(i) / dd; };
  if (deg % 2 == 0) {
    w[0] = w[deg] = 1.0 / (dd * dd - 1.0);
    for (Index k = 1; k < deg / 2; ++k)
      for (Index i = 1; i < deg; ++i)
        v[i - 1] -= 2.0 * std::cos(2.0 * static_cast<double>(k) * theta(i)) / (4.0 * static_cast<double>(k * k) - 1.0);
    for (Index i = 1; i < deg; ++i) v[i - 1] -= std::cos(dd * theta(i)) / (dd * dd - 1.0);
  } else {
    w[0] = w[deg] = 1.0 / (dd * dd);
    for (Index k = 1; k <= (deg - 1) / 2; ++k)
      for (Index i = 1; i < deg; ++i)
        v[i - 1] -= 2.0 * std::cos(2.0 * static_cast<double>(k) * theta(i)) / (4.0 * static_cast<double>(k * k) - 1.0);
  }
  for (Index i = 1; i < deg; ++i) w[i] = 2.0 * v[i - 1] / dd;
  return w * ((b - a) / 2.0);
}

/// Tensor-product Clenshaw-Curtis integral of a nodal TT-tensor.
inline double tt_integrate(const TTTensor& t, const ChebGrid& grid) {
  if (t.mode_sizes() != grid.sizes()) throw std::invalid_argument("tt_integrate: tensor does not match grid");
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
  for (Index k = 0; k < t.dims(); ++k) {
    const TTCore& c = t.core(k);
    const VectorXd w = cc_weights(c.mode_size(), grid.bounds(k).lo, grid.bounds(k).hi);
    MatrixXd m = MatrixXd::Zero(c.left_rank(), c.right_rank());
    for (Index i = 0; i < c.mode_size(); ++i) m += w[i] * c.slice(i);
    v = v * m;
  }
  return v(0);
}

}  // namespace fpcross
