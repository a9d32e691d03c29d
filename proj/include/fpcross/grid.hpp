#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fpcross/error.hpp"

namespace fpcross {

using Index = Eigen::Index;

/// Closed interval [lo, hi] with lo < hi.
struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
};

/// Chebyshev extrema cos(pi * n / (N - 1)), n = 0..N-1, mapped affinely from
/// [-1, 1] to [a, b]. The first node is b and the last is a.
inline Eigen::VectorXd cheb_nodes(Index n, double a, double b) {
  detail::require(n >= 2, "cheb_nodes: need at least 2 nodes");
  detail::require(a < b, "cheb_nodes: need a < b");
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) {
    // Exact endpoints; symmetric nodes use sin for better cancellation.
    const double ref = i == 0 ? 1.0
                       : i == n - 1
                           ? -1.0
                           : std::sin(std::numbers::pi * static_cast<double>(n - 1 - 2 * i) /
                                      (2.0 * static_cast<double>(n - 1)));
    x[i] = a + (b - a) * (ref + 1.0) / 2.0;
  }
  return x;
}

/// Tensor-product Chebyshev grid over a box.
class ChebGrid {
public:
  ChebGrid() = default;

  ChebGrid(std::vector<Index> sizes, std::vector<Interval> bounds)
      : sizes_(std::move(sizes)), bounds_(std::move(bounds)) {
    detail::require(!sizes_.empty(), "ChebGrid: need at least one dimension");
    detail::require(sizes_.size() == bounds_.size(), "ChebGrid: sizes and bounds differ in length");
    for (std::size_t k = 0; k < sizes_.size(); ++k) {
      detail::require(sizes_[k] >= 2, "ChebGrid: every dimension needs at least 2 nodes");
      detail::require(bounds_[k].lo < bounds_[k].hi, "ChebGrid: bounds must satisfy lo < hi");
      nodes_.push_back(cheb_nodes(sizes_[k], bounds_[k].lo, bounds_[k].hi));
    }
  }

  static ChebGrid uniform(Index dims, Index n, Interval box) {
    return ChebGrid(std::vector<Index>(static_cast<std::size_t>(dims), n),
                    std::vector<Interval>(static_cast<std::size_t>(dims), box));
  }

  Index dims() const noexcept { return static_cast<Index>(sizes_.size()); }
  Index size(Index k) const { return sizes_.at(static_cast<std::size_t>(k)); }
  const std::vector<Index>& sizes() const noexcept { return sizes_; }
  const Interval& bounds(Index k) const { return bounds_.at(static_cast<std::size_t>(k)); }
  const std::vector<Interval>& bounds() const noexcept { return bounds_; }
  const Eigen::VectorXd& nodes(Index k) const { return nodes_.at(static_cast<std::size_t>(k)); }
  double node(Index k, Index n) const { return nodes(k)[n]; }

  double to_reference(Index k, double x) const {
    const Interval& b = bounds(k);
    return (2.0 * x - (b.lo + b.hi)) / (b.hi - b.lo);
  }

  bool contains(Index k, double x) const {
    const Interval& b = bounds(k);
    return x >= b.lo && x <= b.hi;
  }

  /// Physical coordinates (P x d) of a batch of 0-based multi-indices.
  template <typename Batch>
  Eigen::MatrixXd points(const Batch& idx) const {
    detail::require(idx.cols() == dims(), "ChebGrid::points: index batch has wrong width");
    Eigen::MatrixXd x(idx.rows(), dims());
    for (Index k = 0; k < dims(); ++k)
      for (Index p = 0; p < idx.rows(); ++p) x(p, k) = node(k, idx(p, k));
    return x;
  }

private:
  std::vector<Index> sizes_;
  std::vector<Interval> bounds_;
  std::vector<Eigen::VectorXd> nodes_;
};

}  // namespace fpcross
