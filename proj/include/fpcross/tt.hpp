#pragma once

// Tensor-train (TT) representation: cores, dense conversion, compression,
// rounding and the handful of linear operations the solver needs.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fpcross/error.hpp"

namespace fpcross {

using Index = Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Three-way TT-core of shape (left_rank, mode_size, right_rank).
///
/// Storage is column-major with the left rank fastest, then the mode index,
/// then the right rank. Both the left unfolding (r0*n x r1) and the right
/// unfolding (r0 x n*r1) are therefore plain column-major views of the data.
class TTCore {
public:
  using ConstMap = Eigen::Map<const MatrixXd>;
  using ConstSlice = Eigen::Map<const MatrixXd, 0, Eigen::OuterStride<>>;

  TTCore() = default;

  TTCore(Index left_rank, Index mode_size, Index right_rank)
      : r0_(left_rank), n_(mode_size), r1_(right_rank),
        data_(VectorXd::Zero(left_rank * mode_size * right_rank)) {
    check_shape();
  }

  TTCore(Index left_rank, Index mode_size, Index right_rank, VectorXd data)
      : r0_(left_rank), n_(mode_size), r1_(right_rank), data_(std::move(data)) {
    check_shape();
    detail::require(data_.size() == r0_ * n_ * r1_, "TTCore: data size does not match shape");
  }

  static TTCore from_left_unfolding(const MatrixXd& m, Index left_rank, Index mode_size) {
    detail::require(m.rows() == left_rank * mode_size, "TTCore: bad left unfolding");
    return TTCore(left_rank, mode_size, m.cols(), Eigen::Map<const VectorXd>(m.data(), m.size()));
  }

  static TTCore from_right_unfolding(const MatrixXd& m, Index mode_size, Index right_rank) {
    detail::require(m.cols() == mode_size * right_rank, "TTCore: bad right unfolding");
    return TTCore(m.rows(), mode_size, right_rank, Eigen::Map<const VectorXd>(m.data(), m.size()));
  }

  Index left_rank() const noexcept { return r0_; }
  Index mode_size() const noexcept { return n_; }
  Index right_rank() const noexcept { return r1_; }
  Index size() const noexcept { return data_.size(); }

  double operator()(Index a, Index i, Index b) const { return data_[a + r0_ * (i + n_ * b)]; }
  double& operator()(Index a, Index i, Index b) { return data_[a + r0_ * (i + n_ * b)]; }

  ConstMap left() const { return ConstMap(data_.data(), r0_ * n_, r1_); }
  ConstMap right() const { return ConstMap(data_.data(), r0_, n_ * r1_); }

  /// The r0 x r1 matrix G(i) for a fixed mode index.
  ConstSlice slice(Index i) const {
    return ConstSlice(data_.data() + r0_ * i, r0_, r1_, Eigen::OuterStride<>(r0_ * n_));
  }

  const VectorXd& data() const noexcept { return data_; }
  VectorXd& data() noexcept { return data_; }

  friend bool operator==(const TTCore& a, const TTCore& b) {
    return a.r0_ == b.r0_ && a.n_ == b.n_ && a.r1_ == b.r1_ && a.data_ == b.data_;
  }

private:
  void check_shape() const {
    detail::require(r0_ >= 1 && n_ >= 1 && r1_ >= 1, "TTCore: all dimensions must be >= 1");
  }

  Index r0_ = 1;
  Index n_ = 1;
  Index r1_ = 1;
  VectorXd data_ = VectorXd::Zero(1);
};

/// d-dimensional tensor stored as a chain of TT-cores with R_0 = R_d = 1.
class TTTensor {
public:
  TTTensor() = default;

  explicit TTTensor(std::vector<TTCore> cores) : cores_(std::move(cores)) {
    detail::require(!cores_.empty(), "TTTensor: at least one core is required");
    detail::require(cores_.front().left_rank() == 1, "TTTensor: R_0 must be 1");
    detail::require(cores_.back().right_rank() == 1, "TTTensor: R_d must be 1");
    for (std::size_t k = 1; k < cores_.size(); ++k)
      detail::require(cores_[k - 1].right_rank() == cores_[k].left_rank(),
                      "TTTensor: adjacent core ranks do not match");
  }

  Index dims() const noexcept { return static_cast<Index>(cores_.size()); }
  const TTCore& core(Index k) const { return cores_.at(static_cast<std::size_t>(k)); }
  const std::vector<TTCore>& cores() const noexcept { return cores_; }

  std::vector<Index> mode_sizes() const {
    std::vector<Index> n;
    n.reserve(cores_.size());
    for (const auto& c : cores_) n.push_back(c.mode_size());
    return n;
  }

  /// R_0 .. R_d.
  std::vector<Index> ranks() const {
    std::vector<Index> r{1};
    for (const auto& c : cores_) r.push_back(c.right_rank());
    return r;
  }

  Index max_rank() const {
    const auto r = ranks();
    return *std::max_element(r.begin(), r.end());
  }

  Index parameter_count() const {
    Index p = 0;
    for (const auto& c : cores_) p += c.size();
    return p;
  }

  friend bool operator==(const TTTensor& a, const TTTensor& b) { return a.cores_ == b.cores_; }

private:
  std::vector<TTCore> cores_;
};

/// Dense tensor with big-endian linearization: the last index runs fastest.
struct FullTensor {
  std::vector<Index> mode_sizes;
  std::vector<double> data;

  FullTensor() = default;

  explicit FullTensor(std::vector<Index> sizes) : mode_sizes(std::move(sizes)) {
    data.assign(static_cast<std::size_t>(element_count(mode_sizes)), 0.0);
  }

  FullTensor(std::vector<Index> sizes, std::vector<double> values)
      : mode_sizes(std::move(sizes)), data(std::move(values)) {
    detail::require(static_cast<Index>(data.size()) == element_count(mode_sizes),
                    "FullTensor: data size does not match mode sizes");
  }

  static Index element_count(const std::vector<Index>& sizes) {
    Index total = 1;
    for (Index n : sizes) {
      detail::require(n >= 1, "FullTensor: mode sizes must be >= 1");
      if (total > std::numeric_limits<Index>::max() / n)
        throw std::length_error("FullTensor: element count overflows");
      total *= n;
    }
    return total;
  }

  Index dims() const { return static_cast<Index>(mode_sizes.size()); }
  Index size() const { return static_cast<Index>(data.size()); }

  Index linear_index(std::span<const Index> idx) const {
    detail::require(idx.size() == mode_sizes.size(), "FullTensor: index has wrong length");
    Index lin = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= mode_sizes[k]) throw std::out_of_range("FullTensor: index out of range");
      lin = lin * mode_sizes[k] + idx[k];
    }
    return lin;
  }

  double operator()(std::span<const Index> idx) const {
    return data[static_cast<std::size_t>(linear_index(idx))];
  }

  double norm() const { return Eigen::Map<const VectorXd>(data.data(), size()).norm(); }
};

namespace detail {

/// Smallest rank whose discarded singular-value tail has 2-norm <= delta.
inline Index truncation_rank(const VectorXd& s, double delta) {
  Index r = s.size();
  double tail2 = 0.0;
  const double budget = delta * delta;
  while (r > 1 && tail2 + s[r - 1] * s[r - 1] <= budget) {
    tail2 += s[r - 1] * s[r - 1];
    --r;
  }
  return std::max<Index>(r, 1);
}

struct ThinQR {
  MatrixXd q;
  MatrixXd r;
};

inline ThinQR thin_qr(const MatrixXd& m) {
  const Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<MatrixXd> qr(m);
  ThinQR out;
  out.q = qr.householderQ() * MatrixXd::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

/// Right-to-left QR sweep; cores 1..d-1 end up with orthonormal rows in
/// their right unfoldings and the whole norm is carried by core 0.
inline void right_orthogonalize(std::vector<TTCore>& cores) {
  for (std::size_t k = cores.size() - 1; k >= 1; --k) {
    const TTCore& c = cores[k];
    ThinQR f = thin_qr(c.right().transpose());
    cores[k] = TTCore::from_right_unfolding(f.q.transpose(), c.mode_size(), c.right_rank());
    const TTCore& p = cores[k - 1];
    MatrixXd left = p.left() * f.r.transpose();
    cores[k - 1] = TTCore::from_left_unfolding(left, p.left_rank(), p.mode_size());
  }
}

inline void check_finite(const TTTensor& t) {
  for (const auto& c : t.cores())
    if (!c.data().allFinite()) throw NonFiniteError("TTTensor contains nonfinite entries");
}

}  // namespace detail

/// TT-SVD compression of a dense tensor. Each of the d-1 unfoldings is
/// truncated with budget eps/sqrt(d-1) * ||t||_F so the total error stays
/// within eps * ||t||_F.
inline TTTensor tt_from_full(const FullTensor& t, double eps) {
  const Index d = t.dims();
  detail::require(d >= 1, "tt_from_full: tensor must have at least one mode");
  detail::require(eps > 0.0, "tt_from_full: eps must be positive");
  for (double v : t.data)
    if (!std::isfinite(v)) throw NonFiniteError("tt_from_full: tensor has nonfinite entries");

  const Index total = t.size();
  const double delta = d > 1 ? eps * t.norm() / std::sqrt(static_cast<double>(d - 1)) : 0.0;

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  MatrixXd c = Eigen::Map<const RowMajor>(t.data.data(), t.mode_sizes[0], total / t.mode_sizes[0]);

  std::vector<TTCore> cores;
  Index r_prev = 1;
  Index rest = total / t.mode_sizes[0];
  for (Index k = 0; k + 1 < d; ++k) {
    const Index n = t.mode_sizes[static_cast<std::size_t>(k)];
    Eigen::BDCSVD<MatrixXd> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index r = detail::truncation_rank(svd.singularValues(), delta);
    cores.push_back(TTCore::from_left_unfolding(svd.matrixU().leftCols(r), r_prev, n));

    MatrixXd sv = svd.singularValues().head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    const Index n_next = t.mode_sizes[static_cast<std::size_t>(k + 1)];
    const Index rest_next = rest / n_next;
    MatrixXd next(r * n_next, rest_next);
    for (Index i = 0; i < n_next; ++i)
      for (Index tail = 0; tail < rest_next; ++tail)
        for (Index b = 0; b < r; ++b) next(b + r * i, tail) = sv(b, i * rest_next + tail);
    c = std::move(next);
    rest = rest_next;
    r_prev = r;
  }
  cores.push_back(TTCore::from_left_unfolding(c, r_prev, t.mode_sizes.back()));
  return TTTensor(std::move(cores));
}

/// Dense reconstruction. Refuses tensors with more than `max_elements` entries.
inline FullTensor tt_to_full(const TTTensor& t, Index max_elements = Index{1} << 28) {
  const auto sizes = t.mode_sizes();
  Index total = 0;
  try {
    total = FullTensor::element_count(sizes);
  } catch (const std::length_error&) {
    throw std::length_error("tt_to_full: dense size overflows the index type");
  }
  if (total > max_elements)
    throw std::length_error("tt_to_full: dense size " + std::to_string(total) +
                            " exceeds the limit of " + std::to_string(max_elements) + " elements");

  MatrixXd cur = MatrixXd::Ones(1, 1);
  for (const auto& c : t.cores()) {
    MatrixXd next(cur.rows() * c.mode_size(), c.right_rank());
    for (Index i = 0; i < c.mode_size(); ++i) {
      MatrixXd part = cur * c.slice(i);
      for (Index row = 0; row < cur.rows(); ++row) next.row(row * c.mode_size() + i) = part.row(row);
    }
    cur = std::move(next);
  }
  return FullTensor(sizes, std::vector<double>(cur.data(), cur.data() + cur.size()));
}

/// Single entry G_1(n_1) G_2(n_2) ... G_d(n_d). Indices are 0-based.
inline double tt_element(const TTTensor& t, std::span<const Index> idx) {
  if (static_cast<Index>(idx.size()) != t.dims())
    throw std::out_of_range("tt_element: index length differs from tensor dimension");
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
  for (Index k = 0; k < t.dims(); ++k) {
    const TTCore& c = t.core(k);
    const Index n = idx[static_cast<std::size_t>(k)];
    if (n < 0 || n >= c.mode_size()) throw std::out_of_range("tt_element: index out of range");
    v = v * c.slice(n);
  }
  return v(0);
}

inline double tt_element(const TTTensor& t, std::initializer_list<Index> idx) {
  return tt_element(t, std::span<const Index>(idx.begin(), idx.size()));
}

/// Recompression to relative accuracy eps: right-to-left orthogonalization
/// followed by a left-to-right truncated-SVD sweep. Ranks never grow.
inline TTTensor tt_round(const TTTensor& t, double eps) {
  detail::require(eps > 0.0, "tt_round: eps must be positive");
  const Index d = t.dims();
  if (d == 1) return t;

  std::vector<TTCore> cores = t.cores();
  detail::right_orthogonalize(cores);
  const double norm = cores[0].data().norm();
  const double delta = eps * norm / std::sqrt(static_cast<double>(d - 1));

  for (Index k = 0; k + 1 < d; ++k) {
    const TTCore& c = cores[static_cast<std::size_t>(k)];
    Eigen::BDCSVD<MatrixXd> svd(c.left(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index r = detail::truncation_rank(svd.singularValues(), delta);
    MatrixXd u = svd.matrixU().leftCols(r);
    MatrixXd sv = svd.singularValues().head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    const Index r0 = c.left_rank();
    const Index n = c.mode_size();
    cores[static_cast<std::size_t>(k)] = TTCore::from_left_unfolding(u, r0, n);
    const TTCore& nx = cores[static_cast<std::size_t>(k + 1)];
    MatrixXd right = sv * nx.right();
    cores[static_cast<std::size_t>(k + 1)] = TTCore::from_right_unfolding(right, nx.mode_size(), nx.right_rank());
  }
  return TTTensor(std::move(cores));
}

/// Rank-1 tensor whose factors are iid uniform on the open interval (0, 1).
/// Uses mt19937_64 with an explicit mantissa mapping so that the values are
/// reproducible across standard libraries.
inline TTTensor tt_rank1_random(std::span<const Index> mode_sizes, std::uint64_t seed) {
  detail::require(!mode_sizes.empty(), "tt_rank1_random: need at least one mode");
  std::mt19937_64 gen(seed);
  std::vector<TTCore> cores;
  for (Index n : mode_sizes) {
    detail::require(n >= 1, "tt_rank1_random: mode sizes must be >= 1");
    TTCore c(1, n, 1);
    for (Index i = 0; i < n; ++i) c(0, i, 0) = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
    cores.push_back(std::move(c));
  }
  return TTTensor(std::move(cores));
}

inline TTTensor tt_rank1_random(const std::vector<Index>& mode_sizes, std::uint64_t seed) {
  return tt_rank1_random(std::span<const Index>(mode_sizes), seed);
}

/// Action of mats[0] (x) mats[1] (x) ... (x) mats[d-1] on vec(t). Contracts
/// the middle index of every core with its matrix; ranks are unchanged.
inline TTTensor tt_apply_mode_matrices(const TTTensor& t, std::span<const MatrixXd> mats) {
  if (static_cast<Index>(mats.size()) != t.dims())
    throw std::invalid_argument("tt_apply_mode_matrices: need one matrix per mode");
  std::vector<TTCore> cores;
  cores.reserve(mats.size());
  for (Index k = 0; k < t.dims(); ++k) {
    const TTCore& c = t.core(k);
    const MatrixXd& z = mats[static_cast<std::size_t>(k)];
    if (z.rows() != c.mode_size() || z.cols() != c.mode_size())
      throw std::invalid_argument("tt_apply_mode_matrices: matrix " + std::to_string(k) +
                                  " does not match mode size " + std::to_string(c.mode_size()));
    TTCore out(c.left_rank(), c.mode_size(), c.right_rank());
    const Index slab = c.left_rank() * c.mode_size();
    for (Index b = 0; b < c.right_rank(); ++b) {
      Eigen::Map<const MatrixXd> in(c.data().data() + b * slab, c.left_rank(), c.mode_size());
      Eigen::Map<MatrixXd> res(out.data().data() + b * slab, c.left_rank(), c.mode_size());
      res.noalias() = in * z.transpose();
    }
    cores.push_back(std::move(out));
  }
  return TTTensor(std::move(cores));
}

inline TTTensor tt_apply_mode_matrices(const TTTensor& t, const std::vector<MatrixXd>& mats) {
  return tt_apply_mode_matrices(t, std::span<const MatrixXd>(mats));
}

/// Frobenius norm via a left-to-right QR sweep (no densification, and no
/// cancellation when t is a difference of nearby tensors).
inline double tt_norm(const TTTensor& t) {
  MatrixXd carry = MatrixXd::Ones(1, 1);
  for (Index k = 0; k < t.dims(); ++k) {
    const TTCore& c = t.core(k);
    MatrixXd right = carry * c.right();
    if (k + 1 == t.dims()) return right.norm();
    Eigen::Map<const MatrixXd> left(right.data(), right.rows() * c.mode_size(), c.right_rank());
    carry = detail::thin_qr(left).r;
  }
  return carry.norm();
}

inline TTTensor tt_scale(const TTTensor& t, double alpha) {
  std::vector<TTCore> cores = t.cores();
  cores[0].data() *= alpha;
  return TTTensor(std::move(cores));
}

/// Exact sum with block-structured cores; ranks add.
inline TTTensor tt_add(const TTTensor& a, const TTTensor& b) {
  if (a.mode_sizes() != b.mode_sizes()) throw std::invalid_argument("tt_add: mode sizes differ");
  const Index d = a.dims();
  if (d == 1) return TTTensor({TTCore(1, a.core(0).mode_size(), 1, a.core(0).data() + b.core(0).data())});

  std::vector<TTCore> cores;
  for (Index k = 0; k < d; ++k) {
    const TTCore& x = a.core(k);
    const TTCore& y = b.core(k);
    const Index n = x.mode_size();
    const bool first = k == 0;
    const bool last = k + 1 == d;
    const Index r0 = first ? 1 : x.left_rank() + y.left_rank();
    const Index r1 = last ? 1 : x.right_rank() + y.right_rank();
    TTCore c(r0, n, r1);
    const Index a_off = first ? 0 : x.left_rank();
    const Index b_off = last ? 0 : x.right_rank();
    for (Index i = 0; i < n; ++i) {
      for (Index p = 0; p < x.left_rank(); ++p)
        for (Index q = 0; q < x.right_rank(); ++q) c(p, i, q) = x(p, i, q);
      for (Index p = 0; p < y.left_rank(); ++p)
        for (Index q = 0; q < y.right_rank(); ++q) c(p + a_off, i, q + b_off) = y(p, i, q);
    }
    cores.push_back(std::move(c));
  }
  return TTTensor(std::move(cores));
}

inline TTTensor tt_sub(const TTTensor& a, const TTTensor& b) { return tt_add(a, tt_scale(b, -1.0)); }

/// Relative distance ||a - b|| / ||ref||, with ref = b.
inline double tt_relative_error(const TTTensor& a, const TTTensor& b) {
  const double nb = tt_norm(b);
  const double diff = tt_norm(tt_sub(a, b));
  return nb > 0.0 ? diff / nb : diff;
}

/// Effective rank: the uniform rank r whose core storage
/// N_1 r + r^2 (N_2 + ... + N_{d-1}) + N_d r equals the actual storage.
inline double tt_erank(const TTTensor& t) {
  const Index d = t.dims();
  if (d == 1) return 1.0;
  const auto n = t.mode_sizes();
  const double params = static_cast<double>(t.parameter_count());
  const double b = static_cast<double>(n.front() + n.back());
  double a = 0.0;
  for (Index k = 1; k + 1 < d; ++k) a += static_cast<double>(n[static_cast<std::size_t>(k)]);
  if (a == 0.0) return params / b;
  return (-b + std::sqrt(b * b + 4.0 * a * params)) / (2.0 * a);
}

struct Extrema {
  double min = 0.0;
  double max = 0.0;
};

/// Smallest and largest entry, streamed over the last mode so that the dense
/// tensor is never held in memory at once.
inline Extrema tt_extrema(const TTTensor& t, Index max_elements = Index{1} << 31) {
  const auto sizes = t.mode_sizes();
  const Index total = FullTensor::element_count(sizes);
  if (total > max_elements)
    throw std::length_error("tt_extrema: tensor has " + std::to_string(total) + " elements");

  MatrixXd partial = MatrixXd::Ones(1, 1);
  for (Index k = 0; k + 1 < t.dims(); ++k) {
    const TTCore& c = t.core(k);
    MatrixXd next(partial.rows() * c.mode_size(), c.right_rank());
    for (Index i = 0; i < c.mode_size(); ++i) {
      MatrixXd part = partial * c.slice(i);
      for (Index row = 0; row < partial.rows(); ++row) next.row(row * c.mode_size() + i) = part.row(row);
    }
    partial = std::move(next);
  }
  const TTCore& last = t.core(t.dims() - 1);
  Extrema e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  constexpr Index chunk = 1 << 16;
  for (Index row = 0; row < partial.rows(); row += chunk) {
    const Index rows = std::min(chunk, partial.rows() - row);
    MatrixXd block = partial.middleRows(row, rows) * last.right();
    e.min = std::min(e.min, block.minCoeff());
    e.max = std::max(e.max, block.maxCoeff());
  }
  return e;
}

}  // namespace fpcross
