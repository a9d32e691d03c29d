#pragma once

// Rank-adaptive TT cross approximation driven by a batched black-box oracle.
//
// The iterate is rebuilt by alternating left-to-right and right-to-left
// sweeps. At each bond the oracle is sampled on the cross of the current left
// and right index sets, the sampled fiber is truncated by SVD, enriched with
// `kick_rank` random directions, orthogonalized, and the next index set is
// chosen by maxvol. Cores are stored in interpolating form Q * inv(Q[I]).

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "fpcross/error.hpp"
#include "fpcross/grid.hpp"
#include "fpcross/maxvol.hpp"
#include "fpcross/tt.hpp"

namespace fpcross {

/// Rows are 0-based multi-indices into the target tensor.
using IndexBatch = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Maps a batch of multi-indices to tensor entries (one per row).
using BatchOracle = std::function<VectorXd(const IndexBatch&)>;

/// Maps a P x d matrix of points to P values.
using PointOracle = std::function<VectorXd(const MatrixXd&)>;

struct CrossConfig {
  double eps_ca = 1e-6;
  /// Relative SVD cutoff when compressing sampled fibers; 0 means eps_ca.
  double fiber_eps = 0.0;
  Index max_sweeps = 50;
  Index kick_rank = 2;
  double maxvol_delta = 0.01;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(eps_ca > 0.0, "CrossConfig: eps_ca must be positive");
    detail::require(fiber_eps >= 0.0, "CrossConfig: fiber_eps must be nonnegative");
    detail::require(max_sweeps >= 1, "CrossConfig: max_sweeps must be >= 1");
    detail::require(kick_rank >= 1, "CrossConfig: kick_rank must be >= 1");
    detail::require(maxvol_delta >= 0.0, "CrossConfig: maxvol_delta must be nonnegative");
  }
};

struct CrossResult {
  TTTensor tensor;
  bool converged = false;
  Index half_sweeps = 0;      ///< number of one-directional sweeps performed
  Index evaluations = 0;      ///< distinct oracle evaluations
  double last_change = std::numeric_limits<double>::infinity();
};

namespace detail {

class CrossEngine {
public:
  using IndexSet = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  CrossEngine(const BatchOracle& oracle, std::vector<Index> sizes, const CrossConfig& cfg)
      : oracle_(oracle), sizes_(std::move(sizes)), d_(static_cast<Index>(sizes_.size())), cfg_(cfg),
        rng_(cfg.seed), left_(static_cast<std::size_t>(d_ + 1)), right_(static_cast<std::size_t>(d_ + 1)) {
    long double total = 1.0L;
    for (Index n : sizes_) total *= static_cast<long double>(n);
    cacheable_ = total < 0x1.0p63L;
    left_[0] = IndexSet(1, 0);
    right_[static_cast<std::size_t>(d_)] = IndexSet(1, 0);
    trunc_tol_ = (cfg_.fiber_eps > 0.0 ? cfg_.fiber_eps : cfg_.eps_ca) / std::sqrt(static_cast<double>(std::max<Index>(d_ - 1, 1)));
  }

  Index evaluations() const { return evaluations_; }

  /// Every entry, for d = 1 where no compression is possible.
  TTTensor dense_1d() {
    IndexSet empty(1, 0);
    return TTTensor({fiber(empty, 0, empty)});
  }

  /// Right index sets from a right-to-left QR/maxvol pass over the guess.
  void init_from_guess(const TTTensor& guess) {
    std::vector<TTCore> cores = guess.cores();
    for (Index k = d_ - 1; k >= 1; --k) {
      const TTCore& c = cores[static_cast<std::size_t>(k)];
      ThinQR f = thin_qr(c.right().transpose());
      const std::vector<Index> sel = maxvol(f.q, cfg_.maxvol_delta);
      MatrixXd sub = rows_of(f.q, sel);
      MatrixXd r_hat = sub * f.r;
      set_right(k, sel, c.mode_size());
      const TTCore& p = cores[static_cast<std::size_t>(k - 1)];
      MatrixXd left = p.left() * r_hat.transpose();
      cores[static_cast<std::size_t>(k - 1)] = TTCore::from_left_unfolding(left, p.left_rank(), p.mode_size());
    }
  }

  TTTensor sweep_left_to_right() {
    std::vector<TTCore> cores;
    for (Index k = 0; k + 1 < d_; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      TTCore f = fiber(left_[ks], k, right_[ks + 1]);
      const Index cap = std::min(f.left_rank() * f.mode_size(), product(k + 1, d_));
      auto [interp, sel] = select(f.left(), cap);
      cores.push_back(TTCore::from_left_unfolding(interp, f.left_rank(), f.mode_size()));
      IndexSet next(static_cast<Index>(sel.size()), k + 1);
      for (std::size_t s = 0; s < sel.size(); ++s) {
        const Index i = sel[s] % f.left_rank();
        const Index n = sel[s] / f.left_rank();
        next.row(static_cast<Index>(s)).head(k) = left_[ks].row(i);
        next(static_cast<Index>(s), k) = n;
      }
      left_[ks + 1] = std::move(next);
    }
    cores.push_back(fiber(left_[static_cast<std::size_t>(d_ - 1)], d_ - 1, right_[static_cast<std::size_t>(d_)]));
    return TTTensor(std::move(cores));
  }

  TTTensor sweep_right_to_left() {
    std::vector<TTCore> cores(static_cast<std::size_t>(d_));
    for (Index k = d_ - 1; k >= 1; --k) {
      const auto ks = static_cast<std::size_t>(k);
      TTCore f = fiber(left_[ks], k, right_[ks + 1]);
      const Index cap = std::min(f.mode_size() * f.right_rank(), product(0, k));
      auto [interp, sel] = select(f.right().transpose(), cap);
      cores[ks] = TTCore::from_right_unfolding(interp.transpose(), f.mode_size(), f.right_rank());
      set_right(k, sel, f.mode_size());
    }
    cores[0] = fiber(left_[0], 0, right_[1]);
    return TTTensor(std::move(cores));
  }

private:
  static MatrixXd rows_of(const MatrixXd& m, const std::vector<Index>& sel) {
    MatrixXd out(static_cast<Index>(sel.size()), m.cols());
    for (std::size_t s = 0; s < sel.size(); ++s) out.row(static_cast<Index>(s)) = m.row(sel[s]);
    return out;
  }

  Index product(Index from, Index to) const {
    Index p = 1;
    for (Index k = from; k < to; ++k) {
      const Index n = sizes_[static_cast<std::size_t>(k)];
      if (p > std::numeric_limits<Index>::max() / n) return std::numeric_limits<Index>::max();
      p *= n;
    }
    return p;
  }

  // Row s of the transposed right unfolding is (n, j) with s = n + N_k * j.
  void set_right(Index k, const std::vector<Index>& sel, Index n_k) {
    const auto ks = static_cast<std::size_t>(k);
    const IndexSet& nxt = right_[ks + 1];
    IndexSet cur(static_cast<Index>(sel.size()), d_ - k);
    for (std::size_t s = 0; s < sel.size(); ++s) {
      const Index n = sel[s] % n_k;
      const Index j = sel[s] / n_k;
      cur(static_cast<Index>(s), 0) = n;
      cur.row(static_cast<Index>(s)).tail(d_ - k - 1) = nxt.row(j);
    }
    right_[ks] = std::move(cur);
  }

  double uniform_pm1() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-52 - 1.0; }

  /// Truncated-SVD basis of `f`, enriched by random directions, orthogonalized,
  /// then turned into interpolating form on maxvol rows.
  std::pair<MatrixXd, std::vector<Index>> select(const MatrixXd& f, Index cap) {
    Eigen::BDCSVD<MatrixXd> svd(f, Eigen::ComputeThinU);
    const VectorXd& s = svd.singularValues();
    Index r = truncation_rank(s, trunc_tol_ * s.norm());
    r = std::min(r, cap);
    const Index kick = std::max<Index>(0, std::min({cfg_.kick_rank, cap - r, f.rows() - r}));
    MatrixXd basis(f.rows(), r + kick);
    basis.leftCols(r) = svd.matrixU().leftCols(r);
    for (Index j = r; j < r + kick; ++j)
      for (Index i = 0; i < f.rows(); ++i) basis(i, j) = uniform_pm1();
    MatrixXd q = thin_qr(basis).q;
    std::vector<Index> sel = maxvol(q, cfg_.maxvol_delta);
    MatrixXd sub = rows_of(q, sel);
    MatrixXd interp = sub.transpose().partialPivLu().solve(q.transpose()).transpose();
    return {std::move(interp), std::move(sel)};
  }

  std::uint64_t key(const Index* idx) const {
    std::uint64_t lin = 0;
    for (Index k = 0; k < d_; ++k)
      lin = lin * static_cast<std::uint64_t>(sizes_[static_cast<std::size_t>(k)]) + static_cast<std::uint64_t>(idx[k]);
    return lin;
  }

  /// Oracle samples on left x {all n_k} x right, laid out as a TT-core.
  TTCore fiber(const IndexSet& left, Index k, const IndexSet& right) {
    const Index r0 = left.rows();
    const Index n = sizes_[static_cast<std::size_t>(k)];
    const Index r1 = right.rows();
    const Index count = r0 * n * r1;
    IndexBatch all(count, d_);
    for (Index b = 0; b < r1; ++b)
      for (Index i = 0; i < n; ++i)
        for (Index a = 0; a < r0; ++a) {
          const Index row = a + r0 * (i + n * b);
          all.row(row).head(k) = left.row(a);
          all(row, k) = i;
          all.row(row).tail(d_ - k - 1) = right.row(b);
        }

    TTCore out(r0, n, r1);
    std::vector<Index> missing;
    std::vector<std::uint64_t> keys;
    if (cacheable_) {
      keys.resize(static_cast<std::size_t>(count));
      std::unordered_map<std::uint64_t, Index> pending;
      for (Index row = 0; row < count; ++row) {
        const std::uint64_t key_row = key(all.row(row).data());
        keys[static_cast<std::size_t>(row)] = key_row;
        if (!cache_.contains(key_row) && pending.emplace(key_row, row).second) missing.push_back(row);
      }
    } else {
      for (Index row = 0; row < count; ++row) missing.push_back(row);
    }

    VectorXd values;
    if (!missing.empty()) {
      IndexBatch batch(static_cast<Index>(missing.size()), d_);
      for (std::size_t m = 0; m < missing.size(); ++m) batch.row(static_cast<Index>(m)) = all.row(missing[m]);
      values = oracle_(batch);
      if (values.size() != batch.rows())
        throw std::runtime_error("cross_approximate: oracle returned the wrong number of values");
      evaluations_ += batch.rows();
      for (Index m = 0; m < batch.rows(); ++m) {
        if (!std::isfinite(values[m])) {
          std::vector<std::int64_t> bad(batch.row(m).data(), batch.row(m).data() + d_);
          throw NonFiniteError("cross_approximate: oracle returned a nonfinite value", std::move(bad));
        }
      }
    }

    if (cacheable_) {
      for (std::size_t m = 0; m < missing.size(); ++m)
        cache_.emplace(keys[static_cast<std::size_t>(missing[m])], values[static_cast<Index>(m)]);
      for (Index row = 0; row < count; ++row) out.data()[row] = cache_.at(keys[static_cast<std::size_t>(row)]);
    } else {
      out.data() = values;
    }
    return out;
  }

  const BatchOracle& oracle_;
  std::vector<Index> sizes_;
  Index d_;
  CrossConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<IndexSet> left_;
  std::vector<IndexSet> right_;
  std::unordered_map<std::uint64_t, double> cache_;
  bool cacheable_ = true;
  double trunc_tol_ = 0.0;
  Index evaluations_ = 0;
};

}  // namespace detail

/// Builds a TT approximation of the tensor whose entries `oracle` returns.
///
/// Sweeps alternate direction until the relative Frobenius change between
/// consecutive iterates is <= eps_ca or 2 * max_sweeps half-sweeps have run.
/// On non-convergence the last iterate is returned with `converged == false`.
inline CrossResult cross_approximate(const BatchOracle& oracle, const TTTensor& guess, const CrossConfig& cfg) {
  cfg.validate();
  detail::check_finite(guess);
  detail::CrossEngine engine(oracle, guess.mode_sizes(), cfg);

  CrossResult res;
  if (guess.dims() == 1) {
    res.tensor = engine.dense_1d();
    res.converged = true;
    res.half_sweeps = 1;
    res.last_change = 0.0;
    res.evaluations = engine.evaluations();
    return res;
  }

  engine.init_from_guess(guess);
  std::optional<TTTensor> prev;
  for (Index it = 0; it < 2 * cfg.max_sweeps; ++it) {
    TTTensor cur = it % 2 == 0 ? engine.sweep_left_to_right() : engine.sweep_right_to_left();
    res.half_sweeps = it + 1;
    if (prev) {
      const double norm = tt_norm(cur);
      const double diff = tt_norm(tt_sub(cur, *prev));
      res.last_change = norm > 0.0 ? diff / norm : diff;
    }
    prev = std::move(cur);
    if (res.last_change <= cfg.eps_ca) {
      res.converged = true;
      break;
    }
  }
  res.tensor = std::move(*prev);
  res.evaluations = engine.evaluations();
  return res;
}

/// Cross approximation of a function sampled on the nodes of a Chebyshev grid.
inline CrossResult cross_on_cheb_grid(const PointOracle& point_func, const ChebGrid& grid, const TTTensor& guess,
                                      const CrossConfig& cfg) {
  if (guess.mode_sizes() != grid.sizes())
    throw std::invalid_argument("cross_on_cheb_grid: guess mode sizes differ from grid sizes");
  BatchOracle by_index = [&](const IndexBatch& idx) -> VectorXd { return point_func(grid.points(idx)); };
  return cross_approximate(by_index, guess, cfg);
}

}  // namespace fpcross
