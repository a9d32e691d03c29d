#pragma once

// Brute-force references shared by the test suites. Nothing here calls the
// library routine it is used to check.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "fpcross/tt.hpp"

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline Index element_count(const std::vector<Index>& sizes) {
  Index n = 1;
  for (Index s : sizes) n *= s;
  return n;
}

/// Big-endian multi-index of linear position `lin`: the last mode varies fastest.
inline std::vector<Index> unravel(Index lin, const std::vector<Index>& sizes) {
  std::vector<Index> idx(sizes.size());
  for (std::size_t k = sizes.size(); k-- > 0;) {
    idx[k] = lin % sizes[k];
    lin /= sizes[k];
  }
  return idx;
}

inline std::vector<std::vector<Index>> all_indices(const std::vector<Index>& sizes) {
  std::vector<std::vector<Index>> out;
  for (Index lin = 0; lin < element_count(sizes); ++lin) out.push_back(unravel(lin, sizes));
  return out;
}

/// Entry of a TT by the explicit sum over every rank index chain.
inline double entry_by_summation(const fpcross::TTTensor& t, const std::vector<Index>& idx) {
  const auto ranks = t.ranks();
  std::function<double(std::size_t, Index)> rec = [&](std::size_t k, Index a) -> double {
    if (k == idx.size()) return 1.0;
    double s = 0.0;
    for (Index b = 0; b < ranks[k + 1]; ++b) s += t.core(static_cast<Index>(k))(a, idx[k], b) * rec(k + 1, b);
    return s;
  };
  return rec(0, 0);
}

/// Dense values in big-endian order.
inline VectorXd dense(const fpcross::TTTensor& t) {
  const auto sizes = t.mode_sizes();
  VectorXd v(element_count(sizes));
  for (Index lin = 0; lin < v.size(); ++lin) v[lin] = entry_by_summation(t, unravel(lin, sizes));
  return v;
}

inline fpcross::FullTensor full_from(const std::vector<Index>& sizes, const VectorXd& v) {
  fpcross::FullTensor f(sizes);
  for (Index i = 0; i < v.size(); ++i) f.data[static_cast<std::size_t>(i)] = v[i];
  return f;
}

inline fpcross::TTTensor random_tt(const std::vector<Index>& sizes, const std::vector<Index>& ranks, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<fpcross::TTCore> cores;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    VectorXd data(ranks[k] * sizes[k] * ranks[k + 1]);
    for (Index i = 0; i < data.size(); ++i) data[i] = nd(rng);
    cores.emplace_back(ranks[k], sizes[k], ranks[k + 1], data);
  }
  return fpcross::TTTensor(std::move(cores));
}

inline VectorXd random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

inline MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// M_1 (x) ... (x) M_d, which acts on big-endian vectorizations.
inline MatrixXd kron_all(const std::vector<MatrixXd>& mats) {
  MatrixXd out = MatrixXd::Identity(1, 1);
  for (const auto& m : mats) out = kron(out, m);
  return out;
}

/// TT of dimension 1 holding the given vector.
inline fpcross::TTTensor vector_tt(const VectorXd& v) { return fpcross::TTTensor({fpcross::TTCore(1, v.size(), 1, v)}); }

/// Singular values of the k-th big-endian unfolding (first k modes as rows).
inline VectorXd unfolding_singular_values(const VectorXd& v, const std::vector<Index>& sizes, std::size_t k) {
  Index rows = 1;
  for (std::size_t i = 0; i < k; ++i) rows *= sizes[i];
  const Index cols = v.size() / rows;
  MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
  return Eigen::JacobiSVD<MatrixXd>(m).singularValues();
}

}  // namespace oracle
