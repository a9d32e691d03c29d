#include <gtest/gtest.h>

#include <cmath>

#include "fpcross/tt.hpp"
#include "oracles.hpp"

using namespace fpcross;

namespace {

TTTensor ones_tt(const std::vector<Index>& sizes) {
  std::vector<TTCore> cores;
  for (Index n : sizes) cores.emplace_back(1, n, 1, VectorXd::Ones(n));
  return TTTensor(std::move(cores));
}

VectorXd as_vector(const FullTensor& f) { return Eigen::Map<const VectorXd>(f.data.data(), f.size()); }

FullTensor sin_sum_grid() {
  FullTensor f({10, 10});
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 10; ++j) f.data[static_cast<std::size_t>(i * 10 + j)] = std::sin(0.3 * i + 0.7 * j);
  return f;
}

}  // namespace

TEST(TTTensor, RejectsBrokenRankChain) {
  EXPECT_THROW(TTTensor({TTCore(1, 3, 2), TTCore(3, 3, 1)}), std::invalid_argument);
  EXPECT_THROW(TTTensor({TTCore(2, 3, 1)}), std::invalid_argument);
  EXPECT_THROW(TTTensor({TTCore(1, 3, 2), TTCore(2, 3, 2)}), std::invalid_argument);
}

TEST(TTTensor, ChainedProductMatchesSummation) {
  const auto t = oracle::random_tt({3, 4, 2, 3}, {1, 2, 3, 2, 1}, 11);
  for (const auto& idx : oracle::all_indices(t.mode_sizes()))
    EXPECT_NEAR(tt_element(t, idx), oracle::entry_by_summation(t, idx), 1e-12);
}

TEST(FullTensor, BigEndianLinearIndex) {
  FullTensor f({2, 3, 4});
  const std::vector<Index> idx{1, 2, 3};
  EXPECT_EQ(f.linear_index(idx), 1 * 12 + 2 * 4 + 3);
  const std::vector<Index> first{0, 0, 1};
  EXPECT_EQ(f.linear_index(first), 1);
  const std::vector<Index> bad{2, 0, 0};
  EXPECT_THROW(f.linear_index(bad), std::out_of_range);
}

TEST(TTFromFull, AllOnesIsRankOne) {
  FullTensor f({4, 4, 4});
  std::fill(f.data.begin(), f.data.end(), 1.0);
  const auto t = tt_from_full(f, 1e-12);
  EXPECT_EQ(t.ranks(), (std::vector<Index>{1, 1, 1, 1}));
}

TEST(TTFromFull, NoiseRoundTripIsLossless) {
  const VectorXd v = oracle::random_vector(9, 3);
  const auto f = oracle::full_from({3, 3}, v);
  const auto t = tt_from_full(f, 1e-14);
  EXPECT_LE((oracle::dense(t) - v).norm(), 1e-13 * v.norm());
}

TEST(TTFromFull, SinOfSumHasRankTwo) {
  const FullTensor f = sin_sum_grid();
  // Dense SVD of the 10x10 matrix confirms the separation rank independently.
  const VectorXd s = oracle::unfolding_singular_values(as_vector(f), f.mode_sizes, 1);
  ASSERT_GT(s[1], 1e-6 * s[0]);
  ASSERT_LT(s[2], 1e-12 * s[0]);
  const auto t = tt_from_full(f, 1e-10);
  EXPECT_EQ(t.ranks(), (std::vector<Index>{1, 2, 1}));
  const std::vector<Index> idx{0, 0};
  EXPECT_NEAR(tt_element(t, idx), std::sin(0.0), 1e-10);
  EXPECT_NEAR(tt_element(t, {3, 5}), std::sin(0.9 + 3.5), 1e-10);
}

TEST(TTFromFull, RejectsNonFinite) {
  FullTensor f({2, 2});
  f.data[1] = std::nan("");
  EXPECT_THROW(tt_from_full(f, 1e-6), NonFiniteError);
  EXPECT_THROW(tt_from_full(f, 0.0), std::invalid_argument);
}

TEST(TTFromFull, RoundTripWithinToleranceOnRandomTensors) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 1 + static_cast<Index>(rng() % 4);
    std::vector<Index> sizes;
    for (Index k = 0; k < d; ++k) sizes.push_back(1 + static_cast<Index>(rng() % 8));
    if (oracle::element_count(sizes) > 4096) continue;
    // Low-rank structure plus noise so that truncation actually happens.
    std::vector<Index> ranks(static_cast<std::size_t>(d + 1), 2);
    ranks.front() = ranks.back() = 1;
    VectorXd v = oracle::dense(oracle::random_tt(sizes, ranks, rng()));
    v += 1e-3 * oracle::random_vector(v.size(), rng());
    for (double eps : {1e-1, 1e-3, 1e-8}) {
      const auto t = tt_from_full(oracle::full_from(sizes, v), eps);
      EXPECT_LE((oracle::dense(t) - v).norm(), eps * v.norm() * (1 + 1e-12)) << "trial " << trial << " eps " << eps;
    }
  }
}

TEST(TTFromFull, RanksAreMinimalForEachUnfolding) {
  // With a single interior bond the budget is the whole tolerance, so the
  // truncated rank is exactly what the dense SVD tail dictates.
  const VectorXd v = oracle::random_vector(48, 17);
  const std::vector<Index> sizes{6, 8};
  const VectorXd s = oracle::unfolding_singular_values(v, sizes, 1);
  const double eps = 0.3;
  Index expected = s.size();
  double tail = 0.0;
  while (expected > 1 && std::sqrt(tail + s[expected - 1] * s[expected - 1]) <= eps * v.norm()) {
    tail += s[expected - 1] * s[expected - 1];
    --expected;
  }
  EXPECT_EQ(tt_from_full(oracle::full_from(sizes, v), eps).ranks()[1], expected);
}

TEST(TTToFull, OnesAndRoundTrip) {
  const auto f = tt_to_full(ones_tt({2, 3, 2}));
  for (double x : f.data) EXPECT_EQ(x, 1.0);

  const VectorXd v = oracle::random_vector(60, 8);
  const auto back = tt_to_full(tt_from_full(oracle::full_from({3, 4, 5}, v), 1e-14));
  EXPECT_LE((as_vector(back) - v).norm(), 1e-13 * v.norm());
}

TEST(TTToFull, MatchesElementAccessEverywhere) {
  const auto t = oracle::random_tt({4, 4, 4}, {1, 2, 2, 1}, 21);
  const auto f = tt_to_full(t);
  for (const auto& idx : oracle::all_indices(t.mode_sizes())) EXPECT_NEAR(f(idx), tt_element(t, idx), 1e-13);
}

TEST(TTToFull, RefusesOversizedTensorWithSize) {
  const auto t = ones_tt({1000, 1000, 1000});
  try {
    tt_to_full(t, 1000000);
    FAIL() << "expected length_error";
  } catch (const std::length_error& e) {
    EXPECT_NE(std::string(e.what()).find("1000000000"), std::string::npos);
  }
}

TEST(TTElement, EdgeCases) {
  EXPECT_EQ(tt_element(ones_tt({3, 5, 2}), {2, 4, 1}), 1.0);
  const VectorXd v = (VectorXd(3) << 0.5, -2.0, 7.0).finished();
  EXPECT_EQ(tt_element(oracle::vector_tt(v), {1}), -2.0);
  EXPECT_THROW(tt_element(ones_tt({3, 3}), {3, 0}), std::out_of_range);
  EXPECT_THROW(tt_element(ones_tt({3, 3}), {0}), std::out_of_range);
}

TEST(TTRound, ZeroPaddedRankCollapses) {
  const VectorXd a = oracle::random_vector(4, 1);
  const VectorXd b = oracle::random_vector(5, 2);
  const VectorXd c = oracle::random_vector(3, 3);
  TTCore g0(1, 4, 3), g1(3, 5, 3), g2(3, 3, 1);
  for (Index i = 0; i < 4; ++i) g0(0, i, 0) = a[i];
  for (Index i = 0; i < 5; ++i) g1(0, i, 0) = b[i];
  for (Index i = 0; i < 3; ++i) g2(0, i, 0) = c[i];
  const TTTensor padded({g0, g1, g2});
  const auto r = tt_round(padded, 1e-12);
  EXPECT_EQ(r.ranks(), (std::vector<Index>{1, 1, 1, 1}));
  EXPECT_LE((oracle::dense(r) - oracle::dense(padded)).norm(), 1e-12 * oracle::dense(padded).norm());
}

TEST(TTRound, SelfSumKeepsRanksAndDoubles) {
  const auto t = oracle::random_tt({4, 5, 3}, {1, 2, 3, 1}, 4);
  const auto twice = tt_add(t, t);
  EXPECT_EQ(twice.ranks(), (std::vector<Index>{1, 4, 6, 1}));
  const auto r = tt_round(twice, 1e-12);
  EXPECT_EQ(r.ranks(), t.ranks());
  const VectorXd ref = 2.0 * oracle::dense(t);
  EXPECT_LE((oracle::dense(r) - ref).norm(), 1e-11 * ref.norm());
}

TEST(TTRound, ContractOnRandomTensors) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    const Index d = 2 + static_cast<Index>(rng() % 3);
    std::vector<Index> sizes, ranks{1};
    for (Index k = 0; k < d; ++k) sizes.push_back(2 + static_cast<Index>(rng() % 5));
    for (Index k = 1; k < d; ++k) ranks.push_back(1 + static_cast<Index>(rng() % 4));
    ranks.push_back(1);
    const auto t = oracle::random_tt(sizes, ranks, rng());
    const VectorXd ref = oracle::dense(t);
    for (double eps : {0.5, 1e-1, 1e-4, 1e-10}) {
      const auto r = tt_round(t, eps);
      EXPECT_LE((oracle::dense(r) - ref).norm(), eps * ref.norm() * (1 + 1e-10));
      for (std::size_t k = 0; k < ranks.size(); ++k) EXPECT_LE(r.ranks()[k], t.ranks()[k]);
    }
  }
}

TEST(TTRound, NoiseAtLooseTolerance) {
  const VectorXd v = oracle::random_vector(6 * 6 * 6, 12);
  const auto t = tt_from_full(oracle::full_from({6, 6, 6}, v), 1e-14);
  const auto r = tt_round(t, 1e-1);
  EXPECT_LE((oracle::dense(r) - v).norm(), 0.1 * v.norm());
}

TEST(TTRank1Random, DeterministicPositiveAndSeparable) {
  const auto a = tt_rank1_random({2, 2}, 77);
  const auto b = tt_rank1_random({2, 2}, 77);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == tt_rank1_random({2, 2}, 78));

  const auto v = tt_rank1_random({5}, 3);
  for (Index i = 0; i < 5; ++i) {
    EXPECT_GT(v.core(0)(0, i, 0), 0.0);
    EXPECT_LT(v.core(0)(0, i, 0), 1.0);
  }

  const auto t = tt_rank1_random({3, 3, 3}, 5);
  EXPECT_EQ(t.ranks(), (std::vector<Index>{1, 1, 1, 1}));
  for (const auto& idx : oracle::all_indices({3, 3, 3})) {
    const double prod = t.core(0)(0, idx[0], 0) * t.core(1)(0, idx[1], 0) * t.core(2)(0, idx[2], 0);
    EXPECT_DOUBLE_EQ(tt_element(t, idx), prod);
  }
}

TEST(TTApplyModeMatrices, IdentityAndScaling) {
  const auto t = oracle::random_tt({3, 4, 2}, {1, 2, 2, 1}, 6);
  const std::vector<MatrixXd> eye{MatrixXd::Identity(3, 3), MatrixXd::Identity(4, 4), MatrixXd::Identity(2, 2)};
  EXPECT_TRUE(tt_apply_mode_matrices(t, eye) == t);

  const std::vector<MatrixXd> twos{2 * MatrixXd::Identity(3, 3), 2 * MatrixXd::Identity(4, 4),
                                   2 * MatrixXd::Identity(2, 2)};
  const auto s = tt_apply_mode_matrices(t, twos);
  EXPECT_EQ(s.ranks(), t.ranks());
  EXPECT_LE((oracle::dense(s) - 8.0 * oracle::dense(t)).norm(), 1e-12 * oracle::dense(t).norm());
}

TEST(TTApplyModeMatrices, MatchesDenseKroneckerAction) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 1 + static_cast<Index>(rng() % 3);
    std::vector<Index> sizes, ranks{1};
    std::vector<MatrixXd> mats;
    for (Index k = 0; k < d; ++k) {
      const Index n = 1 + static_cast<Index>(rng() % 6);
      sizes.push_back(n);
      mats.push_back(MatrixXd::Random(n, n));
    }
    for (Index k = 1; k < d; ++k) ranks.push_back(1 + static_cast<Index>(rng() % 3));
    ranks.push_back(1);
    const auto t = oracle::random_tt(sizes, ranks, rng());
    const VectorXd expected = oracle::kron_all(mats) * oracle::dense(t);
    const auto out = tt_apply_mode_matrices(t, mats);
    EXPECT_EQ(out.ranks(), t.ranks());
    EXPECT_LE((oracle::dense(out) - expected).norm(), 1e-12 * (1 + expected.norm()));
  }
}

TEST(TTApplyModeMatrices, ShapeMismatch) {
  const auto t = oracle::random_tt({3, 4}, {1, 2, 1}, 6);
  EXPECT_THROW(tt_apply_mode_matrices(t, std::vector<MatrixXd>{MatrixXd::Identity(3, 3)}), std::invalid_argument);
  EXPECT_THROW(tt_apply_mode_matrices(t, std::vector<MatrixXd>{MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3)}),
               std::invalid_argument);
}

TEST(TTNorm, KnownValuesAndDenseAgreement) {
  EXPECT_DOUBLE_EQ(tt_norm(ones_tt({2, 2})), 2.0);
  EXPECT_EQ(tt_norm(tt_scale(ones_tt({3, 2, 2}), 0.0)), 0.0);
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = oracle::random_tt({2 + Index(rng() % 4), 3, 2 + Index(rng() % 4)},
                                     {1, 1 + Index(rng() % 3), 1 + Index(rng() % 3), 1}, rng());
    const double dense2 = oracle::dense(t).squaredNorm();
    EXPECT_NEAR(tt_norm(t) * tt_norm(t), dense2, 1e-10 * dense2);
  }
}

TEST(TTArithmetic, AddSubScale) {
  const auto a = oracle::random_tt({3, 4, 2}, {1, 2, 3, 1}, 1);
  const auto b = oracle::random_tt({3, 4, 2}, {1, 3, 1, 1}, 2);
  EXPECT_LE((oracle::dense(tt_add(a, b)) - (oracle::dense(a) + oracle::dense(b))).norm(), 1e-12);
  EXPECT_LE((oracle::dense(tt_sub(a, b)) - (oracle::dense(a) - oracle::dense(b))).norm(), 1e-12);
  EXPECT_LE((oracle::dense(tt_scale(a, -3.5)) + 3.5 * oracle::dense(a)).norm(), 1e-12);
  EXPECT_NEAR(tt_relative_error(a, a), 0.0, 1e-7);
  EXPECT_THROW(tt_add(a, oracle::random_tt({3, 4, 3}, {1, 1, 1, 1}, 2)), std::invalid_argument);
}

TEST(TTErank, Definition) {
  EXPECT_DOUBLE_EQ(tt_erank(tt_rank1_random({7, 3, 9, 4}, 1)), 1.0);
  EXPECT_NEAR(tt_erank(oracle::random_tt({6, 6, 6, 6}, {1, 4, 4, 4, 1}, 1)), 4.0, 1e-12);
  // Ranks [1,2,6,1], N = 10: 10r + 10r^2 + 10r = 20 + 120 + 60 gives r^2 + 2r - 20 = 0.
  const double r = tt_erank(oracle::random_tt({10, 10, 10}, {1, 2, 6, 1}, 1));
  EXPECT_NEAR(r, -1.0 + std::sqrt(21.0), 1e-12);
  EXPECT_NEAR(10 * r + 10 * r * r + 10 * r, 200.0, 1e-9);
  EXPECT_EQ(tt_erank(oracle::vector_tt(VectorXd::Ones(4))), 1.0);
}

TEST(TTExtrema, MatchesDense) {
  const auto t = oracle::random_tt({5, 4, 6}, {1, 3, 2, 1}, 8);
  const VectorXd v = oracle::dense(t);
  const Extrema e = tt_extrema(t);
  EXPECT_NEAR(e.min, v.minCoeff(), 1e-12);
  EXPECT_NEAR(e.max, v.maxCoeff(), 1e-12);
}
