#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "froq/error.hpp"
#include "froq/stats.hpp"
#include "test_support.hpp"

namespace froq {
namespace {

using testing::expect_kind;

// Brute force: sort indices, average each block of equal values.
std::vector<double> rank_oracle(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double x : v) {
      less += x < v[i];
      equal += x == v[i];
    }
    out[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return out;
}

TEST(Rank, SortedInput) {
  EXPECT_EQ(stats::rank(std::vector<double>{10, 20, 30}), (std::vector<double>{1, 2, 3}));
}

TEST(Rank, TwoWayTieAverages) {
  EXPECT_EQ(stats::rank(std::vector<double>{5, 5, 1}), (std::vector<double>{2.5, 2.5, 1}));
}

TEST(Rank, MatchesBruteForceWithDuplicates) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> u(0, 12);
  std::vector<double> v(50);
  for (auto& x : v) x = u(rng);
  const auto r = stats::rank(v);
  EXPECT_EQ(r, rank_oracle(v));
  EXPECT_DOUBLE_EQ(std::accumulate(r.begin(), r.end(), 0.0), 50.0 * 51.0 / 2.0);
}

TEST(Rank, RejectsNonFinite) {
  expect_kind(ErrorKind::kInvalidScore, [] { stats::rank(std::vector<double>{1, NAN}); });
  expect_kind(ErrorKind::kInvalidScore, [] { stats::rank(std::vector<double>{INFINITY, 1}); });
}

TEST(Spearman, HandExamples) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_DOUBLE_EQ(stats::spearman(a, std::vector<double>{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(stats::spearman(a, std::vector<double>{3, 2, 1}), -1.0);
  EXPECT_NEAR(stats::spearman(a, std::vector<double>{3, 1, 2}), -0.5, 1e-15);
}

TEST(Spearman, SymmetricAndRankInvariant) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(40), b(40);
    for (auto& x : a) x = g(rng);
    for (auto& x : b) x = std::round(g(rng) * 3.0);
    const double rho = stats::spearman(a, b);
    EXPECT_EQ(rho, stats::spearman(b, a));
    EXPECT_LE(std::abs(rho), 1.0);
    std::vector<double> ea(a.size());
    std::transform(a.begin(), a.end(), ea.begin(), [](double x) { return std::exp(x) * 4 + 1; });
    EXPECT_EQ(rho, stats::spearman(ea, b));
  }
}

TEST(Spearman, Errors) {
  expect_kind(ErrorKind::kShape, [] {
    stats::spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2});
  });
  expect_kind(ErrorKind::kShape,
              [] { stats::spearman(std::vector<double>{1}, std::vector<double>{1}); });
  expect_kind(ErrorKind::kDegenerateInput, [] {
    stats::spearman(std::vector<double>{4, 4, 4}, std::vector<double>{1, 2, 3});
  });
  expect_kind(ErrorKind::kInvalidScore, [] {
    stats::spearman(std::vector<double>{1, NAN, 3}, std::vector<double>{1, 2, 3});
  });
}

TEST(Cosine, Examples) {
  EXPECT_EQ(stats::cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{0, 1}), 0.0);
  EXPECT_NEAR(stats::cosine_similarity(std::vector<float>{0.3f, -0.4f},
                                       std::vector<float>{0.3f, -0.4f}),
              1.0, 1e-15);
}

TEST(Cosine, MatchesDirectFormula) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> u(512), v(512);
  for (auto& x : u) x = g(rng);
  for (auto& x : v) x = g(rng);
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  EXPECT_NEAR(stats::cosine_similarity(u, v), dot / (std::sqrt(nu) * std::sqrt(nv)), 1e-12);
  std::vector<double> su(u);
  for (auto& x : su) x *= 7.5;
  EXPECT_NEAR(stats::cosine_similarity(su, v), stats::cosine_similarity(u, v), 1e-15);
}

TEST(Cosine, Errors) {
  expect_kind(ErrorKind::kDegenerateInput, [] {
    stats::cosine_similarity(std::vector<float>{0, 0}, std::vector<float>{1, 0});
  });
  expect_kind(ErrorKind::kShape, [] {
    stats::cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{1, 0, 0});
  });
}

TEST(Quantile, Examples) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_EQ(stats::count_below(v, stats::quantile_threshold(v, 0.0)), 0u);
  const double t = stats::quantile_threshold(v, 0.5);
  EXPECT_EQ(stats::count_below(v, t), 2u);
  EXPECT_EQ(t, 3.0);
  EXPECT_EQ(stats::count_below(v, stats::quantile_threshold(v, 1.0)), 4u);
}

TEST(Quantile, TiesAreKeptTogether) {
  const std::vector<double> v{1, 2, 2, 2, 5};
  // 40% would split the tie block of 2s, so only the 1 goes.
  EXPECT_EQ(stats::count_below(v, stats::quantile_threshold(v, 0.4)), 1u);
  EXPECT_EQ(stats::count_below(v, stats::quantile_threshold(v, 0.8)), 4u);
  const std::vector<double> flat(10, 3.0);
  EXPECT_EQ(stats::count_below(flat, stats::quantile_threshold(flat, 0.5)), 0u);
}

TEST(Quantile, RandomAgainstSortOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u;
  std::vector<double> v(1000);
  for (auto& x : v) x = u(rng);
  const auto discarded = stats::count_below(v, stats::quantile_threshold(v, 0.2));
  EXPECT_GE(discarded, 199u);
  EXPECT_LE(discarded, 201u);
}

TEST(Quantile, Errors) {
  expect_kind(ErrorKind::kInvalidParameter,
              [] { stats::quantile_threshold(std::vector<double>{1, 2}, -0.1); });
  expect_kind(ErrorKind::kInvalidParameter,
              [] { stats::quantile_threshold(std::vector<double>{1, 2}, 1.5); });
  expect_kind(ErrorKind::kInvalidParameter,
              [] { stats::quantile_threshold(std::vector<double>{}, 0.5); });
}

}  // namespace
}  // namespace froq
