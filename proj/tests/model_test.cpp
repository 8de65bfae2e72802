#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace sgmap {
namespace {

TEST(ObservationSet, RejectsBadInput) {
  EXPECT_THROW(ObservationSet(RealMatrix(0, 3), 1.0), dimension_error);
  EXPECT_THROW(ObservationSet(RealMatrix(2, 2), 0.0), parameter_error);
  RealMatrix v(1, 1);
  v(0, 0) = std::nan("");
  EXPECT_THROW(ObservationSet(v, 1.0), parameter_error);
}

TEST(IndicatorMatrix, CountsPerGroup) {
  IndicatorMatrix d(3, 4);
  d.set(0, 1, true);
  d.set(0, 3, true);
  d.set(2, 0, true);
  EXPECT_EQ(d.h(0), 2u);
  EXPECT_EQ(d.h(1), 0u);
  EXPECT_EQ(d.h(2), 1u);
  EXPECT_EQ(d.m0(), 2u);
}

TEST(Generate, StandardDesignHas245Nonzeros) {
  const auto sc = SimScenario::standard(3.0, 10, 7);
  for (std::size_t r = 0; r < 5; ++r) {
    const auto [mu, y] = generate(sc, r);
    std::size_t total = 0;
    std::size_t nonzero_groups = 0;
    for (std::size_t j = 0; j < sc.m; ++j) {
      std::size_t k = 0;
      for (double v : mu.group(j)) k += v != 0.0;
      EXPECT_EQ(k, sc.nonzero_counts[j]);
      total += k;
      nonzero_groups += k > 0;
    }
    EXPECT_EQ(total, 245u);
    EXPECT_EQ(nonzero_groups, 5u);
  }
}

TEST(Generate, ZeroCountsGivePureNoise) {
  SimScenario sc{3, 4, {0, 0, 0}, 2.5, 1.0, 1, 11, false};
  const auto [mu, y] = generate(sc, 0);
  for (double v : mu.values().flat()) EXPECT_EQ(v, 0.0);
  double energy = 0;
  for (double v : y.values().flat()) energy += v * v;
  EXPECT_GT(energy, 0.0);
}

TEST(Generate, DeterministicPerReplication) {
  const auto sc = SimScenario::standard(3.0, 10, 99);
  for (std::size_t r : {0u, 1u, 17u}) {
    const auto a = generate(sc, r);
    const auto b = generate(sc, r);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
  }
  EXPECT_NE(generate(sc, 0).second, generate(sc, 1).second);
}

TEST(Generate, FixedSignalReusesMeansButNotNoise) {
  auto sc = SimScenario::standard(3.0, 10, 5);
  sc.fixed_signal = true;
  const auto a = generate(sc, 2);
  const auto b = generate(sc, 3);
  EXPECT_EQ(a.first, b.first);
  EXPECT_NE(a.second, b.second);
  // noise stream is shared with the resampling mode
  sc.fixed_signal = false;
  const auto c = generate(sc, 2);
  double da = 0, dc = 0;
  for (std::size_t k = 0; k < 1000; ++k) {
    da += a.second.values().flat()[k] - a.first.values().flat()[k];
    dc += c.second.values().flat()[k] - c.first.values().flat()[k];
  }
  EXPECT_DOUBLE_EQ(da, dc);
}

TEST(Generate, InvalidCountIsDimensionError) {
  SimScenario sc{2, 3, {1, 4}, 1.0, 1.0, 1, 0, false};
  EXPECT_THROW(generate(sc, 0), dimension_error);
  sc.nonzero_counts = {1};
  EXPECT_THROW(generate(sc, 0), dimension_error);
}

TEST(Generate, NoiseVarianceMatchesSigma) {
  SimScenario sc{4, 50, {0, 0, 0, 0}, 1.0, 1.7, 200, 3, false};
  double s = 0, s2 = 0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < sc.replications; ++r) {
    const auto [mu, y] = generate(sc, r);
    for (double v : y.values().flat()) {
      s += v;
      s2 += v * v;
      ++count;
    }
  }
  const double mean = s / double(count);
  const double var = s2 / double(count) - mean * mean;
  EXPECT_NEAR(var / (1.7 * 1.7), 1.0, 0.05);
}

TEST(SumSquaredError, Examples) {
  RealMatrix a(2, 3), b(2, 3, 1.0);
  EXPECT_EQ(sum_squared_error(MeanSet(a), MeanSet(a)), 0.0);
  EXPECT_EQ(sum_squared_error(MeanSet(b), MeanSet(a)), 6.0);
  EXPECT_THROW(sum_squared_error(MeanSet(RealMatrix(2, 2)), MeanSet(a)), dimension_error);
}

TEST(SumSquaredError, MatchesDoubleLoopAndIsSymmetric) {
  Xoshiro256 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto x = testing::random_observations(rng, 2, 2);
    const auto y = testing::random_observations(rng, 2, 2);
    double ref = 0;
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < 2; ++i) {
        const double d = x.values()(j, i) - y.values()(j, i);
        ref += d * d;
      }
    const MeanSet a(x.values()), b(y.values());
    EXPECT_NEAR(sum_squared_error(a, b), ref, 1e-12);
    EXPECT_EQ(sum_squared_error(a, b), sum_squared_error(b, a));
    EXPECT_GT(sum_squared_error(a, b), 0.0);
  }
}

TEST(Rng, SubstreamsAreIndependentOfOrder) {
  auto a = make_stream(42, 7, Stream::noise);
  auto b = make_stream(42, 7, Stream::noise);
  auto c = make_stream(42, 7, Stream::signal);
  const auto first = a();
  EXPECT_EQ(first, b());
  EXPECT_NE(first, c());
  Xoshiro256 r(1);
  for (int k = 0; k < 1000; ++k) EXPECT_LT(r.below(7), 7u);
}

}  // namespace
}  // namespace sgmap
