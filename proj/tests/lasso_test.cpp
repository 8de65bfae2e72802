#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace sgmap {
namespace {

ObservationSet one_group(std::vector<double> v) {
  RealMatrix m(1, v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
  return ObservationSet(m, 1.0);
}

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(soft_threshold(std::vector<double>{3, -2, 0.5}, 1.0), (std::vector<double>{2, -1, 0}));
  const std::vector<double> y{1.5, -0.2, 7};
  EXPECT_EQ(soft_threshold(y, 0.0), y);
  EXPECT_EQ(soft_threshold(y, 7.0), (std::vector<double>{0, 0, 0}));
  EXPECT_THROW(soft_threshold(y, -1.0), parameter_error);
}

TEST(GroupLasso, Examples) {
  const auto y = one_group({3, 4});
  const auto r = group_lasso(y, 2.0);
  EXPECT_NEAR(r.values()(0, 0), 2.4, 1e-15);
  EXPECT_NEAR(r.values()(0, 1), 3.2, 1e-15);
  // numerical minimization of ||y - mu||^2 + 2 ||mu||_2
  const auto num = numeric_sgl(y, {2.0, 0.0});
  EXPECT_LT(testing::max_abs_diff(r, num), 1e-8);

  EXPECT_EQ(group_lasso(y, 0.0).values(), y.values());
  const auto killed = group_lasso(y, 10.0);
  for (double v : killed.values().flat()) EXPECT_EQ(v, 0.0);
}

TEST(SparseGroupLasso, Examples) {
  const auto y = one_group({3, 1});
  const auto r = sparse_group_lasso(y, {2.0, 2.0});
  EXPECT_NEAR(r.values()(0, 0), 1.0, 1e-15);
  EXPECT_EQ(r.values()(0, 1), 0.0);
  EXPECT_LT(testing::max_abs_diff(r, numeric_sgl(y, {2.0, 2.0})), 1e-8);

  Xoshiro256 rng(1);
  const auto data = testing::random_observations(rng, 4, 6);
  EXPECT_EQ(sparse_group_lasso(data, {0, 0}).values(), data.values());
  EXPECT_EQ(sparse_group_lasso(data, {3.3, 0}), group_lasso(data, 3.3));
  EXPECT_THROW(sparse_group_lasso(data, {-1, 0}), parameter_error);
}

TEST(GroupLasso, AllOrNothingSupport) {
  Xoshiro256 rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto y = testing::random_observations(rng, 5, 8);
    const auto r = group_lasso(y, testing::uniform(rng, 0, 30));
    for (std::size_t j = 0; j < 5; ++j) {
      std::size_t nz = 0;
      for (double v : r.group(j)) nz += v != 0.0;
      EXPECT_TRUE(nz == 0 || nz == 8);
    }
  }
}

TEST(SparseGroupLasso, GroupNormMonotoneInLambda1) {
  Xoshiro256 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto y = testing::random_observations(rng, 3, 7);
    const double l2 = testing::uniform(rng, 0, 4);
    std::vector<double> prev(3, std::numeric_limits<double>::infinity());
    for (double l1 = 0; l1 <= 20; l1 += 0.5) {
      const auto r = sparse_group_lasso(y, {l1, l2});
      for (std::size_t j = 0; j < 3; ++j) {
        double nrm = 0;
        for (double v : r.group(j)) nrm += v * v;
        EXPECT_LE(std::sqrt(nrm), prev[j] + 1e-12);
        prev[j] = std::sqrt(nrm);
      }
    }
  }
}

TEST(GridSpec, ParsesRanges) {
  const auto g = GridSpec::parse("l1=0:2:0.5;l2=1.5");
  EXPECT_EQ(g.lambda1, (std::vector<double>{0, 0.5, 1, 1.5, 2}));
  EXPECT_EQ(g.lambda2, (std::vector<double>{1.5}));
  const auto d = GridSpec::defaults();
  EXPECT_EQ(d.lambda1.size(), 201u);
  EXPECT_EQ(d.lambda2.size(), 81u);
  EXPECT_DOUBLE_EQ(d.lambda1.back(), 20.0);
  EXPECT_THROW(GridSpec::parse("l3=1"), parameter_error);
  EXPECT_THROW(GridSpec::parse("l1=1:2"), parameter_error);
}

SimScenario small_scenario() { return {4, 20, {0, 20, 8, 2}, 2.0, 1.0, 60, 1234, false}; }

TEST(OracleTune, SinglePointReturnsThatPoint) {
  const auto sc = small_scenario();
  const GridSpec g{{1.5}, {0.7}};
  const auto t = oracle_tune(sc, TuneMode::full, g, sc.replications, 1);
  ASSERT_EQ(t.grid.size(), 1u);
  EXPECT_EQ(t.best_params, (LassoParams{1.5, 0.7}));
  // direct evaluation of the closed form on the same replications
  std::vector<double> sse;
  for (std::size_t r = 0; r < sc.replications; ++r) {
    const auto [mu, y] = generate(sc, r);
    sse.push_back(sum_squared_error(sparse_group_lasso(y, {1.5, 0.7}), mu));
  }
  const auto ref = mean_and_se(sse);
  EXPECT_NEAR(t.best_mse, ref.mean, 1e-9 * ref.mean);
  EXPECT_NEAR(t.best_se, ref.se, 1e-9 * ref.se);
}

TEST(OracleTune, BestIsGridMinimumAndDeterministic) {
  const auto sc = small_scenario();
  const GridSpec g{Range{0, 6, 0.5}.values(), Range{0, 3, 0.5}.values()};
  const auto a = oracle_tune(sc, TuneMode::full, g, 40, 1);
  const auto b = oracle_tune(sc, TuneMode::full, g, 40, 4);
  ASSERT_EQ(a.grid.size(), b.grid.size());
  for (std::size_t k = 0; k < a.grid.size(); ++k) {
    EXPECT_EQ(a.grid[k].mse, b.grid[k].mse);
    EXPECT_GE(a.grid[k].mse, a.best_mse);
  }
  EXPECT_EQ(a.best_params, b.best_params);
}

TEST(OracleTune, SemiModeFixesLambda2) {
  const auto sc = small_scenario();
  const auto t = oracle_tune(sc, TuneMode::semi, GridSpec{Range{0, 4, 1}.values(), {}}, 20, 2);
  for (const auto& p : t.grid) EXPECT_DOUBLE_EQ(p.params.lambda2, 2.0 * std::sqrt(2.0 * std::log(20.0)));
  EXPECT_EQ(t.grid.size(), 5u);
  EXPECT_THROW(oracle_tune(sc, TuneMode::full, GridSpec{{}, {1}}, 20), parameter_error);
}

}  // namespace
}  // namespace sgmap
