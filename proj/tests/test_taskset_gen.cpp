#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fpgs/taskset_gen.hpp"

namespace fpgs {
namespace {

TEST(GenUtilizations, SingleTaskIsForced) {
  const auto u = gen_utilizations(1, 0.5, 3);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_DOUBLE_EQ(u[0], 0.5);
}

TEST(GenUtilizations, SumAndBoundsOverManySeeds) {
  for (std::uint64_t s = 0; s < 10'000; ++s) {
    const auto u = gen_utilizations(4, 2.0, s);
    ASSERT_EQ(u.size(), 4u);
    for (double x : u) {
      ASSERT_GT(x, 0.0);
      ASSERT_LE(x, 1.0);
    }
    ASSERT_NEAR(std::accumulate(u.begin(), u.end(), 0.0), 2.0, 1e-9) << "seed " << s;
  }
}

TEST(GenUtilizations, InfeasibleTargetThrows) {
  EXPECT_THROW(gen_utilizations(2, 3.0, 1), Error);
  EXPECT_THROW(gen_utilizations(2, 0.0, 1), Error);
}

TEST(GenUtilizations, DeterministicInSeed) {
  EXPECT_EQ(gen_utilizations(8, 3.1, 42), gen_utilizations(8, 3.1, 42));
  EXPECT_NE(gen_utilizations(8, 3.1, 42), gen_utilizations(8, 3.1, 43));
}

TEST(GenTaskset, SingleTaskFullUtilization) {
  GenConfig cfg;
  cfg.n = 1;
  cfg.m = 1;
  cfg.target_u = 1.0;
  cfg.t_min = cfg.t_max = 10;
  cfg.seed = 5;
  const auto ts = gen_taskset(cfg);
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_EQ(ts[0].C, 10);
  EXPECT_EQ(ts[0].T, 10);
  EXPECT_EQ(ts[0].D, 10);
}

TEST(GenTaskset, ThirtyTwoTasksWithinRoundingBound) {
  GenConfig cfg;
  cfg.n = 32;
  cfg.m = 4;
  cfg.target_u = 2.8;
  cfg.seed = 7;
  const auto ts = gen_taskset(cfg);
  EXPECT_EQ(ts.size(), 32u);
  EXPECT_TRUE(is_valid(ts));
  EXPECT_LE(std::abs(ts.utilization() - 2.8), 32.0 / 10.0);
}

TEST(GenTaskset, Deterministic) {
  GenConfig cfg;
  cfg.n = 12;
  cfg.m = 3;
  cfg.target_u = 2.0;
  cfg.deadline_model = DeadlineModel::Constrained;
  cfg.seed = 1234;
  EXPECT_EQ(gen_taskset(cfg), gen_taskset(cfg));
}

TEST(GenTaskset, PropertiesOverSeeds) {
  for (std::uint64_t s = 0; s < 2000; ++s) {
    GenConfig cfg;
    cfg.n = 2 + static_cast<int>(s % 15);
    cfg.m = 1 + static_cast<int>(s % 4);
    cfg.target_u = std::min<double>(cfg.n, cfg.m) * (0.2 + 0.8 * static_cast<double>(s % 97) / 97.0);
    cfg.t_max = s % 3 == 0 ? 100 : 1000;
    cfg.deadline_model = s % 2 ? DeadlineModel::Constrained : DeadlineModel::Implicit;
    cfg.seed = s;
    const auto ts = gen_taskset(cfg);
    ASSERT_TRUE(is_valid(ts)) << "seed " << s;
    ASSERT_LE(std::abs(ts.utilization() - cfg.target_u), static_cast<double>(cfg.n) / cfg.t_min) << "seed " << s;
    for (const auto& t : ts.tasks) {
      ASSERT_GE(t.T, cfg.t_min);
      ASSERT_LE(t.T, cfg.t_max);
      if (cfg.deadline_model == DeadlineModel::Implicit) {
        ASSERT_EQ(t.D, t.T);
      }
    }
  }
}

TEST(GenTaskset, RejectsBadConfig) {
  GenConfig cfg;
  cfg.t_min = 5;
  EXPECT_THROW(gen_taskset(cfg), Error);
  cfg = GenConfig{};
  cfg.target_u = cfg.m + 0.5;
  EXPECT_THROW(gen_taskset(cfg), Error);
}

TEST(GenTaskset, StreamsAreDerivedPerSet) {
  GenConfig cfg;
  cfg.seed = 77;
  const auto sets = gen_tasksets(cfg, 3);
  GenConfig one = cfg;
  one.seed = derive_seed(77, 2);
  EXPECT_EQ(sets[2], gen_taskset(one));
  EXPECT_NE(sets[0], sets[1]);
}

TEST(GenConfigJson, RoundTrip) {
  GenConfig cfg;
  cfg.n = 5;
  cfg.m = 2;
  cfg.target_u = 1.25;
  cfg.t_min = 20;
  cfg.t_max = 200;
  cfg.deadline_model = DeadlineModel::Constrained;
  cfg.seed = 9;
  const auto back = gen_config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
}

}  // namespace
}  // namespace fpgs
