#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "ip3o/envs.h"
#include "ip3o/errors.h"

namespace ip3o {
namespace {

PondWorldConfig no_slip() {
  PondWorldConfig c;
  c.slip = 0.0;
  return c;
}

TEST(PondWorld, DeterministicPathAroundThePond) {
  PondWorld env(no_slip());
  const auto obs = env.reset(0);
  EXPECT_EQ(obs.size(), 25u);
  EXPECT_EQ(obs[static_cast<std::size_t>(env.state_index({2, 0}))], 1.0);
  // Up, right x4, down reaches the goal at (2, 4) without touching water.
  double ret = 0.0, cost = 0.0;
  CmdpStep s;
  for (int a : {0, 1, 1, 1, 1, 2}) {
    s = env.step(a);
    ret += s.reward;
    cost += s.costs[0];
  }
  EXPECT_TRUE(s.terminated);
  EXPECT_FALSE(s.truncated);
  EXPECT_NEAR(ret, 1.0 - 6 * 0.01, 1e-12);
  EXPECT_EQ(cost, 0.0);
  EXPECT_THROW(env.step(0), DomainError);
}

TEST(PondWorld, WaterCostsAndTerminates) {
  PondWorld env(no_slip());
  env.reset(0);
  const CmdpStep s = env.step(1);
  EXPECT_EQ(s.costs[0], 1.0);
  EXPECT_TRUE(s.terminated);
}

TEST(PondWorld, WallsAndTruncation) {
  PondWorldConfig c = no_slip();
  c.max_steps = 3;
  PondWorld env(c);
  env.reset(0);
  EXPECT_EQ(env.move({0, 0}, 0), Cell(0, 0));
  EXPECT_FALSE(env.step(3).truncated);  // wall: stays at (2, 0)
  EXPECT_EQ(env.current_state(), env.state_index({2, 0}));
  env.step(3);
  const CmdpStep last = env.step(3);
  EXPECT_TRUE(last.truncated);
  EXPECT_FALSE(last.terminated);
}

TEST(PondWorld, RejectsInvalidActionsAndConfigs) {
  PondWorld env;
  env.reset(1);
  EXPECT_THROW(env.step(std::vector<double>{4.0}), DomainError);
  EXPECT_THROW(env.step(std::vector<double>{0.5}), DomainError);
  PondWorldConfig bad;
  bad.water = {{2, 0}};
  EXPECT_THROW(PondWorld{bad}, ParameterError);
  bad = {};
  bad.slip = 1.0;
  EXPECT_THROW(PondWorld{bad}, ParameterError);
}

TEST(PondWorld, SameSeedSameEpisode) {
  PondWorld a, b;
  a.reset(42);
  b.reset(42);
  for (int t = 0; t < 20; ++t) {
    const auto sa = a.step(t % 4);
    const auto sb = b.step(t % 4);
    EXPECT_EQ(sa.observation, sb.observation);
    if (sa.terminated || sa.truncated) break;
  }
}

TEST(PondWorld, TabularModelMatchesSimulatedTransitions) {
  PondWorld env;
  const TabularCmdp m = env.as_tabular(0.95);
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.n_states, 25);
  EXPECT_EQ(m.initial[static_cast<std::size_t>(env.state_index({2, 0}))], 1.0);
  // From the start, action "right": 0.8 into water, 0.1 up, 0.1 down.
  const int s = env.state_index({2, 0});
  EXPECT_NEAR(m.p(s, 1, env.state_index({2, 1})), 0.8, 1e-15);
  EXPECT_NEAR(m.c(0, s, 1), 0.8, 1e-15);
  std::map<int, int> counts;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    env.reset(static_cast<std::uint64_t>(k));
    env.step(1);
    ++counts[env.current_state()];
  }
  for (const auto& [to, count] : counts) {
    EXPECT_NEAR(static_cast<double>(count) / n, m.p(s, 1, to), 0.015);
  }
}

TEST(PointMass, DynamicsRewardAndCost) {
  PointMass env;
  EXPECT_EQ(env.reset(0), (std::vector<double>{0.0, 0.0}));
  const CmdpStep s = env.step(std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(s.observation[1], 0.1);
  EXPECT_DOUBLE_EQ(s.observation[0], 0.01);
  EXPECT_DOUBLE_EQ(s.reward, 0.1);
  EXPECT_EQ(s.costs[0], 0.0);
  env.set_state(0.0, 1.0);
  EXPECT_EQ(env.step(std::vector<double>{0.5}).costs[0], 1.0);
  EXPECT_THROW(env.step(std::vector<double>{1.5}), DomainError);
  EXPECT_THROW(env.as_tabular(0.9), UnsupportedError);
}

TEST(PointMass, TruncatesAtHorizon) {
  PointMassConfig c;
  c.horizon = 4;
  PointMass env(c);
  env.reset(0);
  for (int t = 0; t < 3; ++t) EXPECT_FALSE(env.step(std::vector<double>{0.0}).truncated);
  EXPECT_TRUE(env.step(std::vector<double>{0.0}).truncated);
  EXPECT_THROW(env.step(std::vector<double>{0.0}), DomainError);
}

TEST(PointMass, CloneIsIndependent) {
  PointMass env;
  env.reset(0);
  env.step(std::vector<double>{1.0});
  auto copy = env.clone();
  env.step(std::vector<double>{1.0});
  const auto s = copy->step(std::vector<double>{-1.0});
  EXPECT_DOUBLE_EQ(s.observation[1], 0.0);
}

}  // namespace
}  // namespace ip3o
