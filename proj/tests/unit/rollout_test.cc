#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ip3o/errors.h"
#include "ip3o/rollout.h"
#include "ip3o/trainer.h"
#include "support.h"

namespace ip3o {
namespace {

TEST(Gae, MatchesExplicitDoubleSum) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> len(1, 64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const int T = len(rng);
    const double gamma = u(rng), lambda = u(rng);
    std::vector<double> r(T), v(T);
    std::vector<std::uint8_t> d(T);
    for (int t = 0; t < T; ++t) {
      r[t] = n(rng);
      v[t] = n(rng);
      d[t] = u(rng) < 0.15;
    }
    const double boot = n(rng);
    const auto fast = gae(r, v, d, gamma, lambda, boot);
    const auto slow = testing::gae_reference(r, v, d, gamma, lambda, boot);
    for (int t = 0; t < T; ++t) ASSERT_NEAR(fast[t], slow[t], 1e-10);
  }
}

TEST(Gae, SpecialCases) {
  const std::vector<double> r = {1.0, 2.0, 3.0};
  const std::vector<double> v = {0.5, 0.25, 0.125};
  const std::vector<std::uint8_t> none = {0, 0, 0};
  // lambda = 0: one-step TD errors.
  const auto td = gae(r, v, none, 0.9, 0.0, 2.0);
  EXPECT_DOUBLE_EQ(td[0], 1.0 + 0.9 * 0.25 - 0.5);
  EXPECT_DOUBLE_EQ(td[2], 3.0 + 0.9 * 2.0 - 0.125);
  // lambda = 1: discounted Monte-Carlo return minus the baseline.
  const auto mc = gae(r, v, none, 0.5, 1.0, 0.0);
  EXPECT_NEAR(mc[0], 1.0 + 0.5 * 2.0 + 0.25 * 3.0 - 0.5, 1e-15);
  // A termination cuts the recursion and ignores the bootstrap.
  const std::vector<std::uint8_t> end = {0, 0, 1};
  EXPECT_DOUBLE_EQ(gae(r, v, end, 0.9, 0.95, 100.0)[2], 3.0 - 0.125);
}

TEST(Gae, ValidatesInputs) {
  const std::vector<double> r = {1.0, 2.0};
  const std::vector<double> v = {0.0};
  const std::vector<std::uint8_t> d = {0, 0};
  EXPECT_THROW(gae(r, v, d, 0.9, 0.9), ShapeError);
  const std::vector<double> v2 = {0.0, 0.0};
  EXPECT_THROW(gae(r, v2, d, 1.5, 0.9), ParameterError);
  EXPECT_THROW(gae(r, v2, d, 0.9, -0.1), ParameterError);
}

struct Fixture {
  TrainerConfig cfg;
  PondWorld env;
  AgentParams agent;
  Fixture() : agent(make_agent(cfg, env)) {}
};

TEST(Collect, ExactStepCountAndDeterminism) {
  Fixture f;
  ValueFunctions vf{&f.agent.reward_critic, {}};
  const auto a = collect(f.agent.policy, f.env, 333, 5, vf);
  PondWorld other;
  const auto b = collect(f.agent.policy, other, 333, 5, vf);
  std::size_t steps = 0;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    steps += a[k].length();
    EXPECT_EQ(a[k].actions, b[k].actions);
    EXPECT_EQ(a[k].rewards, b[k].rewards);
    // dones mark termination only, on the last step.
    for (std::size_t t = 0; t + 1 < a[k].length(); ++t) EXPECT_EQ(a[k].dones[t], 0);
    EXPECT_EQ(a[k].dones.back(), a[k].terminated ? 1 : 0);
    EXPECT_EQ(a[k].values_r.size(), a[k].length());
  }
  EXPECT_EQ(steps, 333u);
  EXPECT_FALSE(a.back().finished && !a.back().terminated && !a.back().truncated);
  const auto c = collect(f.agent.policy, f.env, 333, 6, vf);
  EXPECT_NE(a.front().actions, c.front().actions);
}

TEST(Collect, CutTrajectoriesBootstrapFromTheCritic) {
  TrainerConfig cfg;
  PointMassConfig pc;
  pc.horizon = 10;
  PointMass env(pc);
  const AgentParams agent = make_agent(cfg, env);
  ValueFunctions vf{&agent.reward_critic, {}};
  const auto traj = collect(agent.policy, env, 25, 1, vf);
  ASSERT_EQ(traj.size(), 3u);
  EXPECT_TRUE(traj[0].truncated && traj[0].finished);
  EXPECT_FALSE(traj[2].finished);
  EXPECT_EQ(traj[2].length(), 5u);
  EXPECT_NE(traj[2].bootstrap_r, 0.0);
}

TEST(BuildBatch, NormalisationCentringAndCostEstimate) {
  Fixture f;
  std::vector<const Critic*> cost = {};
  const auto traj = collect(f.agent.policy, f.env, 800, 3,
                            ValueFunctions{&f.agent.reward_critic, {}});
  BatchOptions raw;
  raw.gamma = 0.95;
  raw.normalize_reward_advantages = false;
  const AdvantageBatch b = build_batch(traj, raw);
  EXPECT_EQ(b.size(), 800);
  EXPECT_EQ(b.num_costs(), 1);

  // Reward advantages normalised to zero mean and unit variance.
  BatchOptions norm = raw;
  norm.normalize_reward_advantages = true;
  norm.center_cost_advantages = true;
  const AdvantageBatch n = build_batch(traj, norm);
  EXPECT_NEAR(n.adv_r.mean(), 0.0, 1e-12);
  EXPECT_NEAR((n.adv_r.array() - n.adv_r.mean()).square().mean(), 1.0, 1e-9);
  // Cost advantages are only shifted, never rescaled.
  EXPECT_NEAR(n.adv_c.col(0).mean(), 0.0, 1e-12);
  const Vector shift = b.adv_c.col(0) - n.adv_c.col(0);
  EXPECT_NEAR(shift.maxCoeff() - shift.minCoeff(), 0.0, 1e-12);
  EXPECT_EQ(n.jc, b.jc);

  // Without a cost critic the uncentred cost advantage is the discounted
  // cost-to-go with GAE weights, i.e. exactly the raw estimator.
  const auto& t0 = traj.front();
  std::vector<double> c(t0.length()), zero(t0.length(), 0.0);
  for (std::size_t k = 0; k < t0.length(); ++k) c[k] = t0.costs(static_cast<Eigen::Index>(k), 0);
  const auto expect = gae(c, zero, t0.dones, 0.95, 0.95, 0.0);
  for (std::size_t k = 0; k < t0.length(); ++k) {
    EXPECT_EQ(b.adv_c(static_cast<Eigen::Index>(k), 0), expect[k]);
  }

  // Jc is the mean episodic cost over finished episodes.
  double total = 0.0;
  for (const auto& ec : b.episode_costs) total += ec[0];
  EXPECT_DOUBLE_EQ(b.jc[0], total / b.episodes);
}

TEST(BuildBatch, FallsBackToPartialEpisodesAndRejectsEmpty) {
  PondWorldConfig pc;
  pc.max_steps = 500;
  pc.water = {};
  pc.goal = {0, 4};
  PondWorld env(pc);
  TrainerConfig cfg;
  const AgentParams agent = make_agent(cfg, env);
  const auto traj = collect(agent.policy, env, 3, 0);
  const AdvantageBatch b = build_batch(traj, {});
  EXPECT_EQ(b.episodes, 0);
  EXPECT_EQ(b.jc[0], 0.0);
  EXPECT_THROW(build_batch({}, {}), EmptyBatchError);
}

}  // namespace
}  // namespace ip3o
