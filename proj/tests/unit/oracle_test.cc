#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "ip3o/errors.h"
#include "ip3o/oracle.h"
#include "support.h"

namespace ip3o {
namespace {

// One state, two actions, gamma 0.9. Action 0 pays reward 1 and cost 1,
// action 1 pays nothing. With p = P(action 0): J_R = J_C = 10 p. For d = 5
// the optimum is p = 1/2 with J_R* = 5 and lambda* = 1.
TabularCmdp coin() {
  TabularCmdp m = TabularCmdp::zeros(1, 2, 1, 0.9);
  m.p(0, 0, 0) = 1.0;
  m.p(0, 1, 0) = 1.0;
  m.reward = {1.0, 0.0};
  m.cost[0] = {1.0, 0.0};
  return m;
}

TEST(ValueIteration, SolvesTheCoinInstanceAndBreaksTiesLow) {
  const TabularCmdp m = coin();
  const auto vi = value_iteration(m, m.reward);
  EXPECT_NEAR(vi.values[0], 10.0, 1e-9);
  EXPECT_EQ(vi.greedy[0], 0);
  const std::vector<double> flat = {0.0, 0.0};
  EXPECT_EQ(value_iteration(m, flat).greedy[0], 0);
}

TEST(EvaluatePolicy, OccupancyAdvantagesAndReturns) {
  Rng rng(5);
  const TabularCmdp m = random_cmdp(5, 3, 1, 0.9, rng);
  TabularPolicy pi = TabularPolicy::uniform(5, 3);
  pi.probs[0] = 0.6;
  pi.probs[1] = 0.3;
  pi.probs[2] = 0.1;
  const PolicyEvaluation ev = evaluate_policy(m, pi);
  EXPECT_NEAR(std::accumulate(ev.occupancy.begin(), ev.occupancy.end(), 0.0), 1.0, 1e-12);
  // J = (1 / (1 - gamma)) sum_s d(s) sum_a pi(a|s) r(s, a).
  double j = 0.0;
  for (int s = 0; s < 5; ++s) {
    double mean_adv = 0.0;
    for (int a = 0; a < 3; ++a) {
      j += ev.occupancy[s] * pi(s, a) * m.r(s, a) / (1.0 - m.gamma);
      mean_adv += pi(s, a) * ev.a_r[static_cast<std::size_t>(s * 3 + a)];
    }
    EXPECT_NEAR(mean_adv, 0.0, 1e-12);
  }
  EXPECT_NEAR(j, ev.j_r, 1e-10);
  EXPECT_NEAR(ev.j_r, policy_return(m, pi, m.reward), 1e-12);
}

TEST(SolveDual, CoinInstance) {
  const OracleSolution s = solve_dual(coin(), 5.0);
  ASSERT_TRUE(s.feasible);
  EXPECT_NEAR(s.j_r_star, 5.0, 1e-9);
  EXPECT_NEAR(s.j_c_star[0], 5.0, 1e-9);
  EXPECT_NEAR(s.lambda_star[0], 1.0, 1e-7);
  EXPECT_NEAR(s.policy_star(0, 0), 0.5, 1e-9);
}

TEST(SolveDual, SlackAndInfeasibleBudgets) {
  const OracleSolution slack = solve_dual(coin(), 20.0);
  EXPECT_TRUE(slack.feasible);
  EXPECT_EQ(slack.lambda_star[0], 0.0);
  EXPECT_NEAR(slack.j_r_star, 10.0, 1e-9);
  EXPECT_FALSE(solve_dual(coin(), -1.0).feasible);
}

TEST(SolveDual, AgreesWithEnumeration) {
  for (const auto& inst : testing::random_binding_instances(12, 4, 3, 21)) {
    const OracleSolution s = solve_dual(inst.cmdp, inst.d);
    const EnumerationResult e = solve_by_enumeration(inst.cmdp, inst.d, 1e-3, 100.0);
    EXPECT_NEAR(s.j_r_star, e.j_r_star, 1e-6) << inst.name;
    EXPECT_NEAR(s.lambda_star[0], e.lambda_grid, 1e-6) << inst.name;
    EXPECT_NEAR(s.j_c_star[0], inst.d, 1e-9) << inst.name;
  }
}

TEST(Surrogate, CoinOptimumSitsAtTheCeluStationaryPoint) {
  // For eta = 2, alpha = 0.5 the penalised optimum has J_C - d = alpha log(lambda*/eta).
  const SurrogateResult r = exact_surrogate_optimize(coin(), 5.0, 2.0, 0.5, {});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.j_c - 5.0, 0.5 * std::log(0.5), 1e-6);
  EXPECT_NEAR(r.objective, penalized_objective(r.j_r, r.j_c, 5.0, 2.0, 0.5, {}), 1e-12);
}

TEST(Surrogate, PenaltyBelowTheMultiplierViolatesTheBudget) {
  const SurrogateResult r = exact_surrogate_optimize(coin(), 5.0, 0.5, 1e-3, {});
  EXPECT_GT(r.j_c, 9.9);
}

TEST(Surrogate, ConstrainedOptimumIsOnlyNearlyPenalisedOptimal) {
  // The constrained optimum is not itself a minimiser of the penalised
  // objective, but it is within eta * alpha * (1 - h) of one.
  const double eta = 2.0, alpha = 0.5, h = 0.05;
  const OracleSolution s = solve_dual(coin(), 5.0);
  const double at_star = penalized_objective(s.j_r_star, s.j_c_star[0], 5.0, eta, alpha, h);
  const SurrogateResult r = exact_surrogate_optimize(coin(), 5.0, eta, alpha, h);
  EXPECT_LT(r.objective, at_star - 0.1);
  EXPECT_LE(at_star - r.objective, eta * alpha * (1.0 - h) + 1e-9);
  EXPECT_GE(r.j_r, s.j_r_star - eta * alpha * (1.0 - h) - 1e-9);
}

TEST(Bound, WorkedExampleAndValidation) {
  const BoundReport b = assemble_bound(1.0, {1.0}, 0.02, 0.9, 20.0, 1.0, 0.5);
  EXPECT_NEAR(b.bound, 51.6629436111989061883, 1e-9);
  EXPECT_THROW(assemble_bound(1.0, {1.0}, 0.02, 0.9, 20.0, 0.5, 0.5), ParameterError);
  EXPECT_THROW(assemble_bound(1.0, {1.0}, 0.02, 1.0, 20.0, 1.0, 0.5), ParameterError);
}

TEST(Bound, HoldsBetweenSurrogateIterateAndOracle) {
  for (const auto& inst : testing::random_binding_instances(6, 5, 3, 3)) {
    const OracleSolution s = solve_dual(inst.cmdp, inst.d);
    const double eta = 2.0 * s.lambda_star[0];
    const SurrogateResult r = exact_surrogate_optimize(inst.cmdp, inst.d, eta, 0.02, 0.01);
    const BoundReport b = bound_for(inst.cmdp, r.policy, s.policy_star, inst.d, eta, 0.02, 0.01);
    ASSERT_TRUE(b.observed_gap.has_value());
    EXPECT_TRUE(b.holds) << inst.name << " gap " << *b.observed_gap << " bound " << b.bound;
    EXPECT_GE(b.delta, 0.0);
  }
}

TEST(ExactPenalty, CoinReport) {
  const auto rep = verify_exact_penalty(coin(), 5.0, {0.5, 1.0, 2.0, 10.0}, 1e-3, {});
  ASSERT_TRUE(rep.applicable);
  ASSERT_EQ(rep.entries.size(), 4u);
  EXPECT_FALSE(rep.entries[0].required);
  EXPECT_FALSE(rep.entries[0].pass);
  EXPECT_TRUE(rep.entries[2].required && rep.entries[2].pass);
  EXPECT_TRUE(rep.entries[3].required && rep.entries[3].pass);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(to_json(rep)["verdict"], "PASS");
}

TEST(ExactPenalty, InactiveAndInfeasibleConstraints) {
  const auto slack = verify_exact_penalty(coin(), 20.0, {0.5, 2.0}, 1e-3, {});
  EXPECT_EQ(slack.solution.lambda_star[0], 0.0);
  EXPECT_TRUE(slack.pass);
  const auto infeasible = verify_exact_penalty(coin(), -1.0, {2.0}, 1e-3, {});
  EXPECT_FALSE(infeasible.applicable);
  EXPECT_EQ(to_json(infeasible)["verdict"], "not-applicable");
}

TEST(Tabular, RandomCmdpIsValid) {
  Rng rng(1);
  const TabularCmdp m = random_cmdp(6, 3, 2, 0.9, rng);
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.num_costs(), 2);
  TabularCmdp bad = m;
  bad.transition[0] += 0.1;
  EXPECT_THROW(bad.validate(), ParameterError);
}

}  // namespace
}  // namespace ip3o
