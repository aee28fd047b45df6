#include <random>

#include <benchmark/benchmark.h>

#include "ip3o/envs.h"
#include "ip3o/losses.h"
#include "ip3o/oracle.h"
#include "ip3o/policy.h"
#include "ip3o/rollout.h"

namespace ip3o {
namespace {

// Forward and backward pass of the combined loss through a [64, 64] policy.
void BM_PolicyLossBackward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  Rng rng(1);
  const Policy policy({ActionKind::kDiscrete, 4, 0.0}, 25, {64, 64}, rng);
  std::uniform_int_distribution<int> cell(0, 24), act(0, 3);
  Matrix obs = Matrix::Zero(batch, 25);
  Matrix actions(batch, 1);
  for (int r = 0; r < batch; ++r) {
    obs(r, cell(rng)) = 1.0;
    actions(r, 0) = act(rng);
  }
  const Vector old_lp = policy.log_prob(obs, actions);
  const Vector adv = Vector::Random(batch);
  CombineOptions opts;
  for (auto _ : state) {
    Tape tape;
    const Policy::Bound b = policy.bind(tape);
    Var r = ratio(policy.log_prob(b, tape, obs, actions), old_lp);
    Var loss = combine_losses(reward_loss(r, adv, 0.2),
                              {cost_loss(r, adv, 0.5, 0.4, 0.99, 0.2)}, opts);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(b.trunk.weights[0]).data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_PolicyLossBackward)->Arg(64)->Arg(512);

void BM_Gae(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> r(n), v(n);
  std::vector<std::uint8_t> done(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    r[t] = d(rng);
    v[t] = d(rng);
    done[t] = t % 100 == 99;
  }
  for (auto _ : state) benchmark::DoNotOptimize(gae(r, v, done, 0.99, 0.95, 0.0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Gae)->Arg(5000);

void BM_ValueIterationPondWorld(benchmark::State& state) {
  const TabularCmdp m = PondWorld().as_tabular(0.95);
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(m, m.reward).values);
}
BENCHMARK(BM_ValueIterationPondWorld);

void BM_SolveDualPondWorld(benchmark::State& state) {
  const TabularCmdp m = PondWorld().as_tabular(0.95);
  for (auto _ : state) benchmark::DoNotOptimize(solve_dual(m, 0.3).j_r_star);
}
BENCHMARK(BM_SolveDualPondWorld);

void BM_CollectPointMass(benchmark::State& state) {
  Rng rng(3);
  const Policy policy({ActionKind::kContinuous, 1, 1.0}, 2, {64, 64}, rng);
  PointMass env;
  for (auto _ : state) benchmark::DoNotOptimize(collect(policy, env, 2000, 0).size());
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_CollectPointMass);

}  // namespace
}  // namespace ip3o

BENCHMARK_MAIN();
