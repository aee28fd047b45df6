#include "ip3o/rollout.h"

#include <cmath>

#include "ip3o/errors.h"
#include "ip3o/rng.h"

namespace ip3o {
namespace {

struct Builder {
  std::vector<std::vector<double>> obs, act, costs, vc;
  Trajectory traj;

  void clear() {
    obs.clear();
    act.clear();
    costs.clear();
    vc.clear();
    traj = Trajectory{};
  }

  static Matrix stack(const std::vector<std::vector<double>>& rows, std::size_t cols) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    return m;
  }

  Trajectory finish(std::size_t obs_cols, std::size_t act_cols, std::size_t n_costs,
                    std::size_t n_vc) {
    traj.observations = stack(obs, obs_cols);
    traj.actions = stack(act, act_cols);
    traj.costs = stack(costs, n_costs);
    traj.values_c = stack(vc, n_vc);
    Trajectory out = std::move(traj);
    clear();
    return out;
  }
};

std::vector<double> predict_costs(const ValueFunctions& vf, std::span<const double> obs) {
  std::vector<double> out;
  out.reserve(vf.costs.size());
  for (const Critic* c : vf.costs) out.push_back(c->value(obs));
  return out;
}

}  // namespace

std::vector<Trajectory> collect(const Policy& policy, Env& env, int n_steps,
                                std::uint64_t seed, const ValueFunctions& values) {
  if (n_steps < 1) throw ParameterError("collect needs n_steps >= 1");
  Rng action_rng = make_rng(seed, Stream::kActions);
  std::uint64_t episode = 0;
  const auto obs_cols = static_cast<std::size_t>(env.observation_size());
  const auto act_cols = static_cast<std::size_t>(policy.action_columns());
  const auto n_costs = static_cast<std::size_t>(env.num_costs());
  const std::size_t n_vc = values.costs.size();

  std::vector<Trajectory> out;
  Builder b;
  std::vector<double> obs = env.reset(derive_seed(seed, Stream::kEnv, episode++));
  for (int t = 0; t < n_steps; ++t) {
    const Policy::Sample s = policy.sample(obs, action_rng);
    b.obs.push_back(obs);
    b.act.push_back(s.action);
    b.traj.log_probs.push_back(s.log_prob);
    b.traj.values_r.push_back(values.reward ? values.reward->value(obs) : 0.0);
    b.vc.push_back(predict_costs(values, obs));

    CmdpStep step = env.step(s.env_action);
    b.traj.rewards.push_back(step.reward);
    b.costs.push_back(step.costs);
    b.traj.dones.push_back(step.terminated ? 1 : 0);

    const bool last = t + 1 == n_steps;
    if (step.terminated || step.truncated || last) {
      b.traj.terminated = step.terminated;
      b.traj.truncated = step.truncated || (!step.terminated && last);
      b.traj.finished = step.terminated || step.truncated;
      if (!step.terminated) {
        b.traj.bootstrap_r = values.reward ? values.reward->value(step.observation) : 0.0;
        b.traj.bootstrap_c = predict_costs(values, step.observation);
      } else {
        b.traj.bootstrap_c.assign(n_vc, 0.0);
      }
      out.push_back(b.finish(obs_cols, act_cols, n_costs, n_vc));
      if (!last) obs = env.reset(derive_seed(seed, Stream::kEnv, episode++));
    } else {
      obs = std::move(step.observation);
    }
  }
  return out;
}

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const std::uint8_t> dones, double gamma, double lambda,
                        double bootstrap) {
  if (rewards.size() != values.size() || rewards.size() != dones.size()) {
    throw ShapeError("gae: rewards, values and done flags must have equal length");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0)) {
    throw ParameterError("gae: gamma and lambda must lie in [0, 1]");
  }
  const std::size_t n = rewards.size();
  std::vector<double> adv(n, 0.0);
  double next_value = bootstrap;
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double nonterminal = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * nonterminal - values[k];
    next_adv = delta + gamma * lambda * nonterminal * next_adv;
    adv[k] = next_adv;
    next_value = values[k];
  }
  return adv;
}

AdvantageBatch build_batch(const std::vector<Trajectory>& trajectories,
                           const BatchOptions& options) {
  Eigen::Index n = 0;
  for (const auto& t : trajectories) n += static_cast<Eigen::Index>(t.length());
  if (trajectories.empty() || n == 0) throw EmptyBatchError("build_batch: no transitions");

  const Trajectory& first = trajectories.front();
  const Eigen::Index obs_cols = first.observations.cols();
  const Eigen::Index act_cols = first.actions.cols();
  const Eigen::Index n_costs = first.costs.cols();

  AdvantageBatch b;
  b.observations.resize(n, obs_cols);
  b.actions.resize(n, act_cols);
  b.old_log_probs.resize(n);
  b.adv_r.resize(n);
  b.ret_r.resize(n);
  b.adv_c.resize(n, n_costs);
  b.ret_c.resize(n, n_costs);
  b.jc.assign(static_cast<std::size_t>(n_costs), 0.0);

  std::vector<std::vector<double>> partial_costs;
  Eigen::Index row = 0;
  for (const auto& t : trajectories) {
    const auto len = static_cast<Eigen::Index>(t.length());
    b.observations.middleRows(row, len) = t.observations;
    b.actions.middleRows(row, len) = t.actions;
    for (Eigen::Index k = 0; k < len; ++k) {
      b.old_log_probs(row + k) = t.log_probs[static_cast<std::size_t>(k)];
    }

    const auto adv = gae(t.rewards, t.values_r, t.dones, options.gamma, options.lambda,
                         t.terminated ? 0.0 : t.bootstrap_r);
    for (Eigen::Index k = 0; k < len; ++k) {
      b.adv_r(row + k) = adv[static_cast<std::size_t>(k)];
      b.ret_r(row + k) = adv[static_cast<std::size_t>(k)] + t.values_r[static_cast<std::size_t>(k)];
    }

    std::vector<double> episode_cost(static_cast<std::size_t>(n_costs), 0.0);
    for (Eigen::Index i = 0; i < n_costs; ++i) {
      const bool has_critic = i < t.values_c.cols();
      std::vector<double> c(static_cast<std::size_t>(len)), v(static_cast<std::size_t>(len), 0.0);
      double discount = 1.0;
      for (Eigen::Index k = 0; k < len; ++k) {
        c[static_cast<std::size_t>(k)] = t.costs(k, i);
        if (has_critic) v[static_cast<std::size_t>(k)] = t.values_c(k, i);
        episode_cost[static_cast<std::size_t>(i)] +=
            options.discounted_cost ? discount * t.costs(k, i) : t.costs(k, i);
        discount *= options.gamma;
      }
      const double boot =
          (t.terminated || !has_critic) ? 0.0 : t.bootstrap_c[static_cast<std::size_t>(i)];
      const auto ac = gae(c, v, t.dones, options.gamma, options.cost_lambda, boot);
      for (Eigen::Index k = 0; k < len; ++k) {
        b.adv_c(row + k, i) = ac[static_cast<std::size_t>(k)];
        b.ret_c(row + k, i) = ac[static_cast<std::size_t>(k)] + v[static_cast<std::size_t>(k)];
      }
    }

    if (t.finished) {
      double ret = 0.0;
      for (double r : t.rewards) ret += r;
      b.episode_returns.push_back(ret);
      b.episode_costs.push_back(episode_cost);
    } else {
      partial_costs.push_back(episode_cost);
    }
    row += len;
  }

  b.episodes = static_cast<int>(b.episode_returns.size());
  // Without a finished episode fall back to the partial ones.
  const auto& source = b.episodes > 0 ? b.episode_costs : partial_costs;
  for (const auto& ec : source) {
    for (std::size_t i = 0; i < ec.size(); ++i) b.jc[i] += ec[i];
  }
  for (double& j : b.jc) j /= static_cast<double>(source.size());

  if (options.normalize_reward_advantages) {
    const double mean = b.adv_r.mean();
    const double var = (b.adv_r.array() - mean).square().mean();
    const double sd = std::sqrt(std::max(var, kAdvantageVarianceFloor));
    b.adv_r = ((b.adv_r.array() - mean) / sd).matrix();
  }
  if (options.center_cost_advantages) {
    for (Eigen::Index i = 0; i < b.adv_c.cols(); ++i) {
      b.adv_c.col(i).array() -= b.adv_c.col(i).mean();
    }
  }
  return b;
}

}  // namespace ip3o
