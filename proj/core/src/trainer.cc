#include "ip3o/trainer.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ip3o/errors.h"

namespace ip3o {
namespace {

Matrix take_rows(const Matrix& m, std::span<const int> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(idx[r]);
  return out;
}

Vector take(const Vector& v, std::span<const int> idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(idx[r]);
  return out;
}

std::vector<int> shuffled(Eigen::Index n, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  // Fisher-Yates with our own index draws so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Gradient step on flat parameters; false when the gradient is non-finite.
bool apply_step(std::vector<double>& params, std::vector<double>& grads, AdamState& adam,
                double lr, const std::optional<double>& grad_clip) {
  if (!all_finite(grads)) return false;
  if (grad_clip) clip_grad_norm(grads, *grad_clip);
  adam_step(params, grads, adam, lr);
  return all_finite(params);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

PenaltyConfig TrainerConfig::penalty() const {
  PenaltyConfig p;
  p.alpha = alpha;
  p.h = h;
  p.eta = eta;
  p.t = ipo_t;
  return p;
}

BatchOptions TrainerConfig::batch_options() const {
  BatchOptions o;
  o.gamma = gamma;
  o.lambda = gae_lambda;
  o.cost_lambda = cost_gae_lambda;
  o.discounted_cost = discounted_cost;
  o.center_cost_advantages = center_cost_advantages;
  return o;
}

void TrainerConfig::validate() const {
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
  if (!in01(gae_lambda) || !in01(cost_gae_lambda)) {
    throw ParameterError("GAE lambdas must lie in [0, 1]");
  }
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw ParameterError("clip_epsilon must lie in (0, 1)");
  }
  penalty().validate();
  if (epochs < 0) throw ParameterError("epochs must be >= 0");
  if (steps_per_epoch < 1) throw ParameterError("steps_per_epoch must be >= 1");
  if (minibatch_size < 1) throw ParameterError("minibatch_size must be >= 1");
  if (!(policy_lr >= 0.0) || !(value_lr >= 0.0)) {
    throw ParameterError("learning rates must be >= 0");
  }
  if (update_epochs < 0 || value_epochs < 0) throw ParameterError("pass counts must be >= 0");
  if (!(kl_lower <= kl_upper)) throw ParameterError("kl_lower must not exceed kl_upper");
  if (grad_clip && !(*grad_clip > 0.0)) throw ParameterError("grad_clip must be positive");
  if (!(lagrange_lr >= 0.0) || !(lagrange_init >= 0.0)) {
    throw ParameterError("lagrange settings must be >= 0");
  }
  for (int s : hidden_sizes) {
    if (s < 1) throw ParameterError("hidden sizes must be positive");
  }
  for (double d : cost_limits) {
    if (!std::isfinite(d)) throw ParameterError("cost limits must be finite");
  }
}

double approx_kl(const Policy& policy, const AdvantageBatch& batch) {
  if (batch.size() == 0) return 0.0;
  const Vector lp = policy.log_prob(batch.observations, batch.actions);
  double total = 0.0;
  for (Eigen::Index i = 0; i < lp.size(); ++i) {
    const double d = lp(i) - batch.old_log_probs(i);
    total += std::expm1(d) - d;
  }
  return total / static_cast<double>(lp.size());
}

PolicyUpdateResult policy_update(const AdvantageBatch& batch, Policy& policy, AdamState& adam,
                                 const TrainerConfig& cfg, const std::vector<double>& lagrange,
                                 Rng& shuffle) {
  if (batch.size() == 0) throw EmptyBatchError("policy update on an empty batch");
  const int m = cfg.num_constraints();
  if (m > batch.num_costs()) {
    throw ShapeError("more cost limits than environment cost signals");
  }
  PolicyUpdateResult result;
  const std::vector<double> saved_params = policy.flat();
  const AdamState saved_adam = adam;
  std::vector<double> params = saved_params;
  std::vector<double> grads(params.size());

  CombineOptions combine;
  combine.algo = cfg.algo;
  combine.penalty = cfg.penalty();
  combine.lagrange = lagrange;

  const auto mb = static_cast<std::size_t>(cfg.minibatch_size);
  for (int pass = 0; pass < cfg.update_epochs; ++pass) {
    const std::vector<int> order = shuffled(batch.size(), shuffle);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::span<const int> idx(order.data() + start, std::min(mb, order.size() - start));
      Tape tape;
      const Policy::Bound bound = policy.bind(tape);
      const Var new_lp = policy.log_prob(bound, tape, take_rows(batch.observations, idx),
                                         take_rows(batch.actions, idx));
      const Vector old_lp = take(batch.old_log_probs, idx);
      const Var r = ratio(new_lp, old_lp);
      const Var lr = reward_loss(r, take(batch.adv_r, idx), cfg.clip_epsilon, cfg.clip_form);
      std::vector<Var> lc;
      for (int i = 0; i < m; ++i) {
        lc.push_back(cost_loss(r, take(Vector(batch.adv_c.col(i)), idx),
                               batch.jc[static_cast<std::size_t>(i)],
                               cfg.cost_limits[static_cast<std::size_t>(i)], cfg.gamma,
                               cfg.clip_epsilon, cfg.clip_form));
      }
      LossReport report;
      const Var total = combine_losses(lr, lc, combine, &report);
      report.jc.assign(batch.jc.begin(), batch.jc.begin() + m);
      for (Eigen::Index k = 0; k < new_lp.rows(); ++k) {
        if (ratio_capped(new_lp.value()(k, 0), old_lp(k))) report.ratio_capped = true;
      }
      bool ok = std::isfinite(report.total);
      if (ok) {
        try {
          tape.backward(total);
          policy.flat_grad_into(tape, bound, grads);
          ok = apply_step(params, grads, adam, cfg.policy_lr, cfg.grad_clip);
        } catch (const NumericError&) {
          ok = false;
        }
      }
      if (!ok) {
        policy.assign_from(saved_params);
        adam = saved_adam;
        result.nonfinite = true;
        return result;
      }
      policy.assign_from(params);
      result.reports.push_back(std::move(report));
    }
    ++result.passes;
    result.kl = approx_kl(policy, batch);
    if (!std::isfinite(result.kl)) {
      policy.assign_from(saved_params);
      adam = saved_adam;
      result.nonfinite = true;
      return result;
    }
    if (result.kl < cfg.kl_lower || result.kl > cfg.kl_upper) break;
  }
  return result;
}

ValueUpdateResult value_update(const AdvantageBatch& batch, Critic& reward_critic,
                               std::vector<Critic>& cost_critics,
                               std::vector<AdamState>& adam, const TrainerConfig& cfg,
                               Rng& shuffle) {
  if (batch.size() == 0) throw EmptyBatchError("value update on an empty batch");
  if (static_cast<Eigen::Index>(cost_critics.size()) > batch.num_costs()) {
    throw ShapeError("more cost critics than environment cost signals");
  }
  std::vector<Critic*> critics{&reward_critic};
  std::vector<Vector> targets{batch.ret_r};
  for (std::size_t i = 0; i < cost_critics.size(); ++i) {
    critics.push_back(&cost_critics[i]);
    targets.push_back(batch.ret_c.col(static_cast<Eigen::Index>(i)));
  }
  if (adam.size() != critics.size()) {
    throw ShapeError("value update needs one optimiser state per critic");
  }

  ValueUpdateResult result;
  result.final_loss.assign(critics.size(), 0.0);
  std::vector<std::vector<double>> saved;
  for (Critic* c : critics) {
    saved.emplace_back(c->net().num_params());
    c->net().flatten_into(saved.back());
  }
  const std::vector<AdamState> saved_adam = adam;
  auto restore = [&] {
    for (std::size_t k = 0; k < critics.size(); ++k) critics[k]->net().assign_from(saved[k]);
    adam = saved_adam;
    result.nonfinite = true;
  };

  const auto mb = static_cast<std::size_t>(cfg.minibatch_size);
  for (int pass = 0; pass < cfg.value_epochs; ++pass) {
    const std::vector<int> order = shuffled(batch.size(), shuffle);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::span<const int> idx(order.data() + start, std::min(mb, order.size() - start));
      const Matrix obs = take_rows(batch.observations, idx);
      for (std::size_t k = 0; k < critics.size(); ++k) {
        Mlp& net = critics[k]->net();
        Tape tape;
        const Mlp::Bound bound = net.bind(tape);
        const Var pred = net.forward(bound, tape.constant(obs));
        const Var loss = mean(square(sub(pred, tape.constant(Matrix(take(targets[k], idx))))));
        result.final_loss[k] = loss.scalar();
        std::vector<double> params(net.num_params());
        std::vector<double> grads(params.size());
        net.flatten_into(params);
        bool ok = std::isfinite(loss.scalar());
        if (ok) {
          try {
            tape.backward(loss);
            net.flat_grad_into(tape, bound, grads);
            ok = apply_step(params, grads, adam[k], cfg.value_lr, cfg.grad_clip);
          } catch (const NumericError&) {
            ok = false;
          }
        }
        if (!ok) {
          restore();
          return result;
        }
        net.assign_from(params);
      }
    }
  }
  return result;
}

double lagrange_update(double lambda, double jc, double d, double lr) {
  return std::max(0.0, lambda + lr * (jc - d));
}

double max_state_advantage(const Matrix& observations, const Vector& advantages) {
  std::map<std::vector<double>, std::pair<double, int>> groups;
  for (Eigen::Index r = 0; r < observations.rows(); ++r) {
    std::vector<double> key(observations.row(r).data(),
                            observations.row(r).data() + observations.cols());
    auto& g = groups[key];
    g.first += advantages(r);
    g.second += 1;
  }
  double best = 0.0;
  for (const auto& [key, g] : groups) best = std::max(best, std::abs(g.first / g.second));
  return best;
}

double bound_value(double eps_r, const std::vector<double>& eps_c, double delta, double gamma,
                   double eta, double alpha, double h) {
  if (!(delta >= 0.0)) throw ParameterError("bound needs delta >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("bound needs gamma in (0, 1)");
  const double floor_term = std::abs(stagnation_threshold(alpha, h));
  const double k = std::sqrt(2.0 * delta) * gamma / (1.0 - gamma);
  double sum = 0.0;
  for (double e : eps_c) sum += k * e + floor_term;
  return k * eps_r + eta * sum;
}

AgentParams make_agent(const TrainerConfig& cfg, const Env& env) {
  AgentParams agent;
  Rng policy_rng = make_rng(cfg.seed, Stream::kPolicyInit);
  agent.policy = Policy(env.action_space(), env.observation_size(), cfg.hidden_sizes,
                        policy_rng, cfg.init_log_std);
  Rng critic_rng = make_rng(cfg.seed, Stream::kCriticInit, 0);
  agent.reward_critic = Critic(env.observation_size(), cfg.hidden_sizes, critic_rng);
  for (int i = 0; i < cfg.num_constraints(); ++i) {
    Rng rng = make_rng(cfg.seed, Stream::kCriticInit, static_cast<std::uint64_t>(i) + 1);
    agent.cost_critics.emplace_back(env.observation_size(), cfg.hidden_sizes, rng);
  }
  return agent;
}

Trainer::Trainer(TrainerConfig cfg, std::unique_ptr<Env> env)
    : cfg_(std::move(cfg)), env_(std::move(env)) {
  if (!env_) throw ParameterError("trainer needs an environment");
  cfg_.validate();
  if (cfg_.num_constraints() > env_->num_costs()) {
    throw ParameterError("cost_limits has more entries than the environment has costs");
  }
  agent_ = make_agent(cfg_, *env_);
  policy_adam_ = AdamState(agent_.policy.num_params());
  value_adam_.emplace_back(agent_.reward_critic.net().num_params());
  for (const auto& c : agent_.cost_critics) value_adam_.emplace_back(c.net().num_params());
  lagrange_.assign(static_cast<std::size_t>(cfg_.num_constraints()), cfg_.lagrange_init);
}

EpochMetrics Trainer::run_epoch() {
  const auto e = static_cast<std::uint64_t>(epoch_);
  ValueFunctions vf;
  vf.reward = &agent_.reward_critic;
  for (const auto& c : agent_.cost_critics) vf.costs.push_back(&c);
  const auto trajectories = collect(agent_.policy, *env_, cfg_.steps_per_epoch,
                                    derive_seed(cfg_.seed, Stream::kEnv, e), vf);
  const AdvantageBatch batch = build_batch(trajectories, cfg_.batch_options());
  Rng shuffle = make_rng(cfg_.seed, Stream::kShuffle, e);

  EpochMetrics row;
  row.epoch = epoch_;
  steps_ += batch.size();
  row.steps = steps_;
  row.episodes = batch.episodes;
  row.cost = batch.jc;
  if (batch.episodes > 0) {
    row.mean_return = mean_of(batch.episode_returns);
  } else {
    std::vector<double> partial;
    for (const auto& t : trajectories) {
      partial.push_back(std::accumulate(t.rewards.begin(), t.rewards.end(), 0.0));
    }
    row.mean_return = mean_of(partial);
  }
  const int m = cfg_.num_constraints();
  if (m > 0 && !batch.episode_costs.empty()) {
    int violated = 0;
    for (const auto& ec : batch.episode_costs) {
      for (int i = 0; i < m; ++i) {
        if (ec[static_cast<std::size_t>(i)] > cfg_.cost_limits[static_cast<std::size_t>(i)]) {
          ++violated;
          break;
        }
      }
    }
    row.violation_rate = static_cast<double>(violated) / batch.episode_costs.size();
  }

  const ValueUpdateResult vr =
      value_update(batch, agent_.reward_critic, agent_.cost_critics, value_adam_, cfg_, shuffle);

  if (cfg_.algo == Algo::kPpoLagrangian) {
    for (int i = 0; i < m; ++i) {
      const auto k = static_cast<std::size_t>(i);
      lagrange_[k] = lagrange_update(lagrange_[k], batch.jc[k], cfg_.cost_limits[k],
                                     cfg_.lagrange_lr);
    }
  }
  row.lagrange = lagrange_;

  const PolicyUpdateResult pr =
      policy_update(batch, agent_.policy, policy_adam_, cfg_, lagrange_, shuffle);
  row.kl = pr.kl;
  row.policy_passes = pr.passes;
  row.nonfinite = vr.nonfinite || pr.nonfinite;
  row.loss_c.assign(static_cast<std::size_t>(batch.num_costs()), 0.0);
  if (!pr.reports.empty()) {
    const double n = static_cast<double>(pr.reports.size());
    for (const auto& rep : pr.reports) {
      row.loss_r += rep.loss_r / n;
      row.loss_total += rep.total / n;
      for (std::size_t i = 0; i < rep.loss_c.size(); ++i) row.loss_c[i] += rep.loss_c[i] / n;
      row.ratio_capped = row.ratio_capped || rep.ratio_capped;
      row.barrier_infeasible = row.barrier_infeasible || rep.barrier_infeasible;
    }
  }

  if (cfg_.h && *cfg_.h < cfg_.alpha) {
    row.eps_r = max_state_advantage(batch.observations, batch.adv_r);
    for (int i = 0; i < m; ++i) {
      row.eps_c.push_back(max_state_advantage(batch.observations, batch.adv_c.col(i)));
    }
    row.delta = std::max(0.0, pr.kl);
    row.bound = bound_value(*row.eps_r, row.eps_c, *row.delta, cfg_.gamma, cfg_.eta,
                            cfg_.alpha, *cfg_.h);
  }
  ++epoch_;
  return row;
}

MetricsHistory Trainer::train(const std::function<void(const EpochMetrics&)>& on_epoch) {
  MetricsHistory history;
  while (epoch_ < cfg_.epochs) {
    EpochMetrics row = run_epoch();
    if (on_epoch) on_epoch(row);
    history.rows.push_back(std::move(row));
  }
  return history;
}

EvaluationResult evaluate(const Policy& policy, Env& env, int episodes, std::uint64_t seed,
                          const std::vector<double>& cost_limits) {
  if (episodes < 1) throw ParameterError("evaluate needs at least one episode");
  EvaluationResult out;
  out.episodes = episodes;
  out.mean_cost.assign(static_cast<std::size_t>(env.num_costs()), 0.0);
  int violated = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<double> obs =
        env.reset(derive_seed(seed, Stream::kEval, static_cast<std::uint64_t>(ep)));
    double ret = 0.0;
    std::vector<double> cost(out.mean_cost.size(), 0.0);
    while (true) {
      CmdpStep step = env.step(policy.deterministic_action(obs));
      ret += step.reward;
      for (std::size_t i = 0; i < cost.size(); ++i) cost[i] += step.costs[i];
      if (step.terminated || step.truncated) break;
      obs = std::move(step.observation);
    }
    out.mean_return += ret / episodes;
    for (std::size_t i = 0; i < cost.size(); ++i) out.mean_cost[i] += cost[i] / episodes;
    for (std::size_t i = 0; i < cost_limits.size() && i < cost.size(); ++i) {
      if (cost[i] > cost_limits[i]) {
        ++violated;
        break;
      }
    }
  }
  out.violation_rate = static_cast<double>(violated) / episodes;
  return out;
}

}  // namespace ip3o
