#ifndef IP3O_TRAINER_H_
#define IP3O_TRAINER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ip3o/adam.h"
#include "ip3o/envs.h"
#include "ip3o/losses.h"
#include "ip3o/policy.h"
#include "ip3o/rollout.h"

namespace ip3o {

struct TrainerConfig {
  Algo algo = Algo::kIp3o;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double cost_gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  ClipForm clip_form = ClipForm::kLiteral;
  double eta = 20.0;
  double alpha = 0.5;
  std::optional<double> h;
  // One budget per active constraint; constraint i reads env cost i.
  std::vector<double> cost_limits;
  int epochs = 500;
  int steps_per_epoch = 5000;
  int minibatch_size = 64;
  double policy_lr = kDefaultLearningRate;
  double value_lr = kDefaultLearningRate;
  int update_epochs = 10;
  int value_epochs = 10;
  double kl_lower = 0.0;
  double kl_upper = 0.02;
  // Global gradient-norm clip; disabled when unset.
  std::optional<double> grad_clip = 0.5;
  double lagrange_lr = 0.05;
  double lagrange_init = 0.0;
  double ipo_t = 20.0;
  std::vector<int> hidden_sizes = kDefaultHiddenSizes;
  double init_log_std = 0.0;
  bool discounted_cost = false;
  // Subtract the batch mean from cost advantages before the update.
  bool center_cost_advantages = true;
  std::uint64_t seed = 0;

  int num_constraints() const { return static_cast<int>(cost_limits.size()); }
  PenaltyConfig penalty() const;
  BatchOptions batch_options() const;
  // Throws ParameterError on out-of-range values.
  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  std::int64_t steps = 0;  // cumulative environment steps
  double mean_return = 0.0;
  std::vector<double> cost;  // mean episodic cost per env cost signal
  double violation_rate = 0.0;
  double loss_r = 0.0;
  std::vector<double> loss_c;  // per env cost signal; 0 for inactive ones
  double loss_total = 0.0;
  double kl = 0.0;
  int episodes = 0;
  int policy_passes = 0;
  std::vector<double> lagrange;
  bool ratio_capped = false;
  bool barrier_infeasible = false;
  bool nonfinite = false;
  // Bound ingredients, filled when the clamp parameter h is configured.
  std::optional<double> eps_r;
  std::vector<double> eps_c;
  std::optional<double> delta;
  std::optional<double> bound;
};

struct MetricsHistory {
  std::vector<EpochMetrics> rows;
};

struct PolicyUpdateResult {
  std::vector<LossReport> reports;
  double kl = 0.0;
  int passes = 0;
  bool nonfinite = false;
};

// Minibatch passes over `batch` on the combined loss, stopping early once
// the approximate KL to the data-collecting policy leaves
// [kl_lower, kl_upper]. On a non-finite loss or gradient the policy and
// optimiser state are restored and `nonfinite` is set.
PolicyUpdateResult policy_update(const AdvantageBatch& batch, Policy& policy, AdamState& adam,
                                 const TrainerConfig& cfg, const std::vector<double>& lagrange,
                                 Rng& shuffle);

// Mean of (r - 1) - log r over the batch, r = pi_new / pi_old.
double approx_kl(const Policy& policy, const AdvantageBatch& batch);

struct ValueUpdateResult {
  std::vector<double> final_loss;  // reward critic first, then cost critics
  bool nonfinite = false;
};

// Squared-error regression of each critic onto its returns. `cost_critics[i]`
// regresses onto batch.ret_c column i.
ValueUpdateResult value_update(const AdvantageBatch& batch, Critic& reward_critic,
                               std::vector<Critic>& cost_critics,
                               std::vector<AdamState>& adam, const TrainerConfig& cfg,
                               Rng& shuffle);

// max(0, lambda + lr * (jc - d))
double lagrange_update(double lambda, double jc, double d, double lr);

// Largest |mean advantage| over distinct observations in the batch.
double max_state_advantage(const Matrix& observations, const Vector& advantages);

// Error bound of the clamped penalized solution:
//   sqrt(2 delta) gamma eps_r / (1 - gamma)
//     + eta * sum_i [sqrt(2 delta) gamma eps_c_i / (1 - gamma) + |alpha log h|]
// Throws ParameterError unless 0 < h < alpha, delta >= 0 and gamma in (0,1).
double bound_value(double eps_r, const std::vector<double>& eps_c, double delta, double gamma,
                   double eta, double alpha, double h);

class Trainer {
 public:
  Trainer(TrainerConfig cfg, std::unique_ptr<Env> env);

  // One collect -> batch -> critic update -> policy update cycle.
  EpochMetrics run_epoch();
  // Runs the configured number of epochs. `on_epoch` sees each row as it is
  // produced; an exception aborts the run after the rows already delivered.
  MetricsHistory train(const std::function<void(const EpochMetrics&)>& on_epoch = {});

  const TrainerConfig& config() const { return cfg_; }
  const AgentParams& agent() const { return agent_; }
  AgentParams& agent() { return agent_; }
  const Env& env() const { return *env_; }
  int epoch() const { return epoch_; }
  const std::vector<double>& lagrange() const { return lagrange_; }

 private:
  TrainerConfig cfg_;
  std::unique_ptr<Env> env_;
  AgentParams agent_;
  AdamState policy_adam_;
  std::vector<AdamState> value_adam_;
  std::vector<double> lagrange_;
  int epoch_ = 0;
  std::int64_t steps_ = 0;
};

// Builds a fresh agent for `env` from the configured seed.
AgentParams make_agent(const TrainerConfig& cfg, const Env& env);

struct EvaluationResult {
  double mean_return = 0.0;
  std::vector<double> mean_cost;
  double violation_rate = 0.0;
  int episodes = 0;
};

// Runs the deterministic policy (mean action or argmax) for `episodes`
// episodes with seeds derived from `seed`.
EvaluationResult evaluate(const Policy& policy, Env& env, int episodes, std::uint64_t seed,
                          const std::vector<double>& cost_limits);

}  // namespace ip3o

#endif  // IP3O_TRAINER_H_
