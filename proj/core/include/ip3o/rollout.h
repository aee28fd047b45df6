#ifndef IP3O_ROLLOUT_H_
#define IP3O_ROLLOUT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ip3o/diffcore.h"
#include "ip3o/envs.h"
#include "ip3o/policy.h"

namespace ip3o {

// One contiguous piece of an episode. `finished` is true when the episode
// ended inside the environment (termination or horizon truncation) rather
// than being cut by the end of the collection window.
struct Trajectory {
  Matrix observations;  // T x obs
  Matrix actions;       // T x action columns
  std::vector<double> log_probs;
  std::vector<double> rewards;
  Matrix costs;            // T x env costs
  std::vector<double> values_r;
  Matrix values_c;         // T x cost critics (may have 0 columns)
  std::vector<std::uint8_t> dones;  // 1 only on a terminating step
  bool terminated = false;
  bool truncated = false;
  bool finished = false;
  // Value of the state after the last step, used as bootstrap when the
  // trajectory did not terminate.
  double bootstrap_r = 0.0;
  std::vector<double> bootstrap_c;

  std::size_t length() const { return rewards.size(); }
};

// Optional value predictors recorded alongside each step.
struct ValueFunctions {
  const Critic* reward = nullptr;
  std::vector<const Critic*> costs;
};

// Runs `policy` in `env` for exactly `n_steps` environment steps. Episode
// resets use seeds derived from `seed`; actions are drawn from an independent
// stream derived from the same seed.
std::vector<Trajectory> collect(const Policy& policy, Env& env, int n_steps,
                                std::uint64_t seed, const ValueFunctions& values = {});

// Generalised advantage estimation by the backward recursion
//   delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// with V_T = bootstrap.
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const std::uint8_t> dones, double gamma, double lambda,
                        double bootstrap = 0.0);

struct AdvantageBatch {
  Matrix observations;
  Matrix actions;
  Vector old_log_probs;
  Vector adv_r;      // normalised
  Vector ret_r;
  Matrix adv_c;      // N x env costs, not normalised
  Matrix ret_c;      // N x env costs
  std::vector<double> jc;  // mean episodic cost per env cost signal
  int episodes = 0;        // finished episodes
  std::vector<double> episode_returns;
  std::vector<std::vector<double>> episode_costs;  // [episode][cost]

  Eigen::Index size() const { return old_log_probs.size(); }
  int num_costs() const { return static_cast<int>(adv_c.cols()); }
};

struct BatchOptions {
  double gamma = 0.99;
  double lambda = 0.95;
  double cost_lambda = 0.95;
  // Estimate Jc with gamma-discounted episode sums instead of plain sums.
  bool discounted_cost = false;
  bool normalize_reward_advantages = true;
  // Subtract the batch mean from each cost advantage column (no rescaling).
  bool center_cost_advantages = false;
};

inline constexpr double kAdvantageVarianceFloor = 1e-8;

// Throws EmptyBatchError for an empty trajectory list.
AdvantageBatch build_batch(const std::vector<Trajectory>& trajectories,
                           const BatchOptions& options);

}  // namespace ip3o

#endif  // IP3O_ROLLOUT_H_
