#ifndef IP3O_POLICY_H_
#define IP3O_POLICY_H_

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ip3o/checkpoint.h"
#include "ip3o/diffcore.h"
#include "ip3o/envs.h"
#include "ip3o/mlp.h"
#include "ip3o/rng.h"

namespace ip3o {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Stochastic policy over an environment's action space: a categorical head of
// logits for discrete actions, or a Gaussian with state-independent log-std
// for continuous ones. Actions are stored as rows; a discrete action is a
// single column holding the index.
class Policy {
 public:
  Policy() = default;
  Policy(const ActionSpace& space, int obs_size, const std::vector<int>& hidden, Rng& rng,
         double init_log_std = 0.0);

  bool discrete() const { return space_.kind == ActionKind::kDiscrete; }
  const ActionSpace& action_space() const { return space_; }
  int action_columns() const { return discrete() ? 1 : space_.size; }
  int observation_size() const { return trunk_.input_size(); }

  struct Sample {
    std::vector<double> action;      // as recorded (unclipped for Gaussians)
    std::vector<double> env_action;  // clipped into the action space
    double log_prob = 0.0;
  };
  Sample sample(std::span<const double> obs, Rng& rng) const;
  // Mean action (clipped) or argmax.
  std::vector<double> deterministic_action(std::span<const double> obs) const;

  double log_prob(std::span<const double> obs, std::span<const double> action) const;
  Vector log_prob(const Matrix& obs, const Matrix& actions) const;
  // Mean entropy over a batch of observations.
  double entropy(const Matrix& obs) const;

  struct Bound {
    Mlp::Bound trunk;
    Var log_std;
  };
  Bound bind(Tape& tape) const;
  // (rows x 1) log-probabilities recorded on the tape.
  Var log_prob(const Bound& params, Tape& tape, const Matrix& obs, const Matrix& actions) const;

  std::size_t num_params() const;
  void flatten_into(std::span<double> out) const;
  void assign_from(std::span<const double> in);
  void flat_grad_into(const Tape& tape, const Bound& params, std::span<double> out) const;
  std::vector<double> flat() const;

  const Mlp& trunk() const { return trunk_; }
  Mlp& trunk() { return trunk_; }
  const Matrix& log_std() const { return log_std_; }
  Matrix& log_std() { return log_std_; }

  nlohmann::json layout() const;

  bool operator==(const Policy& other) const {
    return trunk_ == other.trunk_ && log_std_ == other.log_std_;
  }

 private:
  Matrix clamped_log_std() const;

  ActionSpace space_;
  Mlp trunk_;
  Matrix log_std_;  // 1 x dims; empty for discrete policies
};

// Scalar state-value network.
class Critic {
 public:
  Critic() = default;
  Critic(int obs_size, const std::vector<int>& hidden, Rng& rng);

  double value(std::span<const double> obs) const;
  Vector values(const Matrix& obs) const;

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  bool operator==(const Critic& other) const { return net_ == other.net_; }

 private:
  Mlp net_;
};

// Policy plus reward critic plus one critic per active constraint.
struct AgentParams {
  Policy policy;
  Critic reward_critic;
  std::vector<Critic> cost_critics;
};

Checkpoint to_checkpoint(const AgentParams& agent);
// Throws ShapeError when the checkpoint layout differs from `like`.
void load_into(const Checkpoint& ckpt, AgentParams& like);

}  // namespace ip3o

#endif  // IP3O_POLICY_H_
