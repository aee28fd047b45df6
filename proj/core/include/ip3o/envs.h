#ifndef IP3O_ENVS_H_
#define IP3O_ENVS_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ip3o/rng.h"
#include "ip3o/tabular.h"

namespace ip3o {

struct CmdpStep {
  std::vector<double> observation;
  double reward = 0.0;
  std::vector<double> costs;
  bool terminated = false;
  bool truncated = false;
};

enum class ActionKind { kDiscrete, kContinuous };

struct ActionSpace {
  ActionKind kind = ActionKind::kDiscrete;
  // Number of choices (discrete) or dimensions (continuous).
  int size = 0;
  // Per-axis magnitude bound for continuous actions.
  double bound = 0.0;
};

// A constrained environment. Discrete actions are passed as a one-element
// array holding the action index.
class Env {
 public:
  virtual ~Env() = default;

  virtual std::string name() const = 0;
  // Redraws the initial state and reseeds the environment's own RNG.
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  // Throws DomainError for actions outside the action space.
  virtual CmdpStep step(std::span<const double> action) = 0;

  virtual int observation_size() const = 0;
  virtual ActionSpace action_space() const = 0;
  virtual int num_costs() const = 0;
  // Maximum episode length before truncation.
  virtual int horizon() const = 0;
  // Upper bound on each per-step cost.
  virtual std::vector<double> cost_bounds() const = 0;

  virtual std::unique_ptr<Env> clone() const = 0;

  // Exact tabular model of the environment. Throws UnsupportedError when the
  // environment has no finite representation.
  virtual TabularCmdp as_tabular(double gamma) const;
};

using Cell = std::pair<int, int>;  // (row, col)

struct PondWorldConfig {
  int rows = 5;
  int cols = 5;
  Cell start = {2, 0};
  Cell goal = {2, 4};
  std::vector<Cell> water = {{2, 1}, {2, 2}, {2, 3}};
  double slip = 0.2;
  double step_reward = -0.01;
  double goal_reward = 1.0;
  double water_cost = 1.0;
  int max_steps = 100;

  void validate() const;
};

// Gridworld with a pond between start and goal. Actions: 0 up, 1 right,
// 2 down, 3 left. The intended move happens with probability 1 - slip,
// otherwise one of the two perpendicular moves, each with probability slip/2.
// Moves off the grid leave the agent in place. Entering water costs
// `water_cost` and terminates; reaching the goal pays `goal_reward` and
// terminates; every step pays `step_reward`.
class PondWorld final : public Env {
 public:
  explicit PondWorld(PondWorldConfig cfg = {});

  std::string name() const override { return "pondworld"; }
  std::vector<double> reset(std::uint64_t seed) override;
  CmdpStep step(std::span<const double> action) override;
  CmdpStep step(int action);

  int observation_size() const override { return cfg_.rows * cfg_.cols; }
  ActionSpace action_space() const override { return {ActionKind::kDiscrete, 4, 0.0}; }
  int num_costs() const override { return 1; }
  int horizon() const override { return cfg_.max_steps; }
  std::vector<double> cost_bounds() const override { return {cfg_.water_cost}; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<PondWorld>(*this); }
  TabularCmdp as_tabular(double gamma) const override;

  const PondWorldConfig& config() const { return cfg_; }
  int state_index(Cell c) const { return c.first * cfg_.cols + c.second; }
  int current_state() const { return state_index(pos_); }
  bool is_water(Cell c) const;

  // Cell reached by moving in `direction` from `from` (no slip).
  Cell move(Cell from, int direction) const;

 private:
  std::vector<double> observe() const;

  PondWorldConfig cfg_;
  Cell pos_;
  int t_ = 0;
  bool done_ = false;
  Rng rng_;
};

struct PointMassConfig {
  double dt = 0.1;
  double max_accel = 1.0;
  double velocity_limit = 1.0;
  int horizon = 50;
  double reward_scale = 1.0;

  void validate() const;
};

// One-dimensional point mass. Observation [position, velocity]; the action is
// an acceleration in [-max_accel, max_accel]. Reward is reward_scale times
// the new velocity; cost is 1 whenever |velocity| exceeds the limit.
class PointMass final : public Env {
 public:
  explicit PointMass(PointMassConfig cfg = {});

  std::string name() const override { return "point_mass"; }
  std::vector<double> reset(std::uint64_t seed) override;
  CmdpStep step(std::span<const double> action) override;

  int observation_size() const override { return 2; }
  ActionSpace action_space() const override {
    return {ActionKind::kContinuous, 1, cfg_.max_accel};
  }
  int num_costs() const override { return 1; }
  int horizon() const override { return cfg_.horizon; }
  std::vector<double> cost_bounds() const override { return {1.0}; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<PointMass>(*this); }

  const PointMassConfig& config() const { return cfg_; }
  void set_state(double position, double velocity);

 private:
  PointMassConfig cfg_;
  double x_ = 0.0;
  double v_ = 0.0;
  int t_ = 0;
  Rng rng_;
};

}  // namespace ip3o

#endif  // IP3O_ENVS_H_
