#include "ip3o/envs.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ip3o/errors.h"

namespace ip3o {
namespace {

constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};

// The two directions perpendicular to `dir`, in a fixed order.
std::pair<int, int> perpendicular(int dir) { return {(dir + 1) % 4, (dir + 3) % 4}; }

}  // namespace

TabularCmdp Env::as_tabular(double /*gamma*/) const {
  throw UnsupportedError(name() + " has no tabular representation");
}

void PondWorldConfig::validate() const {
  if (rows <= 0 || cols <= 0) throw ParameterError("pondworld grid must be non-empty");
  auto inside = [&](Cell c) {
    return c.first >= 0 && c.first < rows && c.second >= 0 && c.second < cols;
  };
  if (!inside(start) || !inside(goal)) throw ParameterError("start/goal outside the grid");
  if (start == goal) throw ParameterError("start and goal coincide");
  for (const Cell& w : water) {
    if (!inside(w)) throw ParameterError("water cell outside the grid");
    if (w == start || w == goal) throw ParameterError("start and goal must be dry");
  }
  if (!(slip >= 0.0 && slip < 1.0)) throw ParameterError("slip must lie in [0, 1)");
  if (!(water_cost >= 0.0)) throw ParameterError("water cost must be non-negative");
  if (max_steps < 1) throw ParameterError("max_steps must be at least 1");
}

PondWorld::PondWorld(PondWorldConfig cfg) : cfg_(std::move(cfg)), pos_(cfg_.start) {
  cfg_.validate();
}

bool PondWorld::is_water(Cell c) const {
  return std::find(cfg_.water.begin(), cfg_.water.end(), c) != cfg_.water.end();
}

Cell PondWorld::move(Cell from, int direction) const {
  const Cell to{from.first + kDr[direction], from.second + kDc[direction]};
  if (to.first < 0 || to.first >= cfg_.rows || to.second < 0 || to.second >= cfg_.cols) {
    return from;
  }
  return to;
}

std::vector<double> PondWorld::observe() const {
  std::vector<double> obs(static_cast<std::size_t>(observation_size()), 0.0);
  obs[static_cast<std::size_t>(state_index(pos_))] = 1.0;
  return obs;
}

std::vector<double> PondWorld::reset(std::uint64_t seed) {
  rng_.seed(seed);
  pos_ = cfg_.start;
  t_ = 0;
  done_ = false;
  return observe();
}

CmdpStep PondWorld::step(std::span<const double> action) {
  if (action.size() != 1) throw DomainError("pondworld expects a single action index");
  const double a = action[0];
  if (a != std::floor(a) || a < 0.0 || a > 3.0) {
    throw DomainError("pondworld action must be an integer in [0, 3]");
  }
  return step(static_cast<int>(a));
}

CmdpStep PondWorld::step(int action) {
  if (action < 0 || action > 3) throw DomainError("pondworld action must be in [0, 3]");
  if (done_) throw DomainError("episode has finished; call reset()");

  int dir = action;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (cfg_.slip > 0.0 && unif(rng_) < cfg_.slip) {
    const auto [p, q] = perpendicular(action);
    dir = unif(rng_) < 0.5 ? p : q;
  }
  pos_ = move(pos_, dir);
  ++t_;

  CmdpStep out;
  out.reward = cfg_.step_reward;
  out.costs = {0.0};
  if (is_water(pos_)) {
    out.costs[0] = cfg_.water_cost;
    out.terminated = true;
  } else if (pos_ == cfg_.goal) {
    out.reward += cfg_.goal_reward;
    out.terminated = true;
  }
  if (!out.terminated && t_ >= cfg_.max_steps) out.truncated = true;
  done_ = out.terminated || out.truncated;
  out.observation = observe();
  return out;
}

TabularCmdp PondWorld::as_tabular(double gamma) const {
  const int n = cfg_.rows * cfg_.cols;
  TabularCmdp m = TabularCmdp::zeros(n, 4, 1, gamma);
  std::fill(m.initial.begin(), m.initial.end(), 0.0);
  m.initial[static_cast<std::size_t>(state_index(cfg_.start))] = 1.0;

  for (int r = 0; r < cfg_.rows; ++r) {
    for (int c = 0; c < cfg_.cols; ++c) {
      const Cell cell{r, c};
      const int s = state_index(cell);
      const bool absorbing = is_water(cell) || cell == cfg_.goal;
      for (int a = 0; a < 4; ++a) {
        const auto idx = static_cast<std::size_t>(s * 4 + a);
        if (absorbing) {
          m.p(s, a, s) = 1.0;
          continue;
        }
        const auto [p, q] = perpendicular(a);
        const std::pair<int, double> outcomes[3] = {
            {a, 1.0 - cfg_.slip}, {p, cfg_.slip / 2.0}, {q, cfg_.slip / 2.0}};
        double reward = cfg_.step_reward;
        double cost = 0.0;
        for (const auto& [dir, prob] : outcomes) {
          if (prob == 0.0) continue;
          const Cell to = move(cell, dir);
          m.p(s, a, state_index(to)) += prob;
          if (is_water(to)) cost += prob * cfg_.water_cost;
          if (to == cfg_.goal) reward += prob * cfg_.goal_reward;
        }
        m.reward[idx] = reward;
        m.cost[0][idx] = cost;
      }
    }
  }
  m.validate();
  return m;
}

}  // namespace ip3o
