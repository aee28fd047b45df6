#include "ip3o/envs.h"

#include <cmath>

#include "ip3o/errors.h"

namespace ip3o {

void PointMassConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");
  if (!(max_accel > 0.0) || !std::isfinite(max_accel)) {
    throw ParameterError("max_accel must be positive");
  }
  if (!(velocity_limit > 0.0) || !std::isfinite(velocity_limit)) {
    throw ParameterError("velocity_limit must be positive");
  }
  if (horizon < 1) throw ParameterError("horizon must be at least 1");
  if (!std::isfinite(reward_scale)) throw ParameterError("reward_scale must be finite");
}

PointMass::PointMass(PointMassConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<double> PointMass::reset(std::uint64_t seed) {
  rng_.seed(seed);
  x_ = 0.0;
  v_ = 0.0;
  t_ = 0;
  return {x_, v_};
}

void PointMass::set_state(double position, double velocity) {
  x_ = position;
  v_ = velocity;
}

CmdpStep PointMass::step(std::span<const double> action) {
  if (action.size() != 1) throw DomainError("point mass expects a 1-D acceleration");
  const double a = action[0];
  if (!std::isfinite(a) || std::abs(a) > cfg_.max_accel) {
    throw DomainError("acceleration outside [-max_accel, max_accel]");
  }
  if (t_ >= cfg_.horizon) throw DomainError("episode has finished; call reset()");
  v_ += a * cfg_.dt;
  x_ += v_ * cfg_.dt;
  ++t_;

  CmdpStep out;
  out.observation = {x_, v_};
  out.reward = cfg_.reward_scale * v_;
  out.costs = {std::abs(v_) > cfg_.velocity_limit ? 1.0 : 0.0};
  out.truncated = t_ >= cfg_.horizon;
  return out;
}

}  // namespace ip3o
