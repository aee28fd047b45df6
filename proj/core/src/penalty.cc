#include "ip3o/penalty.h"

#include <algorithm>
#include <cmath>

#include "ip3o/errors.h"

namespace ip3o {
namespace {

double celu(double x, double alpha) {
  return x >= 0.0 ? x : alpha * std::expm1(x / alpha);
}

double clamp_floor(const PenaltyConfig& cfg) {
  if (!cfg.h) throw ParameterError("clamped CELU requires h");
  return -cfg.alpha * (1.0 - *cfg.h);
}

}  // namespace

void PenaltyConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("alpha must be a positive finite number");
  }
  if (h) {
    if (!(*h > 0.0) || !(*h < alpha) || !(*h < 1.0)) {
      throw ParameterError("h must lie in (0, min(alpha, 1))");
    }
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw ParameterError("eta must be non-negative");
  }
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw ParameterError("t must be positive");
  }
}

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::kElu: return "ELU";
    case PenaltyKind::kCelu: return "CELU";
    case PenaltyKind::kCeluClamped: return "CELU_CLAMPED";
    case PenaltyKind::kReluP3o: return "RELU_P3O";
    case PenaltyKind::kLogBarrierIpo: return "LOG_BARRIER_IPO";
    case PenaltyKind::kLeakyRelu: return "LEAKY_RELU";
  }
  return "?";
}

PenaltyKind penalty_kind_from_string(std::string_view name) {
  for (auto k : {PenaltyKind::kElu, PenaltyKind::kCelu, PenaltyKind::kCeluClamped,
                 PenaltyKind::kReluP3o, PenaltyKind::kLogBarrierIpo,
                 PenaltyKind::kLeakyRelu}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterError("unknown penalty kind '" + std::string(name) + "'");
}

double penalty_value(PenaltyKind kind, double x, const PenaltyConfig& cfg) {
  switch (kind) {
    case PenaltyKind::kElu:
      return x >= 0.0 ? x : cfg.alpha * std::expm1(x);
    case PenaltyKind::kCelu:
      return celu(x, cfg.alpha);
    case PenaltyKind::kCeluClamped:
      return std::max(celu(x, cfg.alpha), clamp_floor(cfg));
    case PenaltyKind::kReluP3o:
      return std::max(x, 0.0);
    case PenaltyKind::kLogBarrierIpo:
      if (!(x < 0.0)) {
        throw InfeasibleError("log barrier undefined for a violated constraint");
      }
      return -std::log(-x) / cfg.t;
    case PenaltyKind::kLeakyRelu:
      return x >= 0.0 ? x : kLeakyReluSlope * x;
  }
  return 0.0;
}

double penalty_grad(PenaltyKind kind, double x, const PenaltyConfig& cfg) {
  switch (kind) {
    case PenaltyKind::kElu:
      return x >= 0.0 ? 1.0 : cfg.alpha * std::exp(x);
    case PenaltyKind::kCelu:
      return x >= 0.0 ? 1.0 : std::exp(x / cfg.alpha);
    case PenaltyKind::kCeluClamped: {
      // Ties between the CELU branch and the floor go to CELU.
      const double v = celu(x, cfg.alpha);
      if (v < clamp_floor(cfg)) return 0.0;
      return x >= 0.0 ? 1.0 : std::exp(x / cfg.alpha);
    }
    case PenaltyKind::kReluP3o:
      return x >= 0.0 ? 1.0 : 0.0;
    case PenaltyKind::kLogBarrierIpo:
      if (!(x < 0.0)) {
        throw InfeasibleError("log barrier undefined for a violated constraint");
      }
      return -1.0 / (cfg.t * x);
    case PenaltyKind::kLeakyRelu:
      return x >= 0.0 ? 1.0 : kLeakyReluSlope;
  }
  return 0.0;
}

double stagnation_threshold(double alpha, double h) {
  if (!(h > 0.0) || !(h < alpha)) {
    throw ParameterError("stagnation threshold requires 0 < h < alpha");
  }
  return alpha * std::log(h);
}

double stagnation_threshold(const PenaltyConfig& cfg) {
  if (!cfg.h) throw ParameterError("stagnation threshold requires h");
  return stagnation_threshold(cfg.alpha, *cfg.h);
}

}  // namespace ip3o
