#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "ip3o/errors.h"
#include "ip3o/penalty.h"

namespace ip3o {
namespace {

constexpr PenaltyKind kAllKinds[] = {PenaltyKind::kElu,         PenaltyKind::kCelu,
                                     PenaltyKind::kCeluClamped, PenaltyKind::kReluP3o,
                                     PenaltyKind::kLogBarrierIpo, PenaltyKind::kLeakyRelu};

PenaltyConfig config(double alpha, std::optional<double> h = {}) {
  PenaltyConfig c;
  c.alpha = alpha;
  c.h = h;
  return c;
}

TEST(Penalty, CeluIsContinuouslyDifferentiableAtZero) {
  const double tiny = std::numeric_limits<double>::denorm_min();
  for (double alpha : {0.1, 0.5, 1.0, 2.0}) {
    const auto c = config(alpha);
    EXPECT_EQ(penalty_value(PenaltyKind::kCelu, 0.0, c), 0.0);
    EXPECT_LT(std::abs(penalty_grad(PenaltyKind::kCelu, 0.0, c) -
                       penalty_grad(PenaltyKind::kCelu, -tiny, c)),
              1e-8);
    EXPECT_EQ(penalty_grad(PenaltyKind::kCelu, 0.0, c), 1.0);
  }
}

TEST(Penalty, EluGradientJumpsByOneMinusAlpha) {
  const double tiny = std::numeric_limits<double>::denorm_min();
  for (double alpha : {0.1, 0.5, 1.0, 2.0}) {
    const auto c = config(alpha);
    const double jump =
        penalty_grad(PenaltyKind::kElu, 0.0, c) - penalty_grad(PenaltyKind::kElu, -tiny, c);
    EXPECT_EQ(std::abs(jump), std::abs(1.0 - alpha));
  }
}

TEST(Penalty, CeluIsBoundedBelowByMinusAlpha) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 30.0);
  for (double alpha : {0.01, 0.1, 0.5, 1.0, 2.0}) {
    const auto c = config(alpha);
    EXPECT_EQ(penalty_value(PenaltyKind::kCelu, -std::numeric_limits<double>::infinity(), c),
              -alpha);
    for (int k = 0; k < 10000; ++k) {
      EXPECT_GE(penalty_value(PenaltyKind::kCelu, n(rng), c), -alpha);
    }
  }
}

TEST(Penalty, KnownValues) {
  const auto c = config(0.5, 0.1);
  EXPECT_DOUBLE_EQ(penalty_value(PenaltyKind::kCelu, -1.0, c), 0.5 * std::expm1(-2.0));
  EXPECT_DOUBLE_EQ(penalty_value(PenaltyKind::kElu, -1.0, c), 0.5 * std::expm1(-1.0));
  EXPECT_DOUBLE_EQ(penalty_value(PenaltyKind::kCelu, 3.0, c), 3.0);
  EXPECT_DOUBLE_EQ(penalty_value(PenaltyKind::kReluP3o, -3.0, c), 0.0);
  EXPECT_DOUBLE_EQ(penalty_value(PenaltyKind::kLeakyRelu, -3.0, c), -0.03);
  EXPECT_DOUBLE_EQ(penalty_value(PenaltyKind::kLogBarrierIpo, -1.0, c), 0.0);
  EXPECT_DOUBLE_EQ(penalty_value(PenaltyKind::kLogBarrierIpo, -std::exp(-2.0), c), 2.0 / 20.0);
  // CELU with alpha = 1 coincides with ELU.
  const auto one = config(1.0);
  for (double x : {-3.0, -0.2, 0.0, 0.7}) {
    EXPECT_EQ(penalty_value(PenaltyKind::kCelu, x, one), penalty_value(PenaltyKind::kElu, x, one));
  }
}

TEST(Penalty, ClampedCeluFloorsAtAlphaTimesOneMinusH) {
  const double alpha = 0.5, h = 0.1;
  const auto c = config(alpha, h);
  const double floor = -alpha * (1.0 - h);
  EXPECT_DOUBLE_EQ(penalty_value(PenaltyKind::kCeluClamped, -100.0, c), floor);
  const double thr = stagnation_threshold(c);
  EXPECT_DOUBLE_EQ(thr, alpha * std::log(h));
  // Below the threshold the gradient vanishes; just above it is h.
  EXPECT_EQ(penalty_grad(PenaltyKind::kCeluClamped, thr - 1e-6, c), 0.0);
  EXPECT_NEAR(penalty_grad(PenaltyKind::kCeluClamped, thr + 1e-9, c), h, 1e-8);
  EXPECT_NEAR(penalty_value(PenaltyKind::kCeluClamped, thr, c), floor, 1e-15);
  EXPECT_THROW(penalty_value(PenaltyKind::kCeluClamped, -1.0, config(alpha)), ParameterError);
}

TEST(Penalty, StagnationThreshold) {
  EXPECT_NEAR(stagnation_threshold(1.0, 0.5), std::log(0.5), 1e-12);
  EXPECT_THROW(stagnation_threshold(0.5, 0.5), ParameterError);
  EXPECT_THROW(stagnation_threshold(0.5, 0.0), ParameterError);
}

TEST(Penalty, AnalyticGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto c = config(0.7, 0.2);
  for (PenaltyKind kind : kAllKinds) {
    for (int k = 0; k < 200; ++k) {
      double x = u(rng);
      if (kind == PenaltyKind::kLogBarrierIpo) x = -std::abs(x) - 0.05;
      if (std::abs(x) < 1e-4) continue;
      if (kind == PenaltyKind::kCeluClamped && std::abs(x - stagnation_threshold(c)) < 1e-4) {
        continue;
      }
      const double h = 1e-7;
      const double fd =
          (penalty_value(kind, x + h, c) - penalty_value(kind, x - h, c)) / (2.0 * h);
      EXPECT_NEAR(penalty_grad(kind, x, c), fd, 1e-6) << to_string(kind) << " at " << x;
    }
  }
}

TEST(Penalty, LogBarrierRejectsViolatedConstraints) {
  const auto c = config(0.5);
  EXPECT_THROW(penalty_value(PenaltyKind::kLogBarrierIpo, 0.0, c), InfeasibleError);
  EXPECT_THROW(penalty_grad(PenaltyKind::kLogBarrierIpo, 1.0, c), InfeasibleError);
}

TEST(Penalty, ValidationAndNames) {
  EXPECT_THROW(config(0.0).validate(), ParameterError);
  EXPECT_THROW(config(0.5, 0.6).validate(), ParameterError);
  EXPECT_THROW(config(2.0, 1.0).validate(), ParameterError);
  EXPECT_NO_THROW(config(0.5, 0.01).validate());
  for (PenaltyKind kind : kAllKinds) EXPECT_EQ(penalty_kind_from_string(to_string(kind)), kind);
  EXPECT_THROW(penalty_kind_from_string("SELU"), ParameterError);
}

}  // namespace
}  // namespace ip3o
