#ifndef IP3O_PENALTY_H_
#define IP3O_PENALTY_H_

#include <optional>
#include <string>
#include <string_view>

namespace ip3o {

// Barrier functions applied to a cost-constraint loss. Values of x < 0 mean
// the constraint surrogate is satisfied.
enum class PenaltyKind {
  kElu,
  kCelu,
  kCeluClamped,
  kReluP3o,
  kLogBarrierIpo,
  kLeakyRelu,
};

inline constexpr double kLeakyReluSlope = 0.01;

struct PenaltyConfig {
  // Saturation depth: CELU(x) -> -alpha as x -> -inf.
  double alpha = 0.5;
  // Clamp parameter for kCeluClamped, 0 < h < min(alpha, 1). When unset the
  // clamp is disabled.
  std::optional<double> h;
  // Penalty factor multiplying the barrier in the combined loss.
  double eta = 20.0;
  // Sharpness of the log barrier.
  double t = 20.0;

  // Throws ParameterError when a field is out of range.
  void validate() const;
};

std::string_view to_string(PenaltyKind kind);
// Throws ParameterError for unknown names.
PenaltyKind penalty_kind_from_string(std::string_view name);

// Value of the barrier at x. kCeluClamped requires cfg.h. kLogBarrierIpo
// throws InfeasibleError for x >= 0.
double penalty_value(PenaltyKind kind, double x, const PenaltyConfig& cfg);

// Analytic derivative. At x = 0 the right-branch derivative is returned.
double penalty_grad(PenaltyKind kind, double x, const PenaltyConfig& cfg);

// alpha * log(h): the cost-loss level below which the clamped CELU has zero
// gradient. Requires 0 < h < alpha.
double stagnation_threshold(double alpha, double h);
double stagnation_threshold(const PenaltyConfig& cfg);

}  // namespace ip3o

#endif  // IP3O_PENALTY_H_
