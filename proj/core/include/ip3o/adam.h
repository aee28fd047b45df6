#ifndef IP3O_ADAM_H_
#define IP3O_ADAM_H_

#include <cstdint>
#include <span>
#include <vector>

namespace ip3o {

inline constexpr double kDefaultLearningRate = 3e-4;

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n) : first_moment(n, 0.0), second_moment(n, 0.0) {}
};

// One bias-corrected Adam update, in place. Throws ShapeError on length
// mismatch and ParameterError for lr <= 0.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr);

// Scales `grads` so its Euclidean norm is at most `max_norm`; returns the norm
// before scaling.
double clip_grad_norm(std::span<double> grads, double max_norm);

}  // namespace ip3o

#endif  // IP3O_ADAM_H_
