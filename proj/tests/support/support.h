#ifndef IP3O_TESTS_SUPPORT_H_
#define IP3O_TESTS_SUPPORT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ip3o/tabular.h"

namespace ip3o::testing {

// A tabular CMDP with a budget strictly between the minimum achievable cost
// and the cost of the unconstrained optimum.
struct BindingInstance {
  std::string name;
  TabularCmdp cmdp;
  double d = 0.0;
  double cost_min = 0.0;
  double cost_unconstrained = 0.0;
};

// Cost of the min-cost policy and of the reward-greedy policy (cost 0).
void cost_extremes(const TabularCmdp& cmdp, double& cost_min, double& cost_unconstrained);

// `count` random instances with 2..max_states states and 2..max_actions
// actions, gamma 0.9, budget at the midpoint. Rejection sampling keeps only
// instances whose cost range exceeds `min_gap`, so the constraint binds.
std::vector<BindingInstance> random_binding_instances(int count, int max_states,
                                                      int max_actions, std::uint64_t seed,
                                                      double min_gap = 0.05);

// Default 5x5 pond world at gamma 0.95 with the midpoint budget.
BindingInstance pondworld_instance();

// Explicit double-sum advantage:
//   A_t = sum_{l>=0} (gamma lambda)^l prod_{j<l}(1 - done_{t+j}) delta_{t+l}
std::vector<double> gae_reference(std::span<const double> rewards,
                                  std::span<const double> values,
                                  std::span<const std::uint8_t> dones, double gamma,
                                  double lambda, double bootstrap);

struct GradCheck {
  std::string description;
  std::size_t params = 0;
  double relative_error = 0.0;  // ||g - g_fd|| / max(||g|| + ||g_fd||, 1e-12)
  double max_abs_error = 0.0;
};

// Random network-plus-loss composition number `index`, checked against
// central differences with step `h`. Compositions cycle through CELU and
// clamped CELU penalties, clip, min/max, ratio clipping and the combined
// policy loss.
GradCheck check_random_composition(int index, double h = 1e-6);

}  // namespace ip3o::testing

#endif  // IP3O_TESTS_SUPPORT_H_
