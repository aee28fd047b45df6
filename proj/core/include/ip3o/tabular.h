#ifndef IP3O_TABULAR_H_
#define IP3O_TABULAR_H_

#include <vector>

#include "ip3o/rng.h"

namespace ip3o {

// Explicit finite CMDP. Arrays are flattened row-major:
//   transition[(s * n_actions + a) * n_states + s2] = P(s2 | s, a)
//   reward[s * n_actions + a]
//   cost[i][s * n_actions + a] for constraint i
struct TabularCmdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;
  std::vector<double> reward;
  std::vector<std::vector<double>> cost;
  double gamma = 0.99;
  std::vector<double> initial;

  double p(int s, int a, int s2) const {
    return transition[static_cast<std::size_t>((s * n_actions + a) * n_states + s2)];
  }
  double& p(int s, int a, int s2) {
    return transition[static_cast<std::size_t>((s * n_actions + a) * n_states + s2)];
  }
  double r(int s, int a) const { return reward[static_cast<std::size_t>(s * n_actions + a)]; }
  double c(int i, int s, int a) const {
    return cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(s * n_actions + a)];
  }
  int num_costs() const { return static_cast<int>(cost.size()); }

  // Zero-filled CMDP with uniform initial distribution.
  static TabularCmdp zeros(int n_states, int n_actions, int n_costs, double gamma);

  // Throws ParameterError unless every row of P and the initial distribution
  // sum to 1 within 1e-12, probabilities are non-negative, and gamma in (0,1).
  void validate() const;
};

// Random dense CMDP: transition rows and the initial distribution are
// normalised uniform draws, rewards and costs are uniform in [0, 1).
TabularCmdp random_cmdp(int n_states, int n_actions, int n_costs, double gamma, Rng& rng);

}  // namespace ip3o

#endif  // IP3O_TABULAR_H_
