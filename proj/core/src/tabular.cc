#include "ip3o/tabular.h"

#include <cmath>
#include <random>
#include <string>

#include "ip3o/errors.h"

namespace ip3o {

TabularCmdp TabularCmdp::zeros(int n_states, int n_actions, int n_costs, double gamma) {
  if (n_states <= 0 || n_actions <= 0 || n_costs < 0) {
    throw ParameterError("tabular CMDP needs positive state and action counts");
  }
  TabularCmdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  const auto sa = static_cast<std::size_t>(n_states * n_actions);
  m.transition.assign(sa * static_cast<std::size_t>(n_states), 0.0);
  m.reward.assign(sa, 0.0);
  m.cost.assign(static_cast<std::size_t>(n_costs), std::vector<double>(sa, 0.0));
  m.gamma = gamma;
  m.initial.assign(static_cast<std::size_t>(n_states), 1.0 / n_states);
  return m;
}

void TabularCmdp::validate() const {
  if (n_states <= 0 || n_actions <= 0) throw ParameterError("empty state or action set");
  const auto sa = static_cast<std::size_t>(n_states * n_actions);
  if (transition.size() != sa * static_cast<std::size_t>(n_states) || reward.size() != sa ||
      initial.size() != static_cast<std::size_t>(n_states)) {
    throw ShapeError("tabular CMDP arrays have inconsistent sizes");
  }
  for (const auto& ci : cost) {
    if (ci.size() != sa) throw ShapeError("cost array has the wrong size");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double total = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        const double q = p(s, a, s2);
        if (q < 0.0) throw ParameterError("negative transition probability");
        total += q;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw ParameterError("P[" + std::to_string(s) + "][" + std::to_string(a) +
                             "] sums to " + std::to_string(total));
      }
    }
  }
  double total = 0.0;
  for (double q : initial) {
    if (q < 0.0) throw ParameterError("negative initial probability");
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("initial distribution does not sum to 1");
}

TabularCmdp random_cmdp(int n_states, int n_actions, int n_costs, double gamma, Rng& rng) {
  TabularCmdp m = TabularCmdp::zeros(n_states, n_actions, n_costs, gamma);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto normalised = [&](double* out, int n) {
    double total = 0.0;
    for (int k = 0; k < n; ++k) total += (out[k] = unif(rng) + 1e-3);
    for (int k = 0; k < n; ++k) out[k] /= total;
  };
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) normalised(&m.p(s, a, 0), n_states);
  }
  for (double& r : m.reward) r = unif(rng);
  for (auto& c : m.cost) {
    for (double& x : c) x = unif(rng);
  }
  normalised(m.initial.data(), n_states);
  return m;
}

}  // namespace ip3o
