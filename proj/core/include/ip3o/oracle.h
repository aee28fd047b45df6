#ifndef IP3O_ORACLE_H_
#define IP3O_ORACLE_H_

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ip3o/tabular.h"

namespace ip3o {

// Stochastic tabular policy, probs[s * n_actions + a].
struct TabularPolicy {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> probs;

  double operator()(int s, int a) const {
    return probs[static_cast<std::size_t>(s * n_actions + a)];
  }
  static TabularPolicy uniform(int n_states, int n_actions);
  static TabularPolicy deterministic(int n_actions, const std::vector<int>& actions);
};

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<int> greedy;
  int sweeps = 0;
};

// Optimal values for the per-(s, a) signal, to 1e-10 in sup norm. Greedy
// ties go to the lowest action index.
ValueIterationResult value_iteration(const TabularCmdp& cmdp, std::span<const double> signal);

// Exact policy evaluation by a linear solve.
struct PolicyEvaluation {
  double j_r = 0.0;
  std::vector<double> j_c;
  std::vector<double> v_r;
  std::vector<std::vector<double>> v_c;
  std::vector<double> a_r;                // advantages, [s * A + a]
  std::vector<std::vector<double>> a_c;
  // Normalised discounted state occupancy: (1 - gamma) sum_t gamma^t P(s_t).
  std::vector<double> occupancy;
};

PolicyEvaluation evaluate_policy(const TabularCmdp& cmdp, const TabularPolicy& pi);
// Discounted return of `signal` under `pi` from the initial distribution.
double policy_return(const TabularCmdp& cmdp, const TabularPolicy& pi,
                     std::span<const double> signal);

struct OracleSolution {
  bool feasible = false;
  double j_r_star = 0.0;
  std::vector<double> j_c_star;
  std::vector<double> lambda_star;
  TabularPolicy policy_star;
};

inline constexpr double kLambdaMax = 1e6;
inline constexpr double kLambdaTolerance = 1e-8;

// Single-constraint dual by bisection on r - lambda * c_{cost_index}. At a
// binding optimum the two adjacent deterministic optima are mixed at the
// occupancy level so that J_C = d. Infeasible budgets give feasible = false;
// failure to bracket lambda in [0, kLambdaMax] throws DomainError.
OracleSolution solve_dual(const TabularCmdp& cmdp, double d, int cost_index = 0);

// Brute force reference for small instances: every deterministic policy is
// evaluated, the best feasible point on the segment between any two policies
// gives J_R*, and lambda* is the minimiser of the dual function over a grid
// of spacing `lambda_step`, refined tenfold around the argmin until the
// spacing reaches kEnumerationResolution.
inline constexpr double kEnumerationResolution = 1e-10;
struct EnumerationResult {
  bool feasible = false;
  double j_r_star = 0.0;
  double lambda_grid = 0.0;
  int policies = 0;
};
EnumerationResult solve_by_enumeration(const TabularCmdp& cmdp, double d, double lambda_step,
                                       double lambda_max, int cost_index = 0);

struct SurrogateOptions {
  int max_iters = 50000;
  // Converged when the gradient norm falls below grad_tol, or when the
  // objective stops decreasing at machine precision with a gradient norm
  // below sqrt(grad_tol).
  double grad_tol = 1e-8;
  double initial_step = 1.0;
  // Largest change of any logit in one step; keeps the softmax away from
  // premature saturation.
  double max_logit_change = 1.0;
  // Record every k-th iterate in the trace (the final one is always kept).
  int trace_every = 100;
};

struct SurrogateResult {
  TabularPolicy policy;
  std::vector<double> logits;
  double j_r = 0.0;
  double j_c = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<int> trace_iter;
  std::vector<double> trace_j_r;
  std::vector<double> trace_j_c;
};

// Penalised objective in return units:
//   -J_R + eta * P(J_C - d),  P = CELU, or clamped CELU when h is set.
double penalized_objective(double j_r, double j_c, double d, double eta, double alpha,
                           std::optional<double> h);

// Full-gradient descent with backtracking on a softmax tabular policy. Each
// step uses the exact surrogate gradient at the current iterate, which equals
// the gradient of penalized_objective. Single constraint (cost 0).
SurrogateResult exact_surrogate_optimize(const TabularCmdp& cmdp, double d, double eta,
                                         double alpha, std::optional<double> h,
                                         const SurrogateOptions& options = {});

struct BoundReport {
  double epsilon_r = 0.0;
  std::vector<double> epsilon_c;
  double delta = 0.0;
  double bound = 0.0;
  std::optional<double> observed_gap;
  bool holds = true;
};

// Throws ParameterError unless 0 < h < alpha, delta >= 0, gamma in (0, 1).
BoundReport assemble_bound(double epsilon_r, const std::vector<double>& epsilon_c,
                           double delta, double gamma, double eta, double alpha, double h);

// Bound ingredients for `pi` against reference `ref` (advantages and state
// distribution of `ref`, KL(pi || ref)), plus the exact gap between the two
// policies on penalized_objective with the clamped penalty.
BoundReport bound_for(const TabularCmdp& cmdp, const TabularPolicy& pi,
                      const TabularPolicy& ref, double d, double eta, double alpha, double h);

struct ExactPenaltyEntry {
  double eta = 0.0;
  double factor = 0.0;
  double j_r = 0.0;
  double j_c = 0.0;
  double reward_ratio = 0.0;
  bool required = false;
  bool pass = false;
  bool converged = false;
  int iterations = 0;
};

struct ExactPenaltyReport {
  bool applicable = false;
  OracleSolution solution;
  std::vector<ExactPenaltyEntry> entries;
  std::vector<BoundReport> bounds;  // one per entry, when h is set
  bool pass = false;
};

inline constexpr double kRewardFraction = 0.98;
inline constexpr double kCostSlack = 1e-3;

// Runs exact_surrogate_optimize for eta = factor * lambda* over the factors.
// Entries with eta > lambda* (or any eta when lambda* = 0) are required to
// reach J_R >= 0.98 J_R* and J_C <= d + 1e-3. With h set, each run also gets
// a bound report comparing the oracle policy against the final iterate.
ExactPenaltyReport verify_exact_penalty(const TabularCmdp& cmdp, double d,
                                        const std::vector<double>& eta_factors, double alpha,
                                        std::optional<double> h,
                                        const SurrogateOptions& options = {});

nlohmann::json to_json(const TabularPolicy& pi);
nlohmann::json to_json(const OracleSolution& s);
nlohmann::json to_json(const BoundReport& b);
nlohmann::json to_json(const ExactPenaltyReport& r);

}  // namespace ip3o

#endif  // IP3O_ORACLE_H_
