#ifndef IP3O_LOSSES_H_
#define IP3O_LOSSES_H_

#include <string_view>
#include <vector>

#include "ip3o/diffcore.h"
#include "ip3o/penalty.h"

namespace ip3o {

enum class Algo { kIp3o, kPpo, kPpoLagrangian, kP3o, kIpo };

std::string_view to_string(Algo algo);
// Accepts "IP3O", "PPO", "PPO_LAGRANGIAN", "P3O", "IPO".
Algo algo_from_string(std::string_view name);

// kLiteral clips the ratio itself (min/max with its clipped value, then
// multiplies by the advantage). kPpo uses the usual min over ratio*A and
// clip(ratio)*A for both sides.
enum class ClipForm { kLiteral, kPpo };

std::string_view to_string(ClipForm form);
ClipForm clip_form_from_string(std::string_view name);

inline constexpr double kRatioMin = 1e-8;
inline constexpr double kRatioMax = 1e8;
// Multiplier applied to a violated constraint when the log barrier is
// undefined.
inline constexpr double kIpoInfeasibleScale = 1e4;

// exp(new - old) limited to [kRatioMin, kRatioMax].
double ratio(double new_log_prob, double old_log_prob);
bool ratio_capped(double new_log_prob, double old_log_prob);
// min(r, clip(r, 1 - eps, 1 + eps))
double clip_reward_ratio(double r, double eps);
// max(r, clip(r, 1 - eps, 1 + eps))
double clip_cost_ratio(double r, double eps);

// Tape versions. All take (rows x 1) columns.
Var ratio(Var new_log_prob, const Vector& old_log_prob);
Var clip_reward_ratio(Var r, double eps);
Var clip_cost_ratio(Var r, double eps);

// mean(-r' * A_R), or the standard clipped PPO objective for kPpo.
// Throws EmptyBatchError when there are no rows.
Var reward_loss(Var r, const Vector& adv_r, double eps, ClipForm form = ClipForm::kLiteral);
// (1 / (1 - gamma)) * mean(r'' * A_C) + (jc - d). Throws ParameterError for
// gamma >= 1.
Var cost_loss(Var r, const Vector& adv_c, double jc, double d, double gamma, double eps,
              ClipForm form = ClipForm::kLiteral);

struct LossReport {
  double loss_r = 0.0;
  std::vector<double> loss_c;
  std::vector<double> penalty_terms;  // per constraint, before eta
  double total = 0.0;
  double kl = 0.0;
  std::vector<double> jc;
  double entropy = 0.0;
  bool ratio_capped = false;
  bool barrier_infeasible = false;
};

struct CombineOptions {
  Algo algo = Algo::kIp3o;
  PenaltyConfig penalty;             // alpha, h, eta, t
  std::vector<double> lagrange;      // PPO-Lagrangian multipliers
};

// Combines a reward loss with per-constraint cost losses:
//   IP3O  L_R + eta * sum CELU(L_C) (clamped CELU when h is set)
//   P3O   L_R + eta * sum max(L_C, 0)
//   IPO   L_R + sum -log(-L_C) / t, falling back to 1e4 * L_C when L_C >= 0
//   PPO   L_R
//   PPO_LAGRANGIAN  L_R + sum lambda_i * L_C
// With no cost losses the result is `loss_r` itself.
Var combine_losses(Var loss_r, const std::vector<Var>& loss_c, const CombineOptions& options,
                   LossReport* report = nullptr);

}  // namespace ip3o

#endif  // IP3O_LOSSES_H_
