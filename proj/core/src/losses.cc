#include "ip3o/losses.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ip3o/errors.h"

namespace ip3o {

std::string_view to_string(Algo algo) {
  switch (algo) {
    case Algo::kIp3o: return "IP3O";
    case Algo::kPpo: return "PPO";
    case Algo::kPpoLagrangian: return "PPO_LAGRANGIAN";
    case Algo::kP3o: return "P3O";
    case Algo::kIpo: return "IPO";
  }
  return "?";
}

Algo algo_from_string(std::string_view name) {
  for (auto a : {Algo::kIp3o, Algo::kPpo, Algo::kPpoLagrangian, Algo::kP3o, Algo::kIpo}) {
    if (to_string(a) == name) return a;
  }
  throw ParameterError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(ClipForm form) {
  return form == ClipForm::kLiteral ? "literal" : "ppo";
}

ClipForm clip_form_from_string(std::string_view name) {
  if (name == "literal") return ClipForm::kLiteral;
  if (name == "ppo") return ClipForm::kPpo;
  throw ParameterError("unknown clip form '" + std::string(name) + "'");
}

double ratio(double new_log_prob, double old_log_prob) {
  return std::clamp(std::exp(new_log_prob - old_log_prob), kRatioMin, kRatioMax);
}

bool ratio_capped(double new_log_prob, double old_log_prob) {
  const double r = std::exp(new_log_prob - old_log_prob);
  return r < kRatioMin || r > kRatioMax;
}

double clip_reward_ratio(double r, double eps) {
  return std::min(r, std::clamp(r, 1.0 - eps, 1.0 + eps));
}

double clip_cost_ratio(double r, double eps) {
  return std::max(r, std::clamp(r, 1.0 - eps, 1.0 + eps));
}

Var ratio(Var new_log_prob, const Vector& old_log_prob) {
  Tape& tape = *new_log_prob.tape;
  Var diff = sub(new_log_prob, tape.constant(Matrix(old_log_prob)));
  return clip(exp(diff), kRatioMin, kRatioMax);
}

Var clip_reward_ratio(Var r, double eps) { return min(r, clip(r, 1.0 - eps, 1.0 + eps)); }

Var clip_cost_ratio(Var r, double eps) { return max(r, clip(r, 1.0 - eps, 1.0 + eps)); }

Var reward_loss(Var r, const Vector& adv_r, double eps, ClipForm form) {
  if (r.rows() == 0) throw EmptyBatchError("reward loss on an empty batch");
  if (r.rows() != adv_r.size() || r.cols() != 1) throw ShapeError("reward loss shapes");
  Var a = r.tape->constant(Matrix(adv_r));
  if (form == ClipForm::kLiteral) return neg(mean(mul(clip_reward_ratio(r, eps), a)));
  Var surr = min(mul(r, a), mul(clip(r, 1.0 - eps, 1.0 + eps), a));
  return neg(mean(surr));
}

Var cost_loss(Var r, const Vector& adv_c, double jc, double d, double gamma, double eps,
              ClipForm form) {
  if (r.rows() == 0) throw EmptyBatchError("cost loss on an empty batch");
  if (r.rows() != adv_c.size() || r.cols() != 1) throw ShapeError("cost loss shapes");
  if (!(gamma < 1.0)) throw ParameterError("cost loss needs gamma < 1");
  Var a = r.tape->constant(Matrix(adv_c));
  Var surr;
  if (form == ClipForm::kLiteral) {
    surr = mean(mul(clip_cost_ratio(r, eps), a));
  } else {
    // Pessimistic for a cost: keep the larger of the two products.
    surr = mean(max(mul(r, a), mul(clip(r, 1.0 - eps, 1.0 + eps), a)));
  }
  return add_scalar(scale(surr, 1.0 / (1.0 - gamma)), jc - d);
}

Var combine_losses(Var loss_r, const std::vector<Var>& loss_c, const CombineOptions& options,
                   LossReport* report) {
  if (report) {
    report->loss_r = loss_r.scalar();
    report->loss_c.clear();
    report->penalty_terms.clear();
  }
  Var total = loss_r;
  const PenaltyConfig& pc = options.penalty;
  for (std::size_t i = 0; i < loss_c.size(); ++i) {
    Var lc = loss_c[i];
    const double x = lc.scalar();
    Var term;
    bool has_term = true;
    double weight = 1.0;
    switch (options.algo) {
      case Algo::kPpo:
        has_term = false;
        break;
      case Algo::kIp3o:
        term = penalty(lc, pc.h ? PenaltyKind::kCeluClamped : PenaltyKind::kCelu, pc);
        weight = pc.eta;
        break;
      case Algo::kP3o:
        term = penalty(lc, PenaltyKind::kReluP3o, pc);
        weight = pc.eta;
        break;
      case Algo::kIpo:
        if (x < 0.0) {
          term = penalty(lc, PenaltyKind::kLogBarrierIpo, pc);
        } else {
          term = lc;
          weight = kIpoInfeasibleScale;
          if (report) report->barrier_infeasible = true;
        }
        break;
      case Algo::kPpoLagrangian:
        term = lc;
        weight = i < options.lagrange.size() ? options.lagrange[i] : 0.0;
        break;
    }
    if (report) {
      report->loss_c.push_back(x);
      report->penalty_terms.push_back(has_term ? term.scalar() : 0.0);
    }
    if (has_term) total = add(total, scale(term, weight));
  }
  if (report) report->total = total.scalar();
  return total;
}

}  // namespace ip3o
