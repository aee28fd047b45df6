#include "support.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "ip3o/diffcore.h"
#include "ip3o/envs.h"
#include "ip3o/losses.h"
#include "ip3o/mlp.h"
#include "ip3o/oracle.h"
#include "ip3o/rng.h"

namespace ip3o::testing {

void cost_extremes(const TabularCmdp& cmdp, double& cost_min, double& cost_unconstrained) {
  std::vector<double> neg(cmdp.cost[0].size());
  for (std::size_t k = 0; k < neg.size(); ++k) neg[k] = -cmdp.cost[0][k];
  const auto low = TabularPolicy::deterministic(cmdp.n_actions, value_iteration(cmdp, neg).greedy);
  const auto greedy =
      TabularPolicy::deterministic(cmdp.n_actions, value_iteration(cmdp, cmdp.reward).greedy);
  cost_min = policy_return(cmdp, low, cmdp.cost[0]);
  cost_unconstrained = policy_return(cmdp, greedy, cmdp.cost[0]);
}

std::vector<BindingInstance> random_binding_instances(int count, int max_states,
                                                      int max_actions, std::uint64_t seed,
                                                      double min_gap) {
  std::vector<BindingInstance> out;
  Rng rng(seed);
  int drawn = 0;
  while (static_cast<int>(out.size()) < count) {
    const int s = 2 + drawn % (max_states - 1);
    const int a = 2 + (drawn / (max_states - 1)) % (max_actions - 1);
    ++drawn;
    BindingInstance inst;
    inst.cmdp = random_cmdp(s, a, 1, 0.9, rng);
    cost_extremes(inst.cmdp, inst.cost_min, inst.cost_unconstrained);
    if (inst.cost_unconstrained - inst.cost_min < min_gap) continue;
    inst.d = 0.5 * (inst.cost_min + inst.cost_unconstrained);
    inst.name = "random_" + std::to_string(out.size()) + "_S" + std::to_string(s) + "A" +
                std::to_string(a);
    out.push_back(std::move(inst));
  }
  return out;
}

BindingInstance pondworld_instance() {
  BindingInstance inst;
  inst.name = "pondworld_5x5";
  inst.cmdp = PondWorld().as_tabular(0.95);
  cost_extremes(inst.cmdp, inst.cost_min, inst.cost_unconstrained);
  inst.d = 0.5 * (inst.cost_min + inst.cost_unconstrained);
  return inst;
}

std::vector<double> gae_reference(std::span<const double> rewards,
                                  std::span<const double> values,
                                  std::span<const std::uint8_t> dones, double gamma,
                                  double lambda, double bootstrap) {
  const std::size_t n = rewards.size();
  auto v = [&](std::size_t t) { return t < n ? values[t] : bootstrap; };
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    delta[t] = rewards[t] + gamma * v(t + 1) * (1.0 - dones[t]) - values[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t l = 0; t + l < n; ++l) {
      adv[t] += weight * delta[t + l];
      weight *= gamma * lambda * (1.0 - dones[t + l]);
      if (weight == 0.0) break;
    }
  }
  return adv;
}

namespace {

// Loss of a fixed composition given the network; evaluated on a fresh tape.
using Composition = std::function<Var(Tape&, const Mlp&, const Mlp::Bound&)>;

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = n(rng);
  return m;
}

Vector random_vector(int n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vector v(n);
  for (int k = 0; k < n; ++k) v(k) = d(rng);
  return v;
}

}  // namespace

GradCheck check_random_composition(int index, double h) {
  Rng rng = make_rng(static_cast<std::uint64_t>(index), Stream::kPolicyInit, 77);
  std::uniform_int_distribution<int> width(2, 5);
  const int batch = width(rng);
  const int in = width(rng);
  const int hidden = width(rng);
  const int out = width(rng);
  Mlp net = Mlp::orthogonal({in, hidden, out}, rng, 1.0, 1.0);
  // Perturb biases so they are not all zero.
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    net.bias(l) = random_matrix(1, static_cast<int>(net.bias(l).cols()), rng, 0.3);
  }
  const Matrix x = random_matrix(batch, in, rng);
  const Matrix other = random_matrix(batch, out, rng, 0.5);
  const Vector old_lp = random_vector(batch, rng, 0.2).array() - std::log(out);
  const Vector adv = random_vector(batch, rng);
  const Vector adv_c = random_vector(batch, rng);
  std::uniform_int_distribution<int> pick(0, out - 1);
  std::vector<int> actions(static_cast<std::size_t>(batch));
  for (int& a : actions) a = pick(rng);
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  const double alpha = unif(rng);
  const double shift = unif(rng) - 1.0;

  GradCheck gc;
  Composition f;
  switch (index % 5) {
    case 0:
      gc.description = "mlp -> celu -> mean";
      f = [=](Tape& t, const Mlp& m, const Mlp::Bound& b) {
        return mean(celu(add_scalar(m.forward(b, t.constant(x)), shift), alpha));
      };
      break;
    case 1:
      gc.description = "mlp -> clip, min, max -> sum";
      f = [=](Tape& t, const Mlp& m, const Mlp::Bound& b) {
        Var y = m.forward(b, t.constant(x));
        Var c = clip(y, -0.4, 0.3);
        Var lo = min(y, t.constant(other));
        Var hi = max(square(y), t.constant(other));
        return sum(add(add(c, lo), scale(hi, 0.5)));
      };
      break;
    case 2:
      gc.description = "mlp -> log_softmax -> ratio -> clipped reward loss";
      f = [=](Tape& t, const Mlp& m, const Mlp::Bound& b) {
        Var lp = gather_cols(log_softmax_rows(m.forward(b, t.constant(x))), actions);
        Var r = ratio(lp, old_lp);
        return reward_loss(r, adv, 0.2, index % 2 ? ClipForm::kPpo : ClipForm::kLiteral);
      };
      break;
    case 3:
      gc.description = "mlp -> ratio -> cost loss -> clamped celu combine";
      f = [=](Tape& t, const Mlp& m, const Mlp::Bound& b) {
        Var lp = gather_cols(log_softmax_rows(m.forward(b, t.constant(x))), actions);
        Var r = ratio(lp, old_lp);
        Var lr = reward_loss(r, adv, 0.2);
        Var lc = cost_loss(r, adv_c, shift, 0.0, 0.9, 0.2);
        CombineOptions o;
        o.penalty.alpha = alpha;
        o.penalty.h = alpha * 0.3;
        o.penalty.eta = 3.0;
        return combine_losses(lr, {lc}, o);
      };
      break;
    default:
      gc.description = "mlp -> exp, log, row_sum -> penalty";
      f = [=](Tape& t, const Mlp& m, const Mlp::Bound& b) {
        Var y = m.forward(b, t.constant(x));
        Var z = log(add_scalar(exp(scale(y, 0.5)), 1.0));
        PenaltyConfig p;
        p.alpha = alpha;
        return mean(penalty(add_scalar(row_sum(z), -2.0 - shift), PenaltyKind::kCelu, p));
      };
      break;
  }

  Tape tape;
  const Mlp::Bound bound = net.bind(tape);
  tape.backward(f(tape, net, bound));
  std::vector<double> grad(net.num_params());
  net.flat_grad_into(tape, bound, grad);

  std::vector<double> theta(net.num_params());
  net.flatten_into(theta);
  auto value_at = [&](const std::vector<double>& p) {
    Mlp probe = net;
    probe.assign_from(p);
    Tape t;
    const Mlp::Bound b = probe.bind(t);
    return f(t, probe, b).scalar();
  };
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    std::vector<double> p = theta;
    p[k] = theta[k] + h;
    const double up = value_at(p);
    p[k] = theta[k] - h;
    const double down = value_at(p);
    const double fd = (up - down) / (2.0 * h);
    diff2 += (grad[k] - fd) * (grad[k] - fd);
    a2 += grad[k] * grad[k];
    n2 += fd * fd;
    gc.max_abs_error = std::max(gc.max_abs_error, std::abs(grad[k] - fd));
  }
  gc.params = theta.size();
  gc.relative_error = std::sqrt(diff2) / std::max(std::sqrt(a2) + std::sqrt(n2), 1e-12);
  return gc;
}

}  // namespace ip3o::testing
