#include "ip3o/policy.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ip3o/errors.h"

namespace ip3o {
namespace {

constexpr double kHiddenGain = 1.0;
constexpr double kPolicyOutputGain = 0.01;
constexpr double kCriticOutputGain = 1.0;

std::vector<int> with_io(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

Matrix row_of(std::span<const double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

double gaussian_log_norm(int dims) {
  return -0.5 * dims * std::log(2.0 * std::numbers::pi);
}

}  // namespace

Policy::Policy(const ActionSpace& space, int obs_size, const std::vector<int>& hidden,
               Rng& rng, double init_log_std)
    : space_(space) {
  if (space.size <= 0) throw ShapeError("action space must be non-empty");
  trunk_ = Mlp::orthogonal(with_io(obs_size, hidden, space.size), rng, kHiddenGain,
                           kPolicyOutputGain);
  if (!discrete()) log_std_ = Matrix::Constant(1, space.size, init_log_std);
}

Matrix Policy::clamped_log_std() const {
  return log_std_.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

Vector Policy::log_prob(const Matrix& obs, const Matrix& actions) const {
  if (obs.rows() != actions.rows() || actions.cols() != action_columns()) {
    throw ShapeError("log_prob: observation/action batch shapes disagree");
  }
  const Matrix head = trunk_.forward(obs);
  if (discrete()) {
    const Vector m = head.rowwise().maxCoeff();
    const Matrix shifted = head.colwise() - m;
    const Vector lse = shifted.array().exp().rowwise().sum().log().matrix();
    const Matrix logp = shifted.colwise() - lse;
    Vector out(obs.rows());
    for (Eigen::Index r = 0; r < obs.rows(); ++r) {
      const double a = actions(r, 0);
      if (a < 0 || a >= space_.size || a != std::floor(a)) {
        throw DomainError("categorical action index out of range");
      }
      out(r) = logp(r, static_cast<Eigen::Index>(a));
    }
    return out;
  }
  // Mirrors the tape version op for op so both give identical bits.
  const Matrix ls = clamped_log_std();
  const Matrix inv_std = (-ls).array().exp().matrix();
  const Matrix diff = actions - head;
  const Matrix z = (diff.array() * inv_std.replicate(diff.rows(), 1).array()).matrix();
  const Matrix q = z.array().square().matrix().rowwise().sum();
  Matrix lp = -0.5 * q;
  lp = (lp.array() - ls.sum()).matrix();
  lp = (lp.array() + gaussian_log_norm(space_.size)).matrix();
  return lp.col(0);
}

double Policy::log_prob(std::span<const double> obs, std::span<const double> action) const {
  return log_prob(row_of(obs), row_of(action))(0);
}

Policy::Sample Policy::sample(std::span<const double> obs, Rng& rng) const {
  const Matrix head = trunk_.forward(row_of(obs));
  Sample s;
  if (discrete()) {
    const Vector logits = head.row(0).transpose();
    const Vector p = (logits.array() - logits.maxCoeff()).exp().matrix();
    std::uniform_real_distribution<double> unif(0.0, p.sum());
    const double u = unif(rng);
    double acc = 0.0;
    int chosen = space_.size - 1;
    for (int a = 0; a < space_.size; ++a) {
      acc += p(a);
      if (u < acc) {
        chosen = a;
        break;
      }
    }
    s.action = {static_cast<double>(chosen)};
    s.env_action = s.action;
  } else {
    const Matrix ls = clamped_log_std();
    std::normal_distribution<double> normal(0.0, 1.0);
    s.action.resize(static_cast<std::size_t>(space_.size));
    s.env_action.resize(s.action.size());
    for (int i = 0; i < space_.size; ++i) {
      const double a = head(0, i) + std::exp(ls(0, i)) * normal(rng);
      s.action[static_cast<std::size_t>(i)] = a;
      s.env_action[static_cast<std::size_t>(i)] = std::clamp(a, -space_.bound, space_.bound);
    }
  }
  s.log_prob = log_prob(obs, s.action);
  return s;
}

std::vector<double> Policy::deterministic_action(std::span<const double> obs) const {
  const Matrix head = trunk_.forward(row_of(obs));
  if (discrete()) {
    Eigen::Index best = 0;
    head.row(0).maxCoeff(&best);
    return {static_cast<double>(best)};
  }
  std::vector<double> a(static_cast<std::size_t>(space_.size));
  for (int i = 0; i < space_.size; ++i) {
    a[static_cast<std::size_t>(i)] = std::clamp(head(0, i), -space_.bound, space_.bound);
  }
  return a;
}

double Policy::entropy(const Matrix& obs) const {
  if (obs.rows() == 0) return 0.0;
  if (!discrete()) {
    const double k = space_.size;
    return clamped_log_std().sum() + 0.5 * k * (1.0 + std::log(2.0 * std::numbers::pi));
  }
  const Matrix head = trunk_.forward(obs);
  double total = 0.0;
  for (Eigen::Index r = 0; r < head.rows(); ++r) {
    const Eigen::RowVectorXd x = head.row(r).array() - head.row(r).maxCoeff();
    const Eigen::RowVectorXd p = x.array().exp() / x.array().exp().sum();
    for (Eigen::Index a = 0; a < p.size(); ++a) {
      if (p(a) > 0.0) total -= p(a) * std::log(p(a));
    }
  }
  return total / static_cast<double>(head.rows());
}

Policy::Bound Policy::bind(Tape& tape) const {
  Bound b;
  b.trunk = trunk_.bind(tape);
  if (!discrete()) b.log_std = tape.variable(log_std_);
  return b;
}

Var Policy::log_prob(const Bound& params, Tape& tape, const Matrix& obs,
                     const Matrix& actions) const {
  if (obs.rows() != actions.rows() || actions.cols() != action_columns()) {
    throw ShapeError("log_prob: observation/action batch shapes disagree");
  }
  Var head = trunk_.forward(params.trunk, tape.constant(obs));
  if (discrete()) {
    std::vector<int> index(static_cast<std::size_t>(actions.rows()));
    for (Eigen::Index r = 0; r < actions.rows(); ++r) {
      index[static_cast<std::size_t>(r)] = static_cast<int>(actions(r, 0));
    }
    return gather_cols(log_softmax_rows(head), index);
  }
  Var ls = clip(params.log_std, kLogStdMin, kLogStdMax);
  Var inv_std = exp(neg(ls));
  Var z = mul(sub(tape.constant(actions), head), inv_std);
  Var lp = scale(row_sum(square(z)), -0.5);
  lp = sub(lp, sum(ls));
  return add_scalar(lp, gaussian_log_norm(space_.size));
}

std::size_t Policy::num_params() const {
  return trunk_.num_params() + static_cast<std::size_t>(log_std_.size());
}

void Policy::flatten_into(std::span<double> out) const {
  if (out.size() != num_params()) throw ShapeError("policy flatten: wrong length");
  trunk_.flatten_into(out.first(trunk_.num_params()));
  for (Eigen::Index i = 0; i < log_std_.size(); ++i) {
    out[trunk_.num_params() + static_cast<std::size_t>(i)] = log_std_.data()[i];
  }
}

void Policy::assign_from(std::span<const double> in) {
  if (in.size() != num_params()) throw ShapeError("policy assign: wrong length");
  trunk_.assign_from(in.first(trunk_.num_params()));
  for (Eigen::Index i = 0; i < log_std_.size(); ++i) {
    log_std_.data()[i] = in[trunk_.num_params() + static_cast<std::size_t>(i)];
  }
}

void Policy::flat_grad_into(const Tape& tape, const Bound& params,
                            std::span<double> out) const {
  if (out.size() != num_params()) throw ShapeError("policy grad: wrong length");
  trunk_.flat_grad_into(tape, params.trunk, out.first(trunk_.num_params()));
  if (!discrete()) {
    const Matrix& g = tape.grad(params.log_std);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      out[trunk_.num_params() + static_cast<std::size_t>(i)] = g.data()[i];
    }
  }
}

std::vector<double> Policy::flat() const {
  std::vector<double> v(num_params());
  flatten_into(v);
  return v;
}

nlohmann::json Policy::layout() const {
  return {{"name", "policy"},
          {"head", discrete() ? "categorical" : "gaussian"},
          {"layer_sizes", trunk_.layer_sizes()},
          {"extra", log_std_.size()}};
}

Critic::Critic(int obs_size, const std::vector<int>& hidden, Rng& rng)
    : net_(Mlp::orthogonal(with_io(obs_size, hidden, 1), rng, kHiddenGain,
                           kCriticOutputGain)) {}

double Critic::value(std::span<const double> obs) const {
  return net_.forward(row_of(obs))(0, 0);
}

Vector Critic::values(const Matrix& obs) const { return net_.forward(obs).col(0); }

Checkpoint to_checkpoint(const AgentParams& agent) {
  Checkpoint ckpt;
  nlohmann::json modules = nlohmann::json::array();
  modules.push_back(agent.policy.layout());
  std::vector<double>& v = ckpt.values;
  v = agent.policy.flat();

  auto append_critic = [&](const Critic& c, const std::string& name) {
    modules.push_back({{"name", name}, {"layer_sizes", c.net().layer_sizes()}, {"extra", 0}});
    std::vector<double> buf(c.net().num_params());
    c.net().flatten_into(buf);
    v.insert(v.end(), buf.begin(), buf.end());
  };
  append_critic(agent.reward_critic, "value_r");
  for (std::size_t i = 0; i < agent.cost_critics.size(); ++i) {
    append_critic(agent.cost_critics[i], "value_c_" + std::to_string(i));
  }
  ckpt.header["modules"] = modules;
  return ckpt;
}

void load_into(const Checkpoint& ckpt, AgentParams& like) {
  const Checkpoint expected = to_checkpoint(like);
  const auto& want = expected.header.at("modules");
  const auto got = ckpt.header.value("modules", nlohmann::json::array());
  if (got != want) {
    throw ShapeError("checkpoint layout " + got.dump() + " is incompatible with " +
                     want.dump());
  }
  if (ckpt.values.size() != expected.values.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(ckpt.values.size()) +
                     " values, expected " + std::to_string(expected.values.size()));
  }
  std::span<const double> rest(ckpt.values);
  like.policy.assign_from(rest.first(like.policy.num_params()));
  rest = rest.subspan(like.policy.num_params());
  auto take = [&](Critic& c) {
    c.net().assign_from(rest.first(c.net().num_params()));
    rest = rest.subspan(c.net().num_params());
  };
  take(like.reward_critic);
  for (auto& c : like.cost_critics) take(c);
}

}  // namespace ip3o
