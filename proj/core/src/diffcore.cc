#include "ip3o/diffcore.h"

#include <cmath>
#include <string>

#include "ip3o/errors.h"

namespace ip3o {
namespace {

enum class Broadcast { kSame, kRow, kScalar };

Broadcast broadcast_kind(const Matrix& a, const Matrix& b, std::string_view op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::kSame;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::kScalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  throw ShapeError(std::string(op) + ": cannot broadcast " + std::to_string(b.rows()) +
                   "x" + std::to_string(b.cols()) + " onto " +
                   std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

// Expands b to a's shape.
Matrix expand(const Matrix& a, const Matrix& b, Broadcast kind) {
  switch (kind) {
    case Broadcast::kSame: return b;
    case Broadcast::kRow: return b.replicate(a.rows(), 1);
    case Broadcast::kScalar: return Matrix::Constant(a.rows(), a.cols(), b(0, 0));
  }
  return b;
}

// Reduces a gradient of a's shape back to b's shape.
Matrix reduce(const Matrix& g, const Matrix& b) {
  if (g.rows() == b.rows() && g.cols() == b.cols()) return g;
  if (b.rows() == 1 && b.cols() == 1) return Matrix::Constant(1, 1, g.sum());
  return g.colwise().sum();
}

void require_same_shape(const Matrix& a, const Matrix& b, std::string_view op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": operand shapes differ");
  }
}

Tape& tape_of(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw std::invalid_argument("operands belong to different tapes");
  }
  return *a.tape;
}

Tape::Node unary(OpTag op, Var a) {
  Tape::Node n;
  n.op = op;
  n.a = a.id;
  return n;
}

Tape::Node binary(OpTag op, Var a, Var b) {
  Tape::Node n;
  n.op = op;
  n.a = a.id;
  n.b = b.id;
  return n;
}

}  // namespace

std::string_view op_name(OpTag op) {
  switch (op) {
    case OpTag::kLeaf: return "leaf";
    case OpTag::kMatMul: return "matmul";
    case OpTag::kAdd: return "add";
    case OpTag::kSub: return "sub";
    case OpTag::kMul: return "mul";
    case OpTag::kNeg: return "neg";
    case OpTag::kScale: return "scale";
    case OpTag::kAddScalar: return "add_scalar";
    case OpTag::kTanh: return "tanh";
    case OpTag::kExp: return "exp";
    case OpTag::kLog: return "log";
    case OpTag::kSquare: return "square";
    case OpTag::kMin: return "min";
    case OpTag::kMax: return "max";
    case OpTag::kClip: return "clip";
    case OpTag::kPenalty: return "penalty";
    case OpTag::kSum: return "sum";
    case OpTag::kMean: return "mean";
    case OpTag::kRowSum: return "row_sum";
    case OpTag::kLogSoftmax: return "log_softmax";
    case OpTag::kGatherCols: return "gather_cols";
  }
  return "?";
}

const Matrix& Var::value() const { return tape->node(id).value; }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("scalar() on a non-scalar node");
  return v(0, 0);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::variable(Matrix value) {
  Node n;
  n.op = OpTag::kLeaf;
  n.value = std::move(value);
  n.p0 = 1.0;  // tracked
  return push(std::move(n));
}

Var Tape::constant(Matrix value) {
  Node n;
  n.op = OpTag::kLeaf;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::scalar_constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

const Matrix& Tape::grad(Var v) const { return node(v.id).grad; }

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("loss belongs to another tape");
  const Matrix& lv = node(loss.id).value;
  if (lv.rows() != 1 || lv.cols() != 1) throw ShapeError("backward() needs a scalar loss");

  for (auto& n : nodes_) {
    if (!n.value.allFinite()) {
      throw NumericError("non-finite forward value at " + std::string(op_name(n.op)) +
                         " node");
    }
    n.grad.setZero(n.value.rows(), n.value.cols());
  }
  grad_slot(loss.id)(0, 0) = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.op == OpTag::kLeaf) continue;
    propagate(n);
    if (!n.grad.allFinite()) {
      throw NumericError("non-finite gradient at " + std::string(op_name(n.op)) + " node");
    }
  }
}

void Tape::propagate(Node& n) {
  const Matrix& g = n.grad;
  if (g.isZero(0.0)) return;
  auto value_of = [this](int id) -> const Matrix& { return node(id).value; };

  switch (n.op) {
    case OpTag::kLeaf:
      return;
    case OpTag::kMatMul: {
      const Matrix& a = value_of(n.a);
      const Matrix& b = value_of(n.b);
      grad_slot(n.a).noalias() += g * b.transpose();
      grad_slot(n.b).noalias() += a.transpose() * g;
      return;
    }
    case OpTag::kAdd:
      grad_slot(n.a) += g;
      grad_slot(n.b) += reduce(g, value_of(n.b));
      return;
    case OpTag::kSub:
      grad_slot(n.a) += g;
      grad_slot(n.b) -= reduce(g, value_of(n.b));
      return;
    case OpTag::kMul: {
      const Matrix& a = value_of(n.a);
      const Matrix& b = value_of(n.b);
      const Matrix be = expand(a, b, broadcast_kind(a, b, "mul"));
      grad_slot(n.a).array() += g.array() * be.array();
      grad_slot(n.b) += reduce((g.array() * a.array()).matrix(), b);
      return;
    }
    case OpTag::kNeg:
      grad_slot(n.a) -= g;
      return;
    case OpTag::kScale:
      grad_slot(n.a) += n.p0 * g;
      return;
    case OpTag::kAddScalar:
      grad_slot(n.a) += g;
      return;
    case OpTag::kTanh:
      grad_slot(n.a).array() += g.array() * (1.0 - n.value.array().square());
      return;
    case OpTag::kExp:
      grad_slot(n.a).array() += g.array() * n.value.array();
      return;
    case OpTag::kLog:
      grad_slot(n.a).array() += g.array() / value_of(n.a).array();
      return;
    case OpTag::kSquare:
      grad_slot(n.a).array() += 2.0 * g.array() * value_of(n.a).array();
      return;
    case OpTag::kMin:
    case OpTag::kMax: {
      const Matrix& a = value_of(n.a);
      const Matrix& b = value_of(n.b);
      Matrix& ga = grad_slot(n.a);
      Matrix& gb = grad_slot(n.b);
      const bool is_min = n.op == OpTag::kMin;
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double av = a.data()[i];
        const double bv = b.data()[i];
        const bool pick_a = is_min ? av <= bv : av >= bv;
        (pick_a ? ga : gb).data()[i] += g.data()[i];
      }
      return;
    }
    case OpTag::kClip: {
      const Matrix& a = value_of(n.a);
      Matrix& ga = grad_slot(n.a);
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double av = a.data()[i];
        if (av >= n.p0 && av <= n.p1) ga.data()[i] += g.data()[i];
      }
      return;
    }
    case OpTag::kPenalty: {
      const Matrix& a = value_of(n.a);
      Matrix& ga = grad_slot(n.a);
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        ga.data()[i] += g.data()[i] * penalty_grad(n.kind, a.data()[i], n.penalty);
      }
      return;
    }
    case OpTag::kSum:
      grad_slot(n.a).array() += g(0, 0);
      return;
    case OpTag::kMean: {
      const Matrix& a = value_of(n.a);
      grad_slot(n.a).array() += g(0, 0) / static_cast<double>(a.size());
      return;
    }
    case OpTag::kRowSum:
      grad_slot(n.a) += g.replicate(1, value_of(n.a).cols());
      return;
    case OpTag::kLogSoftmax: {
      // d/dx_j of log p_i = delta_ij - p_j.
      const Matrix p = n.value.array().exp().matrix();
      const Vector gsum = g.rowwise().sum();
      Matrix& ga = grad_slot(n.a);
      ga.array() += g.array() - p.array().colwise() * gsum.array();
      return;
    }
    case OpTag::kGatherCols: {
      Matrix& ga = grad_slot(n.a);
      for (Eigen::Index r = 0; r < ga.rows(); ++r) {
        ga(r, n.index[static_cast<std::size_t>(r)]) += g(r, 0);
      }
      return;
    }
  }
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                     std::to_string(b.rows()) + " differ");
  }
  auto n = binary(OpTag::kMatMul, a, b);
  n.value.noalias() = a.value() * b.value();
  return t.push(std::move(n));
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const auto kind = broadcast_kind(a.value(), b.value(), "add");
  auto n = binary(OpTag::kAdd, a, b);
  switch (kind) {
    case Broadcast::kSame: n.value = a.value() + b.value(); break;
    case Broadcast::kRow: n.value = a.value().rowwise() + b.value().row(0); break;
    case Broadcast::kScalar: n.value = a.value().array() + b.value()(0, 0); break;
  }
  return t.push(std::move(n));
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const auto kind = broadcast_kind(a.value(), b.value(), "sub");
  auto n = binary(OpTag::kSub, a, b);
  switch (kind) {
    case Broadcast::kSame: n.value = a.value() - b.value(); break;
    case Broadcast::kRow: n.value = a.value().rowwise() - b.value().row(0); break;
    case Broadcast::kScalar: n.value = a.value().array() - b.value()(0, 0); break;
  }
  return t.push(std::move(n));
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const auto kind = broadcast_kind(a.value(), b.value(), "mul");
  auto n = binary(OpTag::kMul, a, b);
  n.value = (a.value().array() * expand(a.value(), b.value(), kind).array()).matrix();
  return t.push(std::move(n));
}

Var neg(Var a) {
  auto n = unary(OpTag::kNeg, a);
  n.value = -a.value();
  return a.tape->push(std::move(n));
}

Var scale(Var a, double c) {
  auto n = unary(OpTag::kScale, a);
  n.p0 = c;
  n.value = c * a.value();
  return a.tape->push(std::move(n));
}

Var add_scalar(Var a, double c) {
  auto n = unary(OpTag::kAddScalar, a);
  n.p0 = c;
  n.value = (a.value().array() + c).matrix();
  return a.tape->push(std::move(n));
}

Var tanh(Var a) {
  auto n = unary(OpTag::kTanh, a);
  n.value = a.value().array().tanh().matrix();
  return a.tape->push(std::move(n));
}

Var exp(Var a) {
  auto n = unary(OpTag::kExp, a);
  n.value = a.value().array().exp().matrix();
  return a.tape->push(std::move(n));
}

Var log(Var a) {
  auto n = unary(OpTag::kLog, a);
  n.value = a.value().array().log().matrix();
  return a.tape->push(std::move(n));
}

Var square(Var a) {
  auto n = unary(OpTag::kSquare, a);
  n.value = a.value().array().square().matrix();
  return a.tape->push(std::move(n));
}

Var min(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "min");
  auto n = binary(OpTag::kMin, a, b);
  n.value = a.value().cwiseMin(b.value());
  return t.push(std::move(n));
}

Var max(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "max");
  auto n = binary(OpTag::kMax, a, b);
  n.value = a.value().cwiseMax(b.value());
  return t.push(std::move(n));
}

Var clip(Var a, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clip: lo > hi");
  auto n = unary(OpTag::kClip, a);
  n.p0 = lo;
  n.p1 = hi;
  n.value = a.value().cwiseMax(lo).cwiseMin(hi);
  return a.tape->push(std::move(n));
}

Var penalty(Var a, PenaltyKind kind, const PenaltyConfig& cfg) {
  auto n = unary(OpTag::kPenalty, a);
  n.kind = kind;
  n.penalty = cfg;
  n.value = a.value().unaryExpr([&](double x) { return penalty_value(kind, x, cfg); });
  return a.tape->push(std::move(n));
}

Var celu(Var a, double alpha) {
  PenaltyConfig cfg;
  cfg.alpha = alpha;
  return penalty(a, PenaltyKind::kCelu, cfg);
}

Var relu(Var a) { return penalty(a, PenaltyKind::kReluP3o, PenaltyConfig{}); }

Var sum(Var a) {
  auto n = unary(OpTag::kSum, a);
  n.value = Matrix::Constant(1, 1, a.value().sum());
  return a.tape->push(std::move(n));
}

Var mean(Var a) {
  if (a.value().size() == 0) throw EmptyBatchError("mean of an empty node");
  auto n = unary(OpTag::kMean, a);
  n.value = Matrix::Constant(1, 1, a.value().mean());
  return a.tape->push(std::move(n));
}

Var row_sum(Var a) {
  auto n = unary(OpTag::kRowSum, a);
  n.value = a.value().rowwise().sum();
  return a.tape->push(std::move(n));
}

Var log_softmax_rows(Var a) {
  auto n = unary(OpTag::kLogSoftmax, a);
  const Matrix& x = a.value();
  const Vector m = x.rowwise().maxCoeff();
  Matrix shifted = x.colwise() - m;
  const Vector lse = shifted.array().exp().rowwise().sum().log().matrix();
  n.value = shifted.colwise() - lse;
  return a.tape->push(std::move(n));
}

Var gather_cols(Var a, const std::vector<int>& index) {
  const Matrix& x = a.value();
  if (static_cast<Eigen::Index>(index.size()) != x.rows()) {
    throw ShapeError("gather_cols: one index per row required");
  }
  auto n = unary(OpTag::kGatherCols, a);
  n.index = index;
  n.value.resize(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const int c = index[static_cast<std::size_t>(r)];
    if (c < 0 || c >= x.cols()) throw ShapeError("gather_cols: index out of range");
    n.value(r, 0) = x(r, c);
  }
  return a.tape->push(std::move(n));
}

}  // namespace ip3o
