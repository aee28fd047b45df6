#ifndef IP3O_DIFFCORE_H_
#define IP3O_DIFFCORE_H_

// Reverse-mode differentiation over dense row-major batches.
//
// Every node holds a matrix value (rows = batch, cols = features; scalars are
// 1x1). Nodes are appended to a Tape in creation order, which is therefore a
// topological order; backward() walks it once in reverse.
//
// Kink convention: wherever an op is non-differentiable (min/max ties, clip
// boundaries, relu at 0) the gradient follows the branch the forward pass
// selected, and ties go to the unclipped / first operand branch.

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ip3o/penalty.h"

namespace ip3o {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class OpTag : std::uint8_t {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kNeg,
  kScale,
  kAddScalar,
  kTanh,
  kExp,
  kLog,
  kSquare,
  kMin,
  kMax,
  kClip,
  kPenalty,
  kSum,
  kMean,
  kRowSum,
  kLogSoftmax,
  kGatherCols,
};

std::string_view op_name(OpTag op);

class Tape;

// Lightweight handle to a node on a Tape. Valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  double scalar() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf whose gradient is tracked (a parameter or an input of interest).
  Var variable(Matrix value);
  // Leaf treated as a constant; it still receives a gradient slot but nothing
  // is propagated from it.
  Var constant(Matrix value);
  Var scalar_constant(double value);

  // Propagates d(loss)/d(node) to every node. `loss` must be 1x1 and finite.
  // Throws NumericError when any forward value or propagated gradient is
  // non-finite. Gradients are reset before propagation, so calling backward
  // twice gives identical results.
  void backward(Var loss);

  // Gradient of the last backward() target w.r.t. `v`; zero when `v` was not
  // reachable from the loss.
  const Matrix& grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  OpTag op(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].op; }

  // Used by the op free functions below.
  struct Node {
    OpTag op = OpTag::kLeaf;
    Matrix value;
    Matrix grad;
    int a = -1;
    int b = -1;
    double p0 = 0.0;
    double p1 = 0.0;
    PenaltyKind kind = PenaltyKind::kCelu;
    PenaltyConfig penalty;
    std::vector<int> index;
  };
  Var push(Node node);
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

 private:
  void propagate(Node& n);
  Matrix& grad_slot(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }

  std::vector<Node> nodes_;
};

// Matrix product (n x k) * (k x m).
Var matmul(Var a, Var b);
// Elementwise with broadcasting of `b` when it is 1x1 or a 1 x cols row.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
// Elementwise min/max of equal shapes; ties take the gradient of `a`.
Var min(Var a, Var b);
Var max(Var a, Var b);
// Clamp to [lo, hi]; on the boundary the gradient passes through.
Var clip(Var a, double lo, double hi);
// Elementwise barrier/activation from the penalty module.
Var penalty(Var a, PenaltyKind kind, const PenaltyConfig& cfg);
Var celu(Var a, double alpha);
Var relu(Var a);
Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);
Var log_softmax_rows(Var a);
// Picks column index[r] from row r -> (rows x 1).
Var gather_cols(Var a, const std::vector<int>& index);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return neg(a); }
inline Var operator*(double c, Var a) { return scale(a, c); }

}  // namespace ip3o

#endif  // IP3O_DIFFCORE_H_
