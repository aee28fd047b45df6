#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ip3o/adam.h"
#include "ip3o/checkpoint.h"
#include "ip3o/diffcore.h"
#include "ip3o/errors.h"
#include "ip3o/mlp.h"
#include "support.h"

namespace ip3o {
namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = n(rng);
  return m;
}

// Central-difference check of d f / d x for a scalar function of one input.
void expect_grad_matches(const std::function<Var(Tape&, Var)>& f, const Matrix& x0,
                         double tol = 1e-6) {
  Tape tape;
  Var x = tape.variable(x0);
  tape.backward(f(tape, x));
  const Matrix g = tape.grad(x);
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < x0.size(); ++k) {
    Matrix up = x0, down = x0;
    up.data()[k] += h;
    down.data()[k] -= h;
    Tape t1, t2;
    const double fu = f(t1, t1.variable(up)).scalar();
    const double fd = f(t2, t2.variable(down)).scalar();
    EXPECT_NEAR(g.data()[k], (fu - fd) / (2 * h), tol) << "element " << k;
  }
}

TEST(Diffcore, ElementwiseOpsMatchFiniteDifferences) {
  const Matrix x = random_matrix(3, 4, 1);
  const Matrix other = random_matrix(3, 4, 2);
  expect_grad_matches([](Tape&, Var v) { return sum(tanh(v)); }, x);
  expect_grad_matches([](Tape&, Var v) { return mean(exp(v)); }, x);
  expect_grad_matches([](Tape&, Var v) { return sum(log(add_scalar(square(v), 1.0))); }, x);
  expect_grad_matches([&](Tape& t, Var v) { return sum(mul(v, t.constant(other))); }, x);
  expect_grad_matches([&](Tape& t, Var v) { return sum(sub(t.constant(other), v)); }, x);
  expect_grad_matches([](Tape&, Var v) { return sum(scale(neg(v), 3.0)); }, x);
  expect_grad_matches([](Tape&, Var v) { return sum(celu(v, 0.3)); }, x);
  expect_grad_matches([](Tape&, Var v) { return sum(relu(add_scalar(v, 0.1234))); }, x);
  expect_grad_matches([](Tape&, Var v) { return sum(clip(v, -0.5, 0.5)); }, x);
  expect_grad_matches([&](Tape& t, Var v) { return sum(min(v, t.constant(other))); }, x);
  expect_grad_matches([&](Tape& t, Var v) { return sum(max(v, t.constant(other))); }, x);
}

TEST(Diffcore, ReductionsAndRowOps) {
  const Matrix x = random_matrix(4, 3, 3);
  expect_grad_matches([](Tape&, Var v) { return sum(square(row_sum(v))); }, x);
  expect_grad_matches(
      [](Tape&, Var v) { return sum(gather_cols(log_softmax_rows(v), {0, 2, 1, 2})); }, x);
  const Matrix w = random_matrix(3, 2, 4);
  expect_grad_matches([&](Tape& t, Var v) { return sum(tanh(matmul(v, t.constant(w)))); }, x);
  const Matrix left = random_matrix(2, 4, 9);
  expect_grad_matches([&](Tape& t, Var v) { return sum(tanh(matmul(t.constant(left), v))); }, x);
}

TEST(Diffcore, BroadcastingAccumulatesIntoRowAndScalar) {
  const Matrix x = random_matrix(5, 3, 5);
  const Matrix row = random_matrix(1, 3, 6);
  expect_grad_matches([&](Tape& t, Var v) { return sum(square(add(t.constant(x), v))); }, row);
  expect_grad_matches([&](Tape& t, Var v) { return sum(square(mul(t.constant(x), v))); }, row);
  expect_grad_matches([&](Tape& t, Var v) { return sum(square(sub(t.constant(x), v))); },
                      Matrix::Constant(1, 1, 0.7));
}

TEST(Diffcore, KinksFollowTheSelectedBranch) {
  Tape t;
  Var a = t.variable(Matrix::Constant(1, 1, 2.0));
  Var b = t.variable(Matrix::Constant(1, 1, 2.0));
  t.backward(sum(min(a, b)));
  EXPECT_EQ(t.grad(a)(0, 0), 1.0);
  EXPECT_EQ(t.grad(b)(0, 0), 0.0);
  t.backward(sum(max(a, b)));
  EXPECT_EQ(t.grad(a)(0, 0), 1.0);
  EXPECT_EQ(t.grad(b)(0, 0), 0.0);

  Tape c;
  Var x = c.variable((Matrix(1, 4) << -1.0, -0.5, 0.5, 1.0).finished());
  c.backward(sum(clip(x, -0.5, 0.5)));
  EXPECT_EQ(c.grad(x), (Matrix(1, 4) << 0.0, 1.0, 1.0, 0.0).finished());
}

TEST(Diffcore, BackwardIsRepeatableAndUnreachableGradsAreZero) {
  Tape t;
  Var x = t.variable(random_matrix(2, 2, 7));
  Var unused = t.variable(random_matrix(2, 2, 8));
  Var loss = sum(square(x));
  t.backward(loss);
  const Matrix first = t.grad(x);
  t.backward(loss);
  EXPECT_EQ(first, t.grad(x));
  EXPECT_TRUE(t.grad(unused).isZero());
}

TEST(Diffcore, ErrorsOnBadShapesAndNonFiniteValues) {
  Tape t;
  Var a = t.variable(Matrix::Ones(2, 3));
  Var b = t.variable(Matrix::Ones(2, 3));
  EXPECT_THROW(matmul(a, b), ShapeError);
  EXPECT_THROW(add(a, t.variable(Matrix::Ones(3, 3))), ShapeError);
  EXPECT_THROW(t.backward(a), ShapeError);
  Var bad = sum(log(t.variable(Matrix::Constant(1, 1, -1.0))));
  EXPECT_THROW(t.backward(bad), NumericError);
}

TEST(Diffcore, RandomCompositionsPassGradientCheck) {
  for (int k = 0; k < 100; ++k) {
    const auto gc = testing::check_random_composition(k);
    EXPECT_LT(gc.relative_error, 1e-4) << "composition " << k << ": " << gc.description;
  }
}

TEST(Mlp, OrthogonalInitHasOrthonormalColumnsOrRows) {
  Rng rng(3);
  const Mlp net = Mlp::orthogonal({6, 4, 8}, rng, 1.0, 2.0);
  const Matrix& w0 = net.weight(0);  // 6 x 4: orthonormal columns
  EXPECT_TRUE((w0.transpose() * w0).isApprox(Matrix::Identity(4, 4), 1e-12));
  const Matrix& w1 = net.weight(1);  // 4 x 8: rows of norm 2
  EXPECT_TRUE((w1 * w1.transpose()).isApprox(4.0 * Matrix::Identity(4, 4), 1e-12));
  EXPECT_TRUE(net.bias(0).isZero());
}

TEST(Mlp, FlattenRoundTripAndSingleSampleForward) {
  Rng rng(4);
  Mlp net = Mlp::orthogonal({3, 5, 2}, rng, 1.0, 1.0);
  std::vector<double> flat(net.num_params());
  EXPECT_EQ(flat.size(), 3u * 5 + 5 + 5 * 2 + 2);
  net.flatten_into(flat);
  Mlp copy({3, 5, 2});
  copy.assign_from(flat);
  EXPECT_TRUE(copy == net);
  const std::vector<double> x = {0.1, -0.2, 0.3};
  const Matrix batch = Eigen::Map<const Matrix>(x.data(), 1, 3);
  const auto y = mlp_forward(net, x);
  EXPECT_EQ(y[0], net.forward(batch)(0, 0));
  EXPECT_THROW(mlp_forward(net, std::vector<double>{1.0}), ShapeError);
}

TEST(Adam, FirstStepMovesEachParameterByLearningRate) {
  std::vector<double> p = {1.0, -2.0, 0.5};
  const std::vector<double> g = {0.3, -4.0, 1e-3};
  AdamState s(3);
  adam_step(p, g, s, 0.1);
  // With bias correction the first step is lr * g / (|g| + eps').
  EXPECT_NEAR(p[0], 0.9, 1e-7);
  EXPECT_NEAR(p[1], -1.9, 1e-7);
  EXPECT_NEAR(p[2], 0.4, 1e-4);
  EXPECT_EQ(s.step, 1u);
  EXPECT_THROW(adam_step(p, std::vector<double>{1.0}, s, 0.1), ShapeError);
}

TEST(Adam, GradientNormClipping) {
  std::vector<double> g = {3.0, 4.0};
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 1.0), 5.0);
  EXPECT_NEAR(g[0], 0.6, 1e-15);
  EXPECT_NEAR(g[1], 0.8, 1e-15);
  std::vector<double> small = {0.1};
  clip_grad_norm(small, 1.0);
  EXPECT_EQ(small[0], 0.1);
}

TEST(Checkpoint, EncodeDecodeRoundTrip) {
  Checkpoint c;
  c.header["modules"] = {{{"name", "x"}}};
  c.values = {1.0, -0.0, 1e-300, std::nextafter(1.0, 2.0)};
  const Checkpoint back = decode_checkpoint(encode_checkpoint(c));
  EXPECT_EQ(back.values.size(), c.values.size());
  for (std::size_t k = 0; k < c.values.size(); ++k) {
    EXPECT_EQ(std::memcmp(&back.values[k], &c.values[k], sizeof(double)), 0);
  }
  EXPECT_EQ(back.header["modules"], c.header["modules"]);
  std::string bytes = encode_checkpoint(c);
  bytes.pop_back();
  EXPECT_THROW(decode_checkpoint(bytes), ShapeError);
}

}  // namespace
}  // namespace ip3o
