#include "ip3o/mlp.h"

#include <random>
#include <string>

#include "ip3o/errors.h"

namespace ip3o {
namespace {

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw ShapeError("an MLP needs at least input and output sizes");
  for (int s : sizes) {
    if (s <= 0) throw ShapeError("layer sizes must be positive");
  }
}

// Rows x cols matrix with orthonormal columns (or rows, whichever is fewer).
Matrix orthogonal_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Eigen::MatrixXd g(big, small);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  // Fix the sign ambiguity of QR so the result is uniformly distributed.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int j = 0; j < small; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  Matrix out = rows >= cols ? Matrix(q) : Matrix(q.transpose());
  return out;
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  check_sizes(sizes_);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.push_back(Matrix::Zero(sizes_[l], sizes_[l + 1]));
    biases_.push_back(Matrix::Zero(1, sizes_[l + 1]));
  }
}

Mlp Mlp::orthogonal(std::vector<int> layer_sizes, Rng& rng, double hidden_gain,
                    double output_gain) {
  Mlp net(std::move(layer_sizes));
  for (std::size_t l = 0; l < net.weights_.size(); ++l) {
    const double gain = l + 1 == net.weights_.size() ? output_gain : hidden_gain;
    net.weights_[l] = gain * orthogonal_matrix(net.sizes_[l], net.sizes_[l + 1], rng);
  }
  return net;
}

Matrix Mlp::forward(const Matrix& input) const {
  if (input.cols() != input_size()) {
    throw ShapeError("mlp input has " + std::to_string(input.cols()) +
                     " features, expected " + std::to_string(input_size()));
  }
  Matrix h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix z;
    z.noalias() = h * weights_[l];
    z = z.rowwise() + biases_[l].row(0);
    if (l + 1 < weights_.size()) z = z.array().tanh().matrix();
    h = std::move(z);
  }
  return h;
}

Mlp::Bound Mlp::bind(Tape& tape) const {
  Bound b;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    b.weights.push_back(tape.variable(weights_[l]));
    b.biases.push_back(tape.variable(biases_[l]));
  }
  return b;
}

Var Mlp::forward(const Bound& params, Var input) const {
  if (input.cols() != input_size()) {
    throw ShapeError("mlp input has " + std::to_string(input.cols()) +
                     " features, expected " + std::to_string(input_size()));
  }
  Var h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = add(matmul(h, params.weights[l]), params.biases[l]);
    if (l + 1 < weights_.size()) h = tanh(h);
  }
  return h;
}

std::size_t Mlp::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

void Mlp::flatten_into(std::span<double> out) const {
  if (out.size() != num_params()) throw ShapeError("flatten: wrong buffer length");
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].size(); ++i) out[k++] = weights_[l].data()[i];
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) out[k++] = biases_[l].data()[i];
  }
}

void Mlp::assign_from(std::span<const double> in) {
  if (in.size() != num_params()) throw ShapeError("assign: wrong buffer length");
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].size(); ++i) weights_[l].data()[i] = in[k++];
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l].data()[i] = in[k++];
  }
}

void Mlp::flat_grad_into(const Tape& tape, const Bound& params,
                         std::span<double> out) const {
  if (out.size() != num_params()) throw ShapeError("flat_grad: wrong buffer length");
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Matrix& gw = tape.grad(params.weights[l]);
    const Matrix& gb = tape.grad(params.biases[l]);
    for (Eigen::Index i = 0; i < gw.size(); ++i) out[k++] = gw.data()[i];
    for (Eigen::Index i = 0; i < gb.size(); ++i) out[k++] = gb.data()[i];
  }
}

bool Mlp::operator==(const Mlp& other) const {
  if (sizes_ != other.sizes_) return false;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
  }
  return true;
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
  if (static_cast<int>(input.size()) != net.input_size()) {
    throw ShapeError("mlp_forward: input length " + std::to_string(input.size()) +
                     " does not match first layer size " +
                     std::to_string(net.input_size()));
  }
  Matrix x(1, net.input_size());
  for (int i = 0; i < net.input_size(); ++i) x(0, i) = input[static_cast<std::size_t>(i)];
  const Matrix y = net.forward(x);
  return {y.data(), y.data() + y.size()};
}

}  // namespace ip3o
