#ifndef IP3O_MLP_H_
#define IP3O_MLP_H_

#include <span>
#include <vector>

#include "ip3o/diffcore.h"
#include "ip3o/rng.h"

namespace ip3o {

inline const std::vector<int> kDefaultHiddenSizes = {64, 64};

// Fully connected network with tanh hidden activations and a linear output.
// Weights of layer l are stored as a (sizes[l] x sizes[l+1]) matrix so that a
// batch of row inputs maps as X * W + b.
class Mlp {
 public:
  Mlp() = default;
  // Zero weights and biases. Throws ShapeError for fewer than two sizes or a
  // non-positive size.
  explicit Mlp(std::vector<int> layer_sizes);

  // Orthogonal initialisation scaled by `hidden_gain` for hidden layers and
  // `output_gain` for the last layer; biases start at zero.
  static Mlp orthogonal(std::vector<int> layer_sizes, Rng& rng, double hidden_gain,
                        double output_gain);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return weights_.size(); }

  Matrix& weight(std::size_t l) { return weights_[l]; }
  const Matrix& weight(std::size_t l) const { return weights_[l]; }
  Matrix& bias(std::size_t l) { return biases_[l]; }
  const Matrix& bias(std::size_t l) const { return biases_[l]; }

  // Batched evaluation without recording. Rows of `input` are samples.
  Matrix forward(const Matrix& input) const;

  // Parameters registered on a tape, layer by layer.
  struct Bound {
    std::vector<Var> weights;
    std::vector<Var> biases;
  };
  Bound bind(Tape& tape) const;
  Var forward(const Bound& params, Var input) const;

  std::size_t num_params() const;
  // Layout: for each layer, weights row-major then biases.
  void flatten_into(std::span<double> out) const;
  void assign_from(std::span<const double> in);
  void flat_grad_into(const Tape& tape, const Bound& params, std::span<double> out) const;

  bool operator==(const Mlp& other) const;

 private:
  std::vector<int> sizes_;
  std::vector<Matrix> weights_;
  std::vector<Matrix> biases_;
};

// Single-sample forward pass. Throws ShapeError when |input| differs from the
// first layer size.
std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input);

}  // namespace ip3o

#endif  // IP3O_MLP_H_
