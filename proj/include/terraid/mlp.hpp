#pragma once

#include <vector>

#include <Eigen/Dense>

#include "terraid/rng.hpp"

namespace terraid {

/// Fully connected network with tanh hidden activations and a linear output
/// layer. Inputs and outputs are row-per-sample matrices. Backward passes
/// are exact analytic gradients; there is no autograd.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  struct Cache {
    // activations[0] is the input; activations[l] is the post-activation
    // output of layer l (post-tanh for hidden layers, raw for the last).
    std::vector<Eigen::MatrixXd> activations;
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Cache& cache) const;

  /// Accumulates dLoss/dParams into `grad` (same shape as *this) given
  /// dLoss/dOutput. `grad` must be zeroed or hold a partial sum.
  void backward(const Cache& cache, const Eigen::MatrixXd& output_grad,
                Mlp& grad) const;

  /// Orthogonal weight initialization; biases zero. Hidden layers use
  /// hidden_gain, the output layer output_gain.
  void init_orthogonal(Rng& rng, double hidden_gain, double output_gain);

  void set_zero();
  int parameter_count() const;
  void write_flat(double* dst) const;
  void read_flat(const double* src);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }

  // weights[l] has shape (in_l x out_l); biases[l] has length out_l.
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

 private:
  std::vector<int> sizes_;
};

}  // namespace terraid
