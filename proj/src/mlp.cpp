#include "terraid/mlp.hpp"

#include <stdexcept>

namespace terraid {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("need >= 2 layer sizes");
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("layer sizes must be positive");
  }
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights.emplace_back(Eigen::MatrixXd::Zero(sizes_[l], sizes_[l + 1]));
    biases.emplace_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  Cache cache;
  return forward(input, cache);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input,
                             Cache& cache) const {
  if (input.cols() != sizes_.front()) {
    throw std::invalid_argument("input width does not match the network");
  }
  cache.activations.clear();
  cache.activations.reserve(weights.size() + 1);
  cache.activations.push_back(input);
  Eigen::MatrixXd a = input;
  for (size_t l = 0; l < weights.size(); ++l) {
    Eigen::MatrixXd z =
        (a * weights[l]).rowwise() + biases[l].transpose();
    if (l + 1 < weights.size()) z = z.array().tanh();
    cache.activations.push_back(z);
    a = std::move(z);
  }
  return cache.activations.back();
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& output_grad,
                   Mlp& grad) const {
  if (cache.activations.size() != weights.size() + 1) {
    throw std::invalid_argument("cache does not match the network");
  }
  Eigen::MatrixXd delta = output_grad;  // dL/dz of the current layer
  for (size_t l = weights.size(); l-- > 0;) {
    const Eigen::MatrixXd& a_prev = cache.activations[l];
    grad.weights[l].noalias() += a_prev.transpose() * delta;
    grad.biases[l] += delta.colwise().sum().transpose();
    if (l > 0) {
      // Through the previous layer's tanh: a = tanh(z), da/dz = 1 - a^2.
      const Eigen::MatrixXd& a = cache.activations[l];
      delta = (delta * weights[l].transpose()).array() *
              (1.0 - a.array().square());
    }
  }
}

namespace {

Eigen::MatrixXd orthogonal_matrix(Rng& rng, int rows, int cols, double gain) {
  const int n = std::max(rows, cols);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return gain * q.topLeftCorner(rows, cols);
}

}  // namespace

void Mlp::init_orthogonal(Rng& rng, double hidden_gain, double output_gain) {
  for (size_t l = 0; l < weights.size(); ++l) {
    const double gain = l + 1 < weights.size() ? hidden_gain : output_gain;
    weights[l] = orthogonal_matrix(rng, static_cast<int>(weights[l].rows()),
                                   static_cast<int>(weights[l].cols()), gain);
    biases[l].setZero();
  }
}

void Mlp::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

int Mlp::parameter_count() const {
  int n = 0;
  for (size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<int>(weights[l].size() + biases[l].size());
  }
  return n;
}

void Mlp::write_flat(double* dst) const {
  for (size_t l = 0; l < weights.size(); ++l) {
    const auto& w = weights[l];
    std::copy(w.data(), w.data() + w.size(), dst);
    dst += w.size();
    std::copy(biases[l].data(), biases[l].data() + biases[l].size(), dst);
    dst += biases[l].size();
  }
}

void Mlp::read_flat(const double* src) {
  for (size_t l = 0; l < weights.size(); ++l) {
    auto& w = weights[l];
    std::copy(src, src + w.size(), w.data());
    src += w.size();
    std::copy(src, src + biases[l].size(), biases[l].data());
    src += biases[l].size();
  }
}

}  // namespace terraid
