#ifndef PAXRL_NN_HPP
#define PAXRL_NN_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "paxrl/matrix.hpp"

namespace pax::nn {

inline double leaky_relu(double x, double negative_slope) {
  return x >= 0.0 ? x : negative_slope * x;
}

// Buffer shaped exactly like a network's weights and biases. Used for
// gradients and for the ADAM moment accumulators.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  void set_zero();
  bool operator==(const Gradients&) const = default;
};

// Intermediates of one forward pass, retained for backpropagation.
// pre[l] holds the affine output of layer l, post[l] the activated value
// (identical to pre[l] for the final, linear layer).
struct ForwardTrace {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;

  const std::vector<double>& output() const { return post.back(); }
};

// Batched variant of ForwardTrace: row b of every matrix belongs to sample b.
struct BatchTrace {
  Matrix input;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;

  const Matrix& output() const { return post.back(); }
};

// Fully connected network: affine + leaky-ReLU for every hidden layer, final
// layer affine only. Carries per-parameter ADAM moment state. Single-writer;
// forward/backward are const and safe to run concurrently on frozen
// parameters.
class Network {
 public:
  Network(std::vector<int> layer_sizes, double init_stddev, double negative_slope,
          std::uint64_t rng_seed);

  ForwardTrace forward(std::span<const double> input) const;

  // Reverse-mode gradients of (output_grad . output) with respect to every
  // weight and bias, and the input vector when input_grad is non-null.
  Gradients backward(const ForwardTrace& trace, std::span<const double> output_grad,
                     std::vector<double>* input_grad = nullptr) const;

  // Batched passes used on the training path. backward_batch accumulates the
  // SUM of per-sample gradients; callers scale output_grads for a mean.
  void forward_batch(const Matrix& inputs, BatchTrace& trace) const;
  void backward_batch(const BatchTrace& trace, const Matrix& output_grads,
                      Gradients& grads, Matrix* input_grads = nullptr) const;
  // Gradient of (output_grads . outputs) w.r.t. the inputs only; skips the
  // weight/bias gradients entirely.
  void input_gradients_batch(const BatchTrace& trace, const Matrix& output_grads,
                             Matrix& input_grads) const;

  // One bias-corrected ADAM update in the DESCENT direction of grads.
  // beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
  void adam_step(const Gradients& grads, double learning_rate);

  Gradients make_gradients() const;

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  std::size_t layer_count() const { return weights_.size(); }
  int input_size() const { return layer_sizes_.front(); }
  int output_size() const { return layer_sizes_.back(); }
  double negative_slope() const { return negative_slope_; }
  std::int64_t adam_step_count() const { return adam_step_count_; }

  Matrix& weight(std::size_t layer) { return weights_[layer]; }
  const Matrix& weight(std::size_t layer) const { return weights_[layer]; }
  std::vector<double>& bias(std::size_t layer) { return biases_[layer]; }
  const std::vector<double>& bias(std::size_t layer) const { return biases_[layer]; }
  const Gradients& adam_first_moments() const { return adam_m_; }
  const Gradients& adam_second_moments() const { return adam_v_; }

  bool same_shape(const Network& other) const;
  bool bitwise_equal(const Network& other) const;

  // Checkpoint: text header (magic "PAXNN1", layer sizes, adam step count)
  // followed by raw little-endian 64-bit floats; see save() for the layout.
  void save(const std::filesystem::path& path) const;
  static Network load(const std::filesystem::path& path, double negative_slope);

 private:
  Network() = default;
  void check_finite(const char* where) const;

  std::vector<int> layer_sizes_;
  double negative_slope_ = 0.01;
  std::vector<Matrix> weights_;  // weights_[l]: layer_sizes_[l+1] x layer_sizes_[l]
  std::vector<std::vector<double>> biases_;
  Gradients adam_m_;
  Gradients adam_v_;
  std::int64_t adam_step_count_ = 0;
};

}  // namespace pax::nn

#endif
