#include "paxrl/nn.hpp"

#include <cblas.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

extern "C" void openblas_set_num_threads(int);

namespace pax::nn {

namespace {

// Forced single-threaded so every GEMM is bit-deterministic; parallelism
// happens at the training-cell level instead.
struct BlasSetup {
  BlasSetup() { openblas_set_num_threads(1); }
};
const BlasSetup blas_setup;

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr char kMagic[] = "PAXNN1";

void write_le_doubles(std::ostream& out, const double* values, std::size_t count) {
  std::vector<unsigned char> buf(count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) buf[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void read_le_doubles(std::istream& in, double* values, std::size_t count) {
  std::vector<unsigned char> buf(count * 8);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw std::runtime_error("checkpoint truncated");
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[i * 8 + b]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
}

bool all_finite(const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

}  // namespace

void Gradients::set_zero() {
  for (auto& w : weights) w.fill(0.0);
  for (auto& b : biases) b.assign(b.size(), 0.0);
}

Network::Network(std::vector<int> layer_sizes, double init_stddev, double negative_slope,
                 std::uint64_t rng_seed)
    : layer_sizes_(std::move(layer_sizes)), negative_slope_(negative_slope) {
  if (layer_sizes_.size() < 2) {
    throw std::invalid_argument("network needs at least input and output sizes");
  }
  for (int s : layer_sizes_) {
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  }
  if (!(init_stddev > 0.0) || !std::isfinite(init_stddev)) {
    throw std::invalid_argument("init_stddev must be positive and finite");
  }
  if (!(negative_slope >= 0.0) || !std::isfinite(negative_slope)) {
    throw std::invalid_argument("negative_slope must be non-negative and finite");
  }

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, init_stddev);
  const std::size_t layers = layer_sizes_.size() - 1;
  weights_.reserve(layers);
  biases_.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto rows = static_cast<std::size_t>(layer_sizes_[l + 1]);
    const auto cols = static_cast<std::size_t>(layer_sizes_[l]);
    Matrix w(rows, cols);
    for (double& x : w.data) x = gauss(rng);
    weights_.push_back(std::move(w));
    biases_.emplace_back(rows, 0.0);
  }
  adam_m_ = make_gradients();
  adam_v_ = make_gradients();
}

Gradients Network::make_gradients() const {
  Gradients g;
  g.weights.reserve(weights_.size());
  g.biases.reserve(biases_.size());
  for (const auto& w : weights_) g.weights.emplace_back(w.rows, w.cols);
  for (const auto& b : biases_) g.biases.emplace_back(b.size(), 0.0);
  return g;
}

ForwardTrace Network::forward(std::span<const double> input) const {
  if (input.size() != static_cast<std::size_t>(input_size())) {
    throw std::invalid_argument("forward: input length mismatch");
  }
  if (!all_finite(input.data(), input.size())) {
    throw std::invalid_argument("forward: non-finite input");
  }

  ForwardTrace trace;
  trace.input.assign(input.begin(), input.end());
  const std::size_t layers = weights_.size();
  trace.pre.resize(layers);
  trace.post.resize(layers);

  const std::vector<double>* x = &trace.input;
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = weights_[l];
    const std::vector<double>& b = biases_[l];
    std::vector<double>& pre = trace.pre[l];
    pre.resize(w.rows);
    for (std::size_t i = 0; i < w.rows; ++i) {
      const double* wr = w.row(i);
      double acc = b[i];
      for (std::size_t j = 0; j < w.cols; ++j) acc += wr[j] * (*x)[j];
      pre[i] = acc;
    }
    std::vector<double>& post = trace.post[l];
    if (l + 1 == layers) {
      post = pre;
    } else {
      post.resize(pre.size());
      for (std::size_t i = 0; i < pre.size(); ++i) post[i] = leaky_relu(pre[i], negative_slope_);
    }
    x = &post;
  }
  return trace;
}

Gradients Network::backward(const ForwardTrace& trace, std::span<const double> output_grad,
                            std::vector<double>* input_grad) const {
  const std::size_t layers = weights_.size();
  if (trace.pre.size() != layers || trace.post.size() != layers) {
    throw std::invalid_argument("backward: trace does not match network");
  }
  if (output_grad.size() != static_cast<std::size_t>(output_size())) {
    throw std::invalid_argument("backward: output_grad length mismatch");
  }

  Gradients grads = make_gradients();
  // delta = gradient w.r.t. the current layer's pre-activation
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  std::vector<double> prev;
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = weights_[l];
    const std::vector<double>& below = (l == 0) ? trace.input : trace.post[l - 1];
    Matrix& dw = grads.weights[l];
    std::vector<double>& db = grads.biases[l];
    for (std::size_t i = 0; i < w.rows; ++i) {
      const double d = delta[i];
      db[i] = d;
      double* dwr = dw.row(i);
      for (std::size_t j = 0; j < w.cols; ++j) dwr[j] = d * below[j];
    }
    const bool need_below_grad = (l > 0) || (input_grad != nullptr);
    if (!need_below_grad) break;
    prev.assign(w.cols, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
      const double d = delta[i];
      const double* wr = w.row(i);
      for (std::size_t j = 0; j < w.cols; ++j) prev[j] += wr[j] * d;
    }
    if (l > 0) {
      const std::vector<double>& pre = trace.pre[l - 1];
      for (std::size_t j = 0; j < prev.size(); ++j) {
        prev[j] *= (pre[j] >= 0.0) ? 1.0 : negative_slope_;
      }
      delta = prev;
    } else if (input_grad != nullptr) {
      *input_grad = prev;
    }
  }
  return grads;
}

void Network::forward_batch(const Matrix& inputs, BatchTrace& trace) const {
  if (inputs.cols != static_cast<std::size_t>(input_size()) || inputs.rows == 0) {
    throw std::invalid_argument("forward_batch: input shape mismatch");
  }
  const std::size_t layers = weights_.size();
  const std::size_t batch = inputs.rows;
  trace.input = inputs;
  trace.pre.resize(layers);
  trace.post.resize(layers);

  const Matrix* x = &trace.input;
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = weights_[l];
    const std::vector<double>& b = biases_[l];
    Matrix& pre = trace.pre[l];
    pre.resize(batch, w.rows);
    // pre = x * w^T
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(batch),
                static_cast<int>(w.rows), static_cast<int>(w.cols), 1.0, x->data.data(),
                static_cast<int>(x->cols), w.data.data(), static_cast<int>(w.cols), 0.0,
                pre.data.data(), static_cast<int>(pre.cols));
    for (std::size_t r = 0; r < batch; ++r) {
      double* row = pre.row(r);
      for (std::size_t i = 0; i < w.rows; ++i) row[i] += b[i];
    }
    Matrix& post = trace.post[l];
    if (l + 1 == layers) {
      post = pre;
    } else {
      post.resize(batch, w.rows);
      for (std::size_t i = 0; i < pre.size(); ++i) {
        post.data[i] = leaky_relu(pre.data[i], negative_slope_);
      }
    }
    x = &post;
  }
}

void Network::backward_batch(const BatchTrace& trace, const Matrix& output_grads,
                             Gradients& grads, Matrix* input_grads) const {
  const std::size_t layers = weights_.size();
  if (trace.pre.size() != layers) throw std::invalid_argument("backward_batch: bad trace");
  const std::size_t batch = trace.input.rows;
  if (output_grads.rows != batch ||
      output_grads.cols != static_cast<std::size_t>(output_size())) {
    throw std::invalid_argument("backward_batch: output_grads shape mismatch");
  }
  if (grads.weights.size() != layers) grads = make_gradients();

  Matrix delta = output_grads;
  Matrix prev;
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = weights_[l];
    const Matrix& below = (l == 0) ? trace.input : trace.post[l - 1];
    Matrix& dw = grads.weights[l];
    // dw = delta^T * below  (sum over the batch)
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, static_cast<int>(w.rows),
                static_cast<int>(w.cols), static_cast<int>(batch), 1.0, delta.data.data(),
                static_cast<int>(delta.cols), below.data.data(), static_cast<int>(below.cols),
                0.0, dw.data.data(), static_cast<int>(dw.cols));
    std::vector<double>& db = grads.biases[l];
    db.assign(w.rows, 0.0);
    for (std::size_t r = 0; r < batch; ++r) {
      const double* row = delta.row(r);
      for (std::size_t i = 0; i < w.rows; ++i) db[i] += row[i];
    }
    const bool need_below_grad = (l > 0) || (input_grads != nullptr);
    if (!need_below_grad) break;
    prev.resize(batch, w.cols);
    // prev = delta * w
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(batch),
                static_cast<int>(w.cols), static_cast<int>(w.rows), 1.0, delta.data.data(),
                static_cast<int>(delta.cols), w.data.data(), static_cast<int>(w.cols), 0.0,
                prev.data.data(), static_cast<int>(prev.cols));
    if (l > 0) {
      const Matrix& pre = trace.pre[l - 1];
      for (std::size_t i = 0; i < prev.size(); ++i) {
        prev.data[i] *= (pre.data[i] >= 0.0) ? 1.0 : negative_slope_;
      }
      std::swap(delta, prev);
    } else if (input_grads != nullptr) {
      *input_grads = prev;
    }
  }
}

void Network::input_gradients_batch(const BatchTrace& trace, const Matrix& output_grads,
                                    Matrix& input_grads) const {
  const std::size_t layers = weights_.size();
  if (trace.pre.size() != layers) throw std::invalid_argument("input_gradients_batch: bad trace");
  const std::size_t batch = trace.input.rows;
  if (output_grads.rows != batch ||
      output_grads.cols != static_cast<std::size_t>(output_size())) {
    throw std::invalid_argument("input_gradients_batch: output_grads shape mismatch");
  }

  Matrix delta = output_grads;
  Matrix prev;
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = weights_[l];
    prev.resize(batch, w.cols);
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(batch),
                static_cast<int>(w.cols), static_cast<int>(w.rows), 1.0, delta.data.data(),
                static_cast<int>(delta.cols), w.data.data(), static_cast<int>(w.cols), 0.0,
                prev.data.data(), static_cast<int>(prev.cols));
    if (l > 0) {
      const Matrix& pre = trace.pre[l - 1];
      for (std::size_t i = 0; i < prev.size(); ++i) {
        prev.data[i] *= (pre.data[i] >= 0.0) ? 1.0 : negative_slope_;
      }
      std::swap(delta, prev);
    } else {
      input_grads = prev;
    }
  }
}

void Network::adam_step(const Gradients& grads, double learning_rate) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("adam_step: learning rate must be positive");
  }
  if (grads.weights.size() != weights_.size() || grads.biases.size() != biases_.size()) {
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (grads.weights[l].rows != weights_[l].rows || grads.weights[l].cols != weights_[l].cols ||
        grads.biases[l].size() != biases_[l].size()) {
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    }
    if (!all_finite(grads.weights[l].data.data(), grads.weights[l].size()) ||
        !all_finite(grads.biases[l].data(), grads.biases[l].size())) {
      throw std::invalid_argument("adam_step: non-finite gradient");
    }
  }

  ++adam_step_count_;
  const double t = static_cast<double>(adam_step_count_);
  const double m_corr = 1.0 / (1.0 - std::pow(kBeta1, t));
  const double v_corr = 1.0 / (1.0 - std::pow(kBeta2, t));

  auto update = [&](double* p, double* m, double* v, const double* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      const double mhat = m[i] * m_corr;
      const double vhat = v[i] * v_corr;
      p[i] -= learning_rate * mhat / (std::sqrt(vhat) + kAdamEps);
    }
  };
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    update(weights_[l].data.data(), adam_m_.weights[l].data.data(),
           adam_v_.weights[l].data.data(), grads.weights[l].data.data(), weights_[l].size());
    update(biases_[l].data(), adam_m_.biases[l].data(), adam_v_.biases[l].data(),
           grads.biases[l].data(), biases_[l].size());
  }
  check_finite("adam_step");
}

void Network::check_finite(const char* where) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (!all_finite(weights_[l].data.data(), weights_[l].size()) ||
        !all_finite(biases_[l].data(), biases_[l].size())) {
      throw std::runtime_error(std::string(where) + ": network parameters became non-finite");
    }
  }
}

bool Network::same_shape(const Network& other) const {
  return layer_sizes_ == other.layer_sizes_;
}

bool Network::bitwise_equal(const Network& other) const {
  return layer_sizes_ == other.layer_sizes_ && weights_ == other.weights_ &&
         biases_ == other.biases_ && adam_m_ == other.adam_m_ && adam_v_ == other.adam_v_ &&
         adam_step_count_ == other.adam_step_count_;
}

void Network::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out << kMagic << "\n";
  out << layer_sizes_.size();
  for (int s : layer_sizes_) out << ' ' << s;
  out << "\n" << adam_step_count_ << "\n";
  // Binary layout, all little-endian doubles: parameters in layer order
  // (weights row-major, then biases), then first moments, then second
  // moments in the same order.
  auto write_block = [&](const std::vector<Matrix>& ws, const std::vector<std::vector<double>>& bs) {
    for (std::size_t l = 0; l < ws.size(); ++l) {
      write_le_doubles(out, ws[l].data.data(), ws[l].size());
      write_le_doubles(out, bs[l].data(), bs[l].size());
    }
  };
  write_block(weights_, biases_);
  write_block(adam_m_.weights, adam_m_.biases);
  write_block(adam_v_.weights, adam_v_.biases);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Network Network::load(const std::filesystem::path& path, double negative_slope) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic) throw std::runtime_error("bad checkpoint magic in " + path.string());
  std::string line;
  std::getline(in, line);
  std::istringstream sizes(line);
  std::size_t count = 0;
  if (!(sizes >> count) || count < 2) throw std::runtime_error("bad checkpoint header");
  std::vector<int> layer_sizes(count);
  for (auto& s : layer_sizes) {
    if (!(sizes >> s) || s <= 0) throw std::runtime_error("bad checkpoint layer sizes");
  }
  std::getline(in, line);
  std::int64_t step_count = -1;
  try {
    step_count = std::stoll(line);
  } catch (const std::exception&) {
    throw std::runtime_error("bad checkpoint step count");
  }
  if (step_count < 0) throw std::runtime_error("bad checkpoint step count");

  Network net;
  net.layer_sizes_ = layer_sizes;
  net.negative_slope_ = negative_slope;
  net.adam_step_count_ = step_count;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    net.weights_.emplace_back(static_cast<std::size_t>(layer_sizes[l + 1]),
                              static_cast<std::size_t>(layer_sizes[l]));
    net.biases_.emplace_back(static_cast<std::size_t>(layer_sizes[l + 1]), 0.0);
  }
  net.adam_m_ = net.make_gradients();
  net.adam_v_ = net.make_gradients();

  auto read_block = [&](std::vector<Matrix>& ws, std::vector<std::vector<double>>& bs) {
    for (std::size_t l = 0; l < ws.size(); ++l) {
      read_le_doubles(in, ws[l].data.data(), ws[l].size());
      read_le_doubles(in, bs[l].data(), bs[l].size());
    }
  };
  read_block(net.weights_, net.biases_);
  read_block(net.adam_m_.weights, net.adam_m_.biases);
  read_block(net.adam_v_.weights, net.adam_v_.biases);
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0) {
    throw std::runtime_error("checkpoint has trailing bytes: " + path.string());
  }
  net.check_finite("load");
  return net;
}

}  // namespace pax::nn
