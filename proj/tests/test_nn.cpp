#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "paxrl/nn.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using pax::Matrix;
using pax::nn::ForwardTrace;
using pax::nn::Gradients;
using pax::nn::Network;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Independent check of backward(): central finite differences of
// (output_grad . output) for every weight, bias, and input slot.
double max_fd_relative_error(Network& net, std::vector<double> input,
                             const std::vector<double>& output_grad, double h) {
  const auto trace = net.forward(input);
  std::vector<double> input_grad;
  const Gradients grads = net.backward(trace, output_grad, &input_grad);

  auto eval = [&]() { return dot(output_grad, net.forward(input).output()); };
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Matrix& w = net.weight(l);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double fd = oracles::central_difference(eval, w.data[i], h);
      worst = std::max(worst, oracles::relative_error(grads.weights[l].data[i], fd));
    }
    auto& b = net.bias(l);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double fd = oracles::central_difference(eval, b[i], h);
      worst = std::max(worst, oracles::relative_error(grads.biases[l][i], fd));
    }
  }
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double fd = oracles::central_difference(eval, input[i], h);
    worst = std::max(worst, oracles::relative_error(input_grad[i], fd));
  }
  return worst;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("leaky_relu basics") {
  CHECK(pax::nn::leaky_relu(2.0, 0.01) == 2.0);
  CHECK(pax::nn::leaky_relu(-1.0, 0.01) == -0.01);
  CHECK(pax::nn::leaky_relu(0.0, 0.01) == 0.0);
}

TEST_CASE("init shapes, zero biases, zero moments") {
  Network net({2, 3, 1}, 1e-2, 0.01, 7);
  REQUIRE(net.layer_count() == 2);
  CHECK(net.weight(0).rows == 3);
  CHECK(net.weight(0).cols == 2);
  CHECK(net.weight(1).rows == 1);
  CHECK(net.weight(1).cols == 3);
  CHECK(net.bias(0) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(net.bias(1) == std::vector<double>{0.0});
  CHECK(net.adam_step_count() == 0);
  for (const auto& m : net.adam_first_moments().weights) {
    for (double v : m.data) CHECK(v == 0.0);
  }
}

TEST_CASE("init rejects bad arguments") {
  CHECK_THROWS_AS(Network({}, 1e-2, 0.01, 1), std::invalid_argument);
  CHECK_THROWS_AS(Network({3}, 1e-2, 0.01, 1), std::invalid_argument);
  CHECK_THROWS_AS(Network({3, 0, 2}, 1e-2, 0.01, 1), std::invalid_argument);
  CHECK_THROWS_AS(Network({3, 2}, 0.0, 0.01, 1), std::invalid_argument);
  CHECK_THROWS_AS(Network({3, 2}, -1.0, 0.01, 1), std::invalid_argument);
}

TEST_CASE("init is deterministic given the seed") {
  Network a({4, 8, 3}, 1e-2, 0.01, 1234);
  Network b({4, 8, 3}, 1e-2, 0.01, 1234);
  Network c({4, 8, 3}, 1e-2, 0.01, 1235);
  CHECK(a.bitwise_equal(b));
  CHECK_FALSE(a.bitwise_equal(c));
}

TEST_CASE("forward: zero weights map to zero") {
  Network net({3, 3, 3}, 1e-2, 0.01, 9);
  for (std::size_t l = 0; l < net.layer_count(); ++l) net.weight(l).fill(0.0);
  const auto trace = net.forward(std::vector<double>{0.5, -1.0, 2.0});
  for (double v : trace.output()) CHECK(v == 0.0);
}

TEST_CASE("forward: single affine layer") {
  Network net({1, 1}, 1e-2, 0.01, 9);
  net.weight(0)(0, 0) = 2.0;
  net.bias(0)[0] = 1.0;
  const auto trace = net.forward(std::vector<double>{3.0});
  CHECK(trace.output()[0] == 7.0);
}

TEST_CASE("forward: hand-computed two-layer example") {
  // L0: identity weights, zero bias; L1: sum. Input (-1, 2):
  // pre0 = (-1, 2) -> post0 = (-0.01, 2) -> output 1.99.
  Network net({2, 2, 1}, 1e-2, 0.01, 9);
  net.weight(0).fill(0.0);
  net.weight(0)(0, 0) = 1.0;
  net.weight(0)(1, 1) = 1.0;
  net.weight(1)(0, 0) = 1.0;
  net.weight(1)(0, 1) = 1.0;
  net.bias(0) = {0.0, 0.0};
  net.bias(1) = {0.0};
  const auto trace = net.forward(std::vector<double>{-1.0, 2.0});
  CHECK(trace.pre[0][0] == -1.0);
  CHECK(trace.post[0][0] == -0.01);
  CHECK(trace.post[0][1] == 2.0);
  CHECK(trace.output()[0] == doctest::Approx(1.99).epsilon(1e-15));
}

TEST_CASE("forward rejects bad input") {
  Network net({2, 2}, 1e-2, 0.01, 9);
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, std::nan("")}), std::invalid_argument);
}

TEST_CASE("forward is pure") {
  std::mt19937_64 rng(11);
  Network net = test_util::random_network({5, 7, 4}, rng);
  const auto in = test_util::random_vector(5, rng);
  const auto t1 = net.forward(in);
  const auto t2 = net.forward(in);
  CHECK(t1.pre == t2.pre);
  CHECK(t1.post == t2.post);
  CHECK(t1.input == t2.input);
}

TEST_CASE("backward: linear chain rule") {
  Network net({1, 1}, 1e-2, 0.01, 3);
  net.weight(0)(0, 0) = 2.0;
  net.bias(0)[0] = 0.0;
  const auto trace = net.forward(std::vector<double>{5.0});
  std::vector<double> input_grad;
  const auto grads = net.backward(trace, std::vector<double>{1.0}, &input_grad);
  CHECK(input_grad == std::vector<double>{2.0});
  CHECK(grads.weights[0](0, 0) == 5.0);
  CHECK(grads.biases[0][0] == 1.0);
}

TEST_CASE("backward: zero output grad zeroes everything") {
  std::mt19937_64 rng(12);
  Network net = test_util::random_network({4, 6, 2}, rng);
  const auto in = test_util::random_vector(4, rng);
  const auto trace = net.forward(in);
  std::vector<double> input_grad;
  const auto grads = net.backward(trace, std::vector<double>{0.0, 0.0}, &input_grad);
  for (const auto& w : grads.weights) {
    for (double v : w.data) CHECK(v == 0.0);
  }
  for (const auto& b : grads.biases) {
    for (double v : b) CHECK(v == 0.0);
  }
  for (double v : input_grad) CHECK(v == 0.0);
}

TEST_CASE("backward matches finite differences on a 3-4-2 net") {
  std::mt19937_64 rng(13);
  Network net = test_util::random_network({3, 4, 2}, rng);
  auto in = test_util::random_vector(3, rng);
  while (test_util::near_activation_kink(net, in, 1e-3)) in = test_util::random_vector(3, rng);
  const double err = max_fd_relative_error(net, in, {0.7, -1.3}, 1e-5);
  CHECK(err < 1e-4);
}

TEST_CASE("property: gradients match finite differences across shapes") {
  const std::vector<std::vector<int>> shapes = {{2, 3}, {3, 4, 2}, {5, 8, 8, 1}, {6, 10, 4, 3}};
  std::mt19937_64 rng(99);
  for (const auto& shape : shapes) {
    int cases = 0;
    while (cases < 25) {
      Network net = test_util::random_network(shape, rng);
      auto in = test_util::random_vector(static_cast<std::size_t>(shape.front()), rng);
      if (test_util::near_activation_kink(net, in, 1e-3)) continue;
      auto og = test_util::random_vector(static_cast<std::size_t>(shape.back()), rng, -2.0, 2.0);
      const double err = max_fd_relative_error(net, in, og, 1e-5);
      CHECK(err < 1e-4);
      ++cases;
    }
  }
}

TEST_CASE("adam: zero gradient is a fixed point and still counts a step") {
  std::mt19937_64 rng(21);
  Network net = test_util::random_network({3, 5, 2}, rng);
  Network before = net;
  Gradients zero = net.make_gradients();
  net.adam_step(zero, 1e-3);
  CHECK(net.adam_step_count() == 1);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    CHECK(net.weight(l) == before.weight(l));
    CHECK(net.bias(l) == before.bias(l));
  }
}

TEST_CASE("adam matches the scalar reference") {
  Network net({1, 1}, 1e-2, 0.01, 5);
  net.weight(0)(0, 0) = 0.5;
  oracles::ScalarAdam ref(0.5);

  Gradients g = net.make_gradients();
  g.weights[0](0, 0) = 1.0;
  net.adam_step(g, 1e-3);
  double expected = ref.step(1.0, 1e-3);
  CHECK(expected == doctest::Approx(0.499).epsilon(1e-6));
  CHECK(std::fabs(net.weight(0)(0, 0) - expected) < 1e-9);

  g.weights[0](0, 0) = -0.3;
  net.adam_step(g, 1e-3);
  expected = ref.step(-0.3, 1e-3);
  CHECK(std::fabs(net.weight(0)(0, 0) - expected) < 1e-9);
}

TEST_CASE("adam rejects non-finite gradients") {
  Network net({2, 2}, 1e-2, 0.01, 5);
  Gradients g = net.make_gradients();
  g.weights[0](0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(net.adam_step(g, 1e-3), std::invalid_argument);
}

TEST_CASE("parameters stay finite under a burst of random updates") {
  std::mt19937_64 rng(31);
  Network net = test_util::random_network({4, 6, 3}, rng);
  std::normal_distribution<double> gd(0.0, 2.0);
  for (int step = 0; step < 200; ++step) {
    Gradients g = net.make_gradients();
    for (auto& w : g.weights) {
      for (double& v : w.data) v = gd(rng);
    }
    for (auto& b : g.biases) {
      for (double& v : b) v = gd(rng);
    }
    net.adam_step(g, 1e-2);  // throws internally if anything went non-finite
  }
  CHECK(net.adam_step_count() == 200);
}

TEST_CASE("checkpoint round trip is bit exact") {
  std::mt19937_64 rng(41);
  Network net = test_util::random_network({3, 8, 2}, rng);
  // Take a few ADAM steps so the moment state is nontrivial.
  std::normal_distribution<double> gd(0.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    Gradients g = net.make_gradients();
    for (auto& w : g.weights) {
      for (double& v : w.data) v = gd(rng);
    }
    net.adam_step(g, 1e-3);
  }
  const auto path = temp_file("paxrl_nn_roundtrip.paxnn");
  net.save(path);
  const Network loaded = Network::load(path, net.negative_slope());
  CHECK(net.bitwise_equal(loaded));
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint rejects corruption") {
  std::mt19937_64 rng(43);
  Network net = test_util::random_network({2, 3, 1}, rng);
  const auto path = temp_file("paxrl_nn_corrupt.paxnn");
  net.save(path);

  SUBCASE("bad magic") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("BADMAG", 6);
    f.close();
    CHECK_THROWS_AS(Network::load(path, 0.01), std::runtime_error);
  }
  SUBCASE("truncated") {
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 9);
    CHECK_THROWS_AS(Network::load(path, 0.01), std::runtime_error);
  }
  SUBCASE("trailing bytes") {
    std::ofstream f(path, std::ios::app | std::ios::binary);
    f.write("x", 1);
    f.close();
    CHECK_THROWS_AS(Network::load(path, 0.01), std::runtime_error);
  }
  std::filesystem::remove(path);
}

TEST_CASE("batched passes agree with the per-sample path") {
  std::mt19937_64 rng(51);
  Network net = test_util::random_network({5, 9, 6, 3}, rng);
  const std::size_t batch = 7;
  Matrix inputs(batch, 5);
  Matrix output_grads(batch, 3);
  for (double& v : inputs.data) v = test_util::random_vector(1, rng)[0];
  for (double& v : output_grads.data) v = test_util::random_vector(1, rng, -2.0, 2.0)[0];

  pax::nn::BatchTrace bt;
  net.forward_batch(inputs, bt);
  Gradients batch_grads = net.make_gradients();
  Matrix batch_input_grads;
  net.backward_batch(bt, output_grads, batch_grads, &batch_input_grads);
  Matrix only_input_grads;
  net.input_gradients_batch(bt, output_grads, only_input_grads);

  Gradients sum = net.make_gradients();
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<double> in(inputs.row(b), inputs.row(b) + 5);
    std::vector<double> og(output_grads.row(b), output_grads.row(b) + 3);
    const auto trace = net.forward(in);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      for (std::size_t i = 0; i < trace.post[l].size(); ++i) {
        CHECK(bt.post[l](b, i) == doctest::Approx(trace.post[l][i]).epsilon(1e-12));
      }
    }
    std::vector<double> input_grad;
    const auto g = net.backward(trace, og, &input_grad);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      for (std::size_t i = 0; i < g.weights[l].size(); ++i) {
        sum.weights[l].data[i] += g.weights[l].data[i];
      }
      for (std::size_t i = 0; i < g.biases[l].size(); ++i) sum.biases[l][i] += g.biases[l][i];
    }
    for (std::size_t i = 0; i < input_grad.size(); ++i) {
      CHECK(batch_input_grads(b, i) == doctest::Approx(input_grad[i]).epsilon(1e-10));
      CHECK(only_input_grads(b, i) == doctest::Approx(input_grad[i]).epsilon(1e-10));
    }
  }
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (std::size_t i = 0; i < sum.weights[l].size(); ++i) {
      CHECK(batch_grads.weights[l].data[i] ==
            doctest::Approx(sum.weights[l].data[i]).epsilon(1e-10));
    }
    for (std::size_t i = 0; i < sum.biases[l].size(); ++i) {
      CHECK(batch_grads.biases[l][i] == doctest::Approx(sum.biases[l][i]).epsilon(1e-10));
    }
  }
}
