#ifndef PAXRL_DDPG_HPP
#define PAXRL_DDPG_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "paxrl/bounding.hpp"
#include "paxrl/nn.hpp"
#include "paxrl/pamdp.hpp"
#include "paxrl/replay.hpp"

namespace pax::ddpg {

struct AgentConfig {
  std::vector<int> hidden_layers{256, 128, 64};
  double init_stddev = 0.01;
  double negative_slope = 0.01;
  double gamma = 0.99;
  double tau = 1e-4;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  std::size_t batch_size = 32;
  BoundingStrategy bounding = BoundingStrategy::Inverting;
  EpsilonSchedule epsilon;
};

struct UpdateMetrics {
  bool updated = false;
  double critic_loss = 0.0;
  double mean_q = 0.0;
  double mean_abs_bounded_grad = 0.0;
};

struct ActResult {
  ParameterizedAction action;
  std::vector<double> action_vector;  // critic-input encoding
  bool explored = false;
  // Actor parameter-head activations before any bounding transform; empty
  // for explored (random) actions.
  std::vector<double> raw_params;
};

// target <- tau * source + (1 - tau) * target, elementwise and exact.
void soft_update(nn::Network& target, const nn::Network& source, double tau);

// Actor-critic pair with slowly tracking target copies. The actor maps
// features to one discrete head plus one parameter head; the critic maps
// [features .. action vector] to a scalar Q value. The actor is trained on
// the critic's action-input gradients with the configured bounding strategy
// applied to the parameter slots.
class Agent {
 public:
  Agent(ActionSchema schema, int feature_dim, AgentConfig cfg, std::uint64_t seed);

  // Greedy factored selection from the actor, or (when explore is set, with
  // probability epsilon) a uniformly random action. Squashing transforms the
  // action outputs before both selection and assembly.
  ActResult act(std::span<const double> features, bool explore, std::mt19937_64& rng) const;

  // r, or r + gamma * Q'(s', mu'(s')) for non-terminal transitions. Uses
  // target networks only.
  double critic_target(const Transition& t) const;

  // One ADAM descent step on the mean squared TD error; returns the loss.
  double critic_update(std::span<const Transition> batch);

  // One ADAM step on the actor along the critic's bounded action gradients.
  // Critic parameters are read, never written.
  void actor_update(std::span<const Transition> batch);

  // sample -> critic_update -> actor_update -> soft updates. No-op when the
  // memory holds fewer than batch_size transitions.
  UpdateMetrics train_step(ReplayMemory& memory, std::mt19937_64& rng);

  const ActionSchema& schema() const { return schema_; }
  const AgentConfig& config() const { return cfg_; }
  int feature_dim() const { return feature_dim_; }
  std::int64_t update_count() const { return update_count_; }
  void set_update_count(std::int64_t c) { update_count_ = c; }

  const nn::Network& actor() const { return actor_; }
  const nn::Network& critic() const { return critic_; }
  const nn::Network& target_actor() const { return target_actor_; }
  const nn::Network& target_critic() const { return target_critic_; }
  nn::Network& mutable_actor() { return actor_; }
  nn::Network& mutable_critic() { return critic_; }

  void save_networks(const std::filesystem::path& dir) const;
  void load_networks(const std::filesystem::path& dir);

 private:
  // Under squashing, transforms a raw [discrete .. parameter] output block
  // in place (other strategies feed raw activations to selection and to the
  // critic).
  void transform_action_outputs(std::span<double> outputs) const;
  double actor_update_impl(std::span<const Transition> batch);

  ActionSchema schema_;
  int feature_dim_;
  AgentConfig cfg_;
  nn::Network actor_;
  nn::Network critic_;
  nn::Network target_actor_;
  nn::Network target_critic_;
  std::int64_t update_count_ = 0;
  double last_mean_q_ = 0.0;

  // training-path scratch, reused across steps
  struct Scratch {
    Matrix states;
    Matrix next_inputs;
    Matrix inputs;
    Matrix q_grads;
    Matrix ones;
    Matrix critic_input_grads;
    Matrix actor_out_grads;
    nn::BatchTrace net_trace;
    nn::BatchTrace critic_trace;
    nn::BatchTrace actor_trace;
    nn::Gradients critic_grads;
    nn::Gradients actor_grads;
    std::vector<double> targets;
  };
  Scratch scratch_;
};

}  // namespace pax::ddpg

#endif
