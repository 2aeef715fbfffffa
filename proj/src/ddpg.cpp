#include "paxrl/ddpg.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "paxrl/rng.hpp"

namespace pax::ddpg {

namespace {

std::vector<int> layer_plan(int input, const std::vector<int>& hidden, int output) {
  if (input < 1) throw std::invalid_argument("feature_dim must be >= 1");
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(input);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

void validate_config(const AgentConfig& cfg) {
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) {
    throw std::invalid_argument("gamma must be in [0,1)");
  }
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) throw std::invalid_argument("tau must be in (0,1]");
  if (!(cfg.actor_lr > 0.0) || !(cfg.critic_lr > 0.0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (cfg.batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (!(cfg.epsilon.end >= 0.0 && cfg.epsilon.end <= cfg.epsilon.start &&
        cfg.epsilon.start <= 1.0)) {
    throw std::invalid_argument("epsilon schedule must satisfy 0 <= end <= start <= 1");
  }
  if (cfg.epsilon.anneal_updates < 1) throw std::invalid_argument("anneal_updates must be >= 1");
}

}  // namespace

// The discrete head is bounded like the parameters are, over [-1, 1]; an
// unbounded head diverges through the same critic feedback the parameter
// bounds exist to stop.
constexpr double kDiscreteMin = -1.0;
constexpr double kDiscreteMax = 1.0;

void soft_update(nn::Network& target, const nn::Network& source, double tau) {
  if (!target.same_shape(source)) throw std::invalid_argument("soft_update: shape mismatch");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must be in (0,1]");
  for (std::size_t l = 0; l < target.layer_count(); ++l) {
    const auto& sw = source.weight(l).data;
    auto& tw = target.weight(l).data;
    for (std::size_t i = 0; i < tw.size(); ++i) tw[i] = tau * sw[i] + (1.0 - tau) * tw[i];
    const auto& sb = source.bias(l);
    auto& tb = target.bias(l);
    for (std::size_t i = 0; i < tb.size(); ++i) tb[i] = tau * sb[i] + (1.0 - tau) * tb[i];
  }
}

Agent::Agent(ActionSchema schema, int feature_dim, AgentConfig cfg, std::uint64_t seed)
    : schema_(std::move(schema)),
      feature_dim_(feature_dim),
      cfg_(std::move(cfg)),
      actor_(layer_plan(feature_dim, cfg_.hidden_layers,
                        static_cast<int>(schema_.action_vector_size())),
             cfg_.init_stddev, cfg_.negative_slope, derive_seed(seed, stream::kActorInit)),
      critic_(layer_plan(feature_dim + static_cast<int>(schema_.action_vector_size()),
                         cfg_.hidden_layers, 1),
              cfg_.init_stddev, cfg_.negative_slope, derive_seed(seed, stream::kCriticInit)),
      target_actor_(actor_),
      target_critic_(critic_) {
  validate_config(cfg_);
}

void Agent::transform_action_outputs(std::span<double> outputs) const {
  if (cfg_.bounding != BoundingStrategy::Squashing) return;
  const std::size_t k = schema_.num_actions();
  // Discrete activations squash onto [-1, 1]; tanh is monotone, so argmax
  // selection is unchanged. Parameters rescale onto their own ranges.
  for (std::size_t j = 0; j < k; ++j) {
    outputs[j] = squash_transform(outputs[j], kDiscreteMin, kDiscreteMax);
  }
  for (std::size_t j = 0; j + k < outputs.size(); ++j) {
    const ParamSpec& spec = schema_.param(j);
    outputs[k + j] = squash_transform(outputs[k + j], spec.min_value, spec.max_value);
  }
}

ActResult Agent::act(std::span<const double> feats, bool explore, std::mt19937_64& rng) const {
  if (feats.size() != static_cast<std::size_t>(feature_dim_)) {
    throw std::invalid_argument("act: feature length mismatch");
  }
  if (explore) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < epsilon_at(cfg_.epsilon, update_count_)) {
      ActResult r;
      r.action = explore_action(schema_, rng);
      r.action_vector = exploration_action_vector(r.action, schema_);
      r.explored = true;
      return r;
    }
  }
  const auto trace = actor_.forward(feats);
  const std::size_t k = schema_.num_actions();
  const std::size_t p = schema_.num_params();
  ActResult r;
  r.raw_params.assign(trace.output().begin() + k, trace.output().begin() + k + p);
  std::vector<double> out = trace.output();
  transform_action_outputs(out);
  const std::span<const double> disc(out.data(), k);
  const std::span<const double> params(out.data() + k, p);
  r.action = select_action(disc, params, schema_);
  r.action_vector = assemble_action_vector(disc, params, schema_);
  return r;
}

double Agent::critic_target(const Transition& t) const {
  if (t.terminal) return t.reward;
  const auto trace = target_actor_.forward(t.next_state);
  std::vector<double> out = trace.output();
  transform_action_outputs(out);
  std::vector<double> input(t.next_state.begin(), t.next_state.end());
  input.insert(input.end(), out.begin(), out.end());
  const double q = target_critic_.forward(input).output()[0];
  return t.reward + cfg_.gamma * q;
}

double Agent::critic_update(std::span<const Transition> batch) {
  if (batch.empty()) throw std::invalid_argument("critic_update: empty batch");
  const std::size_t b = batch.size();
  const std::size_t k = schema_.num_actions();
  const std::size_t p = schema_.num_params();
  const std::size_t feat = static_cast<std::size_t>(feature_dim_);
  const std::size_t in_dim = feat + k + p;

  // Targets from the target networks, live networks untouched.
  Matrix& next_inputs = scratch_.next_inputs;
  next_inputs.resize(b, feat);
  for (std::size_t i = 0; i < b; ++i) {
    std::memcpy(next_inputs.row(i), batch[i].next_state.data(), feat * sizeof(double));
  }
  target_actor_.forward_batch(next_inputs, scratch_.net_trace);
  const Matrix& ta_out = scratch_.net_trace.output();

  Matrix& inputs = scratch_.inputs;
  inputs.resize(b, in_dim);
  for (std::size_t i = 0; i < b; ++i) {
    double* row = inputs.row(i);
    std::memcpy(row, batch[i].next_state.data(), feat * sizeof(double));
    std::memcpy(row + feat, ta_out.row(i), (k + p) * sizeof(double));
    transform_action_outputs(std::span<double>(row + feat, k + p));
  }
  target_critic_.forward_batch(inputs, scratch_.net_trace);
  const Matrix& q_next = scratch_.net_trace.output();

  std::vector<double>& targets = scratch_.targets;
  targets.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    targets[i] = batch[i].terminal ? batch[i].reward
                                   : batch[i].reward + cfg_.gamma * q_next(i, 0);
  }

  // Prediction and loss on the live critic.
  for (std::size_t i = 0; i < b; ++i) {
    double* row = inputs.row(i);
    std::memcpy(row, batch[i].state.data(), feat * sizeof(double));
    std::memcpy(row + feat, batch[i].action.data(), (k + p) * sizeof(double));
  }
  critic_.forward_batch(inputs, scratch_.critic_trace);
  const Matrix& q = scratch_.critic_trace.output();

  double loss = 0.0;
  double q_sum = 0.0;
  Matrix& q_grads = scratch_.q_grads;
  q_grads.resize(b, 1);
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double err = q(i, 0) - targets[i];
    loss += err * err;
    q_sum += q(i, 0);
    q_grads(i, 0) = 2.0 * err * inv_b;
  }
  loss *= inv_b;
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "critic_update: non-finite loss after " << update_count_ << " updates";
    throw std::runtime_error(msg.str());
  }
  critic_.backward_batch(scratch_.critic_trace, q_grads, scratch_.critic_grads);
  critic_.adam_step(scratch_.critic_grads, cfg_.critic_lr);

  last_mean_q_ = q_sum * inv_b;
  return loss;
}

void Agent::actor_update(std::span<const Transition> batch) { (void)actor_update_impl(batch); }

double Agent::actor_update_impl(std::span<const Transition> batch) {
  if (batch.empty()) throw std::invalid_argument("actor_update: empty batch");
  const std::size_t b = batch.size();
  const std::size_t k = schema_.num_actions();
  const std::size_t p = schema_.num_params();
  const std::size_t feat = static_cast<std::size_t>(feature_dim_);
  const std::size_t in_dim = feat + k + p;

  Matrix& states = scratch_.states;
  states.resize(b, feat);
  for (std::size_t i = 0; i < b; ++i) {
    std::memcpy(states.row(i), batch[i].state.data(), feat * sizeof(double));
  }
  actor_.forward_batch(states, scratch_.actor_trace);
  const Matrix& actor_out = scratch_.actor_trace.output();

  Matrix& inputs = scratch_.inputs;
  inputs.resize(b, in_dim);
  for (std::size_t i = 0; i < b; ++i) {
    double* row = inputs.row(i);
    std::memcpy(row, batch[i].state.data(), feat * sizeof(double));
    std::memcpy(row + feat, actor_out.row(i), (k + p) * sizeof(double));
    transform_action_outputs(std::span<double>(row + feat, k + p));
  }
  critic_.forward_batch(inputs, scratch_.critic_trace);

  // dQ/d(action inputs), one backward pass per sample, ascent direction.
  Matrix& ones = scratch_.ones;
  ones.resize(b, 1);
  ones.fill(1.0);
  critic_.input_gradients_batch(scratch_.critic_trace, ones, scratch_.critic_input_grads);

  Matrix& out_grads = scratch_.actor_out_grads;
  out_grads.resize(b, k + p);
  double abs_sum = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  auto bound = [&](double g, double activation, double lo, double hi) {
    switch (cfg_.bounding) {
      case BoundingStrategy::Zeroing:
        return zero_gradient(g, activation, lo, hi);
      case BoundingStrategy::Inverting:
        return invert_gradient(g, activation, lo, hi);
      case BoundingStrategy::Squashing:
        return squash_backward(activation, g, lo, hi);
    }
    return g;
  };
  for (std::size_t i = 0; i < b; ++i) {
    const double* gin = scratch_.critic_input_grads.row(i) + feat;
    const double* raw = actor_out.row(i);
    double* gout = out_grads.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      gout[j] = -bound(gin[j], raw[j], kDiscreteMin, kDiscreteMax) * inv_b;
    }
    for (std::size_t j = 0; j < p; ++j) {
      const ParamSpec& spec = schema_.param(j);
      const double g = bound(gin[k + j], raw[k + j], spec.min_value, spec.max_value);
      abs_sum += std::fabs(g);
      gout[k + j] = -g * inv_b;
    }
  }
  actor_.backward_batch(scratch_.actor_trace, out_grads, scratch_.actor_grads);
  actor_.adam_step(scratch_.actor_grads, cfg_.actor_lr);
  return abs_sum / static_cast<double>(b * p);
}

UpdateMetrics Agent::train_step(ReplayMemory& memory, std::mt19937_64& rng) {
  UpdateMetrics m;
  if (memory.size() < cfg_.batch_size) return m;
  const auto batch = memory.sample(cfg_.batch_size, rng);
  m.critic_loss = critic_update(batch);
  m.mean_q = last_mean_q_;
  m.mean_abs_bounded_grad = actor_update_impl(batch);
  soft_update(target_actor_, actor_, cfg_.tau);
  soft_update(target_critic_, critic_, cfg_.tau);
  ++update_count_;
  m.updated = true;
  return m;
}

void Agent::save_networks(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  actor_.save(dir / "actor.paxnn");
  critic_.save(dir / "critic.paxnn");
  target_actor_.save(dir / "target_actor.paxnn");
  target_critic_.save(dir / "target_critic.paxnn");
}

void Agent::load_networks(const std::filesystem::path& dir) {
  nn::Network actor = nn::Network::load(dir / "actor.paxnn", cfg_.negative_slope);
  nn::Network critic = nn::Network::load(dir / "critic.paxnn", cfg_.negative_slope);
  nn::Network ta = nn::Network::load(dir / "target_actor.paxnn", cfg_.negative_slope);
  nn::Network tc = nn::Network::load(dir / "target_critic.paxnn", cfg_.negative_slope);
  if (!actor.same_shape(actor_) || !critic.same_shape(critic_) || !ta.same_shape(target_actor_) ||
      !tc.same_shape(target_critic_)) {
    throw std::runtime_error("load_networks: checkpoint shapes do not match configuration");
  }
  actor_ = std::move(actor);
  critic_ = std::move(critic);
  target_actor_ = std::move(ta);
  target_critic_ = std::move(tc);
}

}  // namespace pax::ddpg
