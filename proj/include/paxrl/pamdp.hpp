#ifndef PAXRL_PAMDP_HPP
#define PAXRL_PAMDP_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pax {

struct ParamSpec {
  std::string name;
  double min_value = 0.0;
  double max_value = 0.0;
};

struct ActionSpec {
  std::string name;
  std::vector<ParamSpec> params;
};

// Parameterized action space: an ordered list of discrete actions, each with
// its own ordered continuous-parameter slots. Parameter slots also carry a
// fixed global index (the concatenation order across actions), which is the
// layout of the actor's parameter head and of assembled action vectors.
class ActionSchema {
 public:
  explicit ActionSchema(std::vector<ActionSpec> actions);

  // Dash(power, direction), Turn(direction), Tackle(direction),
  // Kick(power, direction): 4 discrete outputs, 6 parameter outputs.
  static ActionSchema hfo();

  std::size_t num_actions() const { return actions_.size(); }
  std::size_t num_params() const { return flat_params_.size(); }
  std::size_t action_vector_size() const { return num_actions() + num_params(); }

  const ActionSpec& action(std::size_t index) const { return actions_.at(index); }
  std::size_t param_offset(std::size_t action_index) const { return offsets_.at(action_index); }
  std::size_t param_count(std::size_t action_index) const {
    return actions_.at(action_index).params.size();
  }
  // Global parameter slot (concatenated across actions, in action order).
  const ParamSpec& param(std::size_t global_index) const { return flat_params_.at(global_index); }

  bool operator==(const ActionSchema& other) const;

 private:
  std::vector<ActionSpec> actions_;
  std::vector<std::size_t> offsets_;
  std::vector<ParamSpec> flat_params_;
};

// A chosen discrete action plus values for that action's own parameter
// slots only. Values are raw actor activations; clamping to bounds happens
// at environment execution.
struct ParameterizedAction {
  std::size_t discrete_index = 0;
  std::vector<double> parameters;
};

// Linear annealing of the exploration rate over the first anneal_updates
// gradient updates, constant afterwards.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.1;
  std::int64_t anneal_updates = 10000;
};

double epsilon_at(const EpsilonSchedule& sched, std::int64_t update_count);

// Greedy factored selection: argmax over the discrete head (ties -> lowest
// index), paired with the chosen action's slice of the parameter head,
// unclamped.
ParameterizedAction select_action(std::span<const double> discrete_out,
                                  std::span<const double> param_out, const ActionSchema& schema);

// Uniform random discrete action with parameters drawn uniformly inside
// their bounds.
ParameterizedAction explore_action(const ActionSchema& schema, std::mt19937_64& rng);

// Critic-input layout: [discrete_out .. param_out].
std::vector<double> assemble_action_vector(std::span<const double> discrete_out,
                                           std::span<const double> param_out,
                                           const ActionSchema& schema);

// Critic-input encoding of a randomly explored action: chosen discrete slot
// 1, other discrete slots 0, the chosen action's parameter slots carry the
// sampled values, all other parameter slots 0.
std::vector<double> exploration_action_vector(const ParameterizedAction& act,
                                              const ActionSchema& schema);

}  // namespace pax

#endif
