#include "paxrl/pamdp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace pax {

ActionSchema::ActionSchema(std::vector<ActionSpec> actions) : actions_(std::move(actions)) {
  if (actions_.empty()) throw std::invalid_argument("schema needs at least one action");
  std::set<std::string> names;
  offsets_.reserve(actions_.size());
  for (const auto& a : actions_) {
    if (a.name.empty()) throw std::invalid_argument("schema action name empty");
    if (!names.insert(a.name).second) {
      throw std::invalid_argument("schema action name duplicated: " + a.name);
    }
    offsets_.push_back(flat_params_.size());
    for (const auto& p : a.params) {
      if (!(p.min_value < p.max_value) || !std::isfinite(p.min_value) ||
          !std::isfinite(p.max_value)) {
        throw std::invalid_argument("schema parameter bounds invalid for " + a.name);
      }
      flat_params_.push_back(p);
    }
  }
}

ActionSchema ActionSchema::hfo() {
  return ActionSchema({
      {"Dash", {{"power", 0.0, 100.0}, {"direction", -180.0, 180.0}}},
      {"Turn", {{"direction", -180.0, 180.0}}},
      {"Tackle", {{"direction", -180.0, 180.0}}},
      {"Kick", {{"power", 0.0, 100.0}, {"direction", -180.0, 180.0}}},
  });
}

bool ActionSchema::operator==(const ActionSchema& other) const {
  if (actions_.size() != other.actions_.size()) return false;
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    const auto& a = actions_[i];
    const auto& b = other.actions_[i];
    if (a.name != b.name || a.params.size() != b.params.size()) return false;
    for (std::size_t j = 0; j < a.params.size(); ++j) {
      if (a.params[j].name != b.params[j].name ||
          a.params[j].min_value != b.params[j].min_value ||
          a.params[j].max_value != b.params[j].max_value) {
        return false;
      }
    }
  }
  return true;
}

double epsilon_at(const EpsilonSchedule& sched, std::int64_t update_count) {
  if (update_count < 0) throw std::invalid_argument("epsilon_at: negative update count");
  if (update_count >= sched.anneal_updates) return sched.end;
  const double frac =
      static_cast<double>(update_count) / static_cast<double>(sched.anneal_updates);
  return sched.start + (sched.end - sched.start) * frac;
}

ParameterizedAction select_action(std::span<const double> discrete_out,
                                  std::span<const double> param_out, const ActionSchema& schema) {
  if (discrete_out.size() != schema.num_actions() || param_out.size() != schema.num_params()) {
    throw std::invalid_argument("select_action: head sizes do not match schema");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < discrete_out.size(); ++i) {
    if (discrete_out[i] > discrete_out[best]) best = i;
  }
  const std::size_t off = schema.param_offset(best);
  const std::size_t count = schema.param_count(best);
  return {best, std::vector<double>(param_out.begin() + off, param_out.begin() + off + count)};
}

ParameterizedAction explore_action(const ActionSchema& schema, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, schema.num_actions() - 1);
  ParameterizedAction act;
  act.discrete_index = pick(rng);
  const auto& spec = schema.action(act.discrete_index);
  act.parameters.reserve(spec.params.size());
  for (const auto& p : spec.params) {
    std::uniform_real_distribution<double> dist(p.min_value, p.max_value);
    act.parameters.push_back(dist(rng));
  }
  return act;
}

std::vector<double> assemble_action_vector(std::span<const double> discrete_out,
                                           std::span<const double> param_out,
                                           const ActionSchema& schema) {
  if (discrete_out.size() != schema.num_actions() || param_out.size() != schema.num_params()) {
    throw std::invalid_argument("assemble_action_vector: head sizes do not match schema");
  }
  std::vector<double> v;
  v.reserve(schema.action_vector_size());
  v.insert(v.end(), discrete_out.begin(), discrete_out.end());
  v.insert(v.end(), param_out.begin(), param_out.end());
  return v;
}

std::vector<double> exploration_action_vector(const ParameterizedAction& act,
                                              const ActionSchema& schema) {
  if (act.discrete_index >= schema.num_actions() ||
      act.parameters.size() != schema.param_count(act.discrete_index)) {
    throw std::invalid_argument("exploration_action_vector: action does not match schema");
  }
  std::vector<double> v(schema.action_vector_size(), 0.0);
  v[act.discrete_index] = 1.0;
  const std::size_t base = schema.num_actions() + schema.param_offset(act.discrete_index);
  for (std::size_t i = 0; i < act.parameters.size(); ++i) v[base + i] = act.parameters[i];
  return v;
}

}  // namespace pax
