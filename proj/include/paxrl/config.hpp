#ifndef PAXRL_CONFIG_HPP
#define PAXRL_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "paxrl/ddpg.hpp"
#include "paxrl/hfo_env.hpp"
#include "paxrl/pamdp.hpp"

namespace pax::harness {

// Every tunable of a training run. Serialized as flat `key = value` lines
// with dotted section keys; see dump_config for the canonical key set. Any
// key can be overridden through the environment as PAXRL_<KEY> with dots
// mapped to underscores and upper-cased (e.g. PAXRL_RUN_SEED).
struct TrainingConfig {
  ddpg::AgentConfig agent;
  std::size_t replay_capacity = 1'000'000;
  // gradient updates start once the memory holds max(batch_size, warmup)
  std::size_t warmup = 1000;
  ActionSchema schema = ActionSchema::hfo();
  hfo::EnvConfig env;
  std::int64_t episodes = 10'000;
  std::int64_t eval_interval = 500;
  int eval_episodes = 100;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  std::size_t effective_warmup() const { return std::max(warmup, agent.batch_size); }
};

// Parse/serialize. load_config applies environment overrides after reading
// the file and validates the result; parse_config works on a raw string and
// is override-free (used for round-trip checks and checkpointed configs).
TrainingConfig parse_config(const std::string& text);
TrainingConfig load_config(const std::filesystem::path& path);
std::string dump_config(const TrainingConfig& cfg);
void validate_config(const TrainingConfig& cfg);

// FNV-1a over the canonical dump; checkpoint manifests carry it.
std::uint64_t config_hash(const TrainingConfig& cfg);

}  // namespace pax::harness

#endif
