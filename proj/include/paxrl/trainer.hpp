#ifndef PAXRL_TRAINER_HPP
#define PAXRL_TRAINER_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "paxrl/config.hpp"
#include "paxrl/ddpg.hpp"
#include "paxrl/hfo_env.hpp"

namespace pax::harness {

struct EpisodeOutcome {
  hfo::TerminalKind terminal = hfo::TerminalKind::None;
  int steps = 0;
  double total_reward = 0.0;
};

struct EvalReport {
  int episodes = 0;
  int goals = 0;
  double scoring_percent = 0.0;
  // mean episode length over scored episodes; absent when nothing scored
  std::optional<double> avg_steps_to_goal;
  std::vector<EpisodeOutcome> outcomes;
};

struct TrainResult {
  bool aborted = false;
  std::string abort_reason;
  std::int64_t episodes_run = 0;
  std::int64_t total_env_steps = 0;
  std::int64_t total_updates = 0;
  // 1-based episode indices; -1 when the milestone never happened
  std::int64_t first_kick_episode = -1;
  std::int64_t first_goal_episode = -1;
  // greedy (non-explored) steps whose executed pre-clamp parameters left
  // their bounds, and the greedy step count they are measured against
  std::int64_t overflow_steps = 0;
  std::int64_t greedy_steps = 0;
  std::int64_t clamp_events = 0;
  // fraction of parameter-head activations with |tanh| > 0.99 over the last
  // tenth of training episodes
  double trailing_saturation_fraction = 0.0;
  double final_mean_q = 0.0;
  double final_critic_loss = 0.0;
  std::optional<EvalReport> final_eval;
  std::filesystem::path out_dir;
};

// Full training run: per-step act/store/update, per-episode CSV rows,
// periodic deterministic evaluation with checkpoints, milestone tracking.
// Writes episodes.csv, evals.csv, config.txt, summary.txt and checkpoints
// under cfg.out_dir. A non-empty trace_path enables the per-step trace log.
TrainResult run_training(const TrainingConfig& cfg,
                         const std::filesystem::path& trace_path = {});

// Runs `episodes` episodes with the deterministic greedy policy.
EvalReport evaluate_policy(const ddpg::Agent& agent, const TrainingConfig& cfg, int episodes,
                           std::uint64_t eval_seed);

// Agent checkpoint directory: four network files plus manifest.txt
// (update_count, config hash) and config.txt (full canonical dump).
void save_agent_checkpoint(const ddpg::Agent& agent, const TrainingConfig& cfg,
                           const std::filesystem::path& dir);
TrainingConfig load_checkpoint_config(const std::filesystem::path& dir);
ddpg::Agent load_agent_checkpoint(const std::filesystem::path& dir, const TrainingConfig& cfg);

struct CompareCell {
  BoundingStrategy strategy = BoundingStrategy::Inverting;
  std::uint64_t seed = 0;
  TrainResult result;
};

struct CompareSummary {
  std::vector<CompareCell> cells;
  std::filesystem::path csv_path;
};

// Trains seeds_per_strategy independent cells for each bounding strategy
// under identical budgets and writes compare_summary.csv. Cells run
// isolated, up to `jobs` in parallel; results are identical regardless of
// the parallelism.
CompareSummary compare_bounding(const TrainingConfig& base, int seeds_per_strategy, int jobs);

}  // namespace pax::harness

#endif
