#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "paxrl/trainer.hpp"

namespace {

void print_eval_report(const pax::harness::EvalReport& report) {
  int out_of_bounds = 0;
  int timeouts = 0;
  for (const auto& o : report.outcomes) {
    if (o.terminal == pax::hfo::TerminalKind::OutOfBounds) ++out_of_bounds;
    if (o.terminal == pax::hfo::TerminalKind::Timeout) ++timeouts;
  }
  std::printf("episodes:          %d\n", report.episodes);
  std::printf("goals:             %d\n", report.goals);
  std::printf("scoring_percent:   %.3f\n", report.scoring_percent);
  if (report.avg_steps_to_goal) {
    std::printf("avg_steps_to_goal: %.1f\n", *report.avg_steps_to_goal);
  } else {
    std::printf("avg_steps_to_goal: n/a\n");
  }
  std::printf("out_of_bounds:     %d\n", out_of_bounds);
  std::printf("timeouts:          %d\n", timeouts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameterized-action DDPG on a simplified half-field-offense task"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string checkpoint;
  std::string trace_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int episodes = 100;
  int seeds_per_strategy = 3;
  int jobs = 2;

  auto* train = app.add_subcommand("train", "Train an agent and log learning curves");
  train->add_option("--config", config_path, "Training config file")->required();
  auto* train_seed = train->add_option("--seed", seed, "Override run.seed");
  train->add_option("--out", out_dir, "Override run.out_dir");
  train->add_option("--trace", trace_path, "Write a per-step trace CSV to this path");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpointed actor");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--config", config_path, "Config override (default: checkpoint config)");
  auto* eval_seed = eval->add_option("--seed", seed, "Evaluation seed (default: run.seed)");

  auto* compare = app.add_subcommand("compare", "Train and compare the three bounding strategies");
  compare->add_option("--config", config_path, "Training config file")->required();
  compare->add_option("--seeds", seeds_per_strategy, "Seeds per strategy")
      ->check(CLI::PositiveNumber);
  compare->add_option("--jobs", jobs, "Parallel training cells")->check(CLI::PositiveNumber);
  compare->add_option("--out", out_dir, "Override run.out_dir");

  CLI11_PARSE(app, argc, argv);
  seed_set = train_seed->count() > 0 || eval_seed->count() > 0;

  try {
    if (train->parsed()) {
      pax::harness::TrainingConfig cfg = pax::harness::load_config(config_path);
      if (seed_set) cfg.seed = seed;
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      const auto result = pax::harness::run_training(cfg, trace_path);
      if (result.aborted) {
        std::fprintf(stderr, "training aborted: %s\nlatest good checkpoint retained in %s\n",
                     result.abort_reason.c_str(), result.out_dir.string().c_str());
        return 2;
      }
      std::printf("trained %lld episodes (%lld env steps, %lld updates) -> %s\n",
                  static_cast<long long>(result.episodes_run),
                  static_cast<long long>(result.total_env_steps),
                  static_cast<long long>(result.total_updates),
                  result.out_dir.string().c_str());
      if (result.final_eval) print_eval_report(*result.final_eval);
      return 0;
    }
    if (eval->parsed()) {
      pax::harness::TrainingConfig cfg = config_path.empty()
                                             ? pax::harness::load_checkpoint_config(checkpoint)
                                             : pax::harness::load_config(config_path);
      const auto agent = pax::harness::load_agent_checkpoint(checkpoint, cfg);
      const std::uint64_t eval_seed_value = seed_set ? seed : cfg.seed;
      const auto report =
          pax::harness::evaluate_policy(agent, cfg, episodes, eval_seed_value);
      print_eval_report(report);
      return 0;
    }
    if (compare->parsed()) {
      pax::harness::TrainingConfig cfg = pax::harness::load_config(config_path);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      const auto summary = pax::harness::compare_bounding(cfg, seeds_per_strategy, jobs);
      std::printf("compare summary -> %s\n", summary.csv_path.string().c_str());
      for (const auto& cell : summary.cells) {
        const auto& r = cell.result;
        std::printf("%-7s seed %llu: %s scoring=%.3f overflow=%lld/%lld saturation=%.3f\n",
                    pax::to_string(cell.strategy).c_str(),
                    static_cast<unsigned long long>(cell.seed),
                    r.aborted ? "ABORTED" : "ok",
                    r.final_eval ? r.final_eval->scoring_percent : 0.0,
                    static_cast<long long>(r.overflow_steps),
                    static_cast<long long>(r.greedy_steps), r.trailing_saturation_fraction);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
