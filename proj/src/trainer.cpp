#include "paxrl/trainer.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "paxrl/rng.hpp"

namespace pax::harness {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

constexpr char kEpisodesHeader[] = "episode,total_reward,steps,terminal,mean_q,critic_loss,epsilon";
constexpr char kEvalsHeader[] = "episode,eval_episodes,goals,scoring_percent,avg_steps_to_goal";
constexpr char kTraceHeader[] =
    "episode,step,agent_x,agent_y,agent_vx,agent_vy,orientation,ball_x,ball_y,ball_vx,ball_vy,"
    "action,raw_params,clamped_params,reward,terminal";

std::ofstream open_log(const std::filesystem::path& path, const char* header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open log for writing: " + path.string());
  out << header << "\n";
  return out;
}

std::string join_params(const std::vector<double>& params) {
  std::string s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) s += ';';
    s += fmt(params[i]);
  }
  return s;
}

bool any_param_out_of_bounds(const ParameterizedAction& act, const ActionSchema& schema) {
  const std::size_t off = schema.param_offset(act.discrete_index);
  for (std::size_t i = 0; i < act.parameters.size(); ++i) {
    const ParamSpec& spec = schema.param(off + i);
    if (act.parameters[i] < spec.min_value || act.parameters[i] > spec.max_value) return true;
  }
  return false;
}

}  // namespace

EvalReport evaluate_policy(const ddpg::Agent& agent, const TrainingConfig& cfg, int episodes,
                           std::uint64_t eval_seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
  EvalReport report;
  report.episodes = episodes;
  std::mt19937_64 env_rng(derive_seed(eval_seed, stream::kEnv));
  std::mt19937_64 act_rng(derive_seed(eval_seed, stream::kExplore));  // unused by greedy acting
  long long steps_to_goal_sum = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    hfo::EnvState state = hfo::reset(cfg.env, env_rng);
    EpisodeOutcome outcome;
    while (state.terminal == hfo::TerminalKind::None) {
      const auto feats = hfo::features(state, cfg.env);
      const auto act = agent.act(feats, false, act_rng);
      const auto step = hfo::step(state, cfg.env, act.action);
      outcome.total_reward += step.reward;
      state = step.next;
    }
    outcome.steps = state.step_count;
    outcome.terminal = state.terminal;
    if (state.terminal == hfo::TerminalKind::Goal) {
      ++report.goals;
      steps_to_goal_sum += state.step_count;
    }
    report.outcomes.push_back(outcome);
  }
  report.scoring_percent = static_cast<double>(report.goals) / static_cast<double>(episodes);
  if (report.goals > 0) {
    report.avg_steps_to_goal =
        static_cast<double>(steps_to_goal_sum) / static_cast<double>(report.goals);
  }
  return report;
}

void save_agent_checkpoint(const ddpg::Agent& agent, const TrainingConfig& cfg,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  agent.save_networks(dir);
  std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
  if (!manifest) throw std::runtime_error("cannot write manifest in " + dir.string());
  manifest << "update_count = " << agent.update_count() << "\n";
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  manifest << "config_hash = " << hex << "\n";
  std::ofstream config_out(dir / "config.txt", std::ios::trunc);
  config_out << dump_config(cfg);
}

TrainingConfig load_checkpoint_config(const std::filesystem::path& dir) {
  std::ifstream in(dir / "config.txt");
  if (!in) throw std::runtime_error("checkpoint has no config.txt: " + dir.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ddpg::Agent load_agent_checkpoint(const std::filesystem::path& dir, const TrainingConfig& cfg) {
  ddpg::Agent agent(cfg.schema, hfo::kFeatureCount, cfg.agent, cfg.seed);
  agent.load_networks(dir);
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw std::runtime_error("checkpoint has no manifest.txt: " + dir.string());
  std::string line;
  while (std::getline(manifest, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    if (line.rfind("update_count", 0) == 0) {
      agent.set_update_count(std::stoll(line.substr(eq + 1)));
    }
  }
  return agent;
}

TrainResult run_training(const TrainingConfig& cfg, const std::filesystem::path& trace_path) {
  validate_config(cfg);
  TrainResult result;
  const std::filesystem::path out(cfg.out_dir);
  std::filesystem::create_directories(out);
  result.out_dir = out;

  {
    std::ofstream config_out(out / "config.txt", std::ios::trunc);
    if (!config_out) throw std::runtime_error("cannot write to out dir: " + out.string());
    config_out << dump_config(cfg);
  }
  std::ofstream episodes_csv = open_log(out / "episodes.csv", kEpisodesHeader);
  std::ofstream evals_csv = open_log(out / "evals.csv", kEvalsHeader);
  std::ofstream trace;
  if (!trace_path.empty()) trace = open_log(trace_path, kTraceHeader);

  ddpg::Agent agent(cfg.schema, hfo::kFeatureCount, cfg.agent, cfg.seed);
  ReplayMemory memory(cfg.replay_capacity, hfo::kFeatureCount, cfg.schema.action_vector_size());
  std::mt19937_64 env_rng(derive_seed(cfg.seed, stream::kEnv));
  std::mt19937_64 explore_rng(derive_seed(cfg.seed, stream::kExplore));
  std::mt19937_64 replay_rng(derive_seed(cfg.seed, stream::kReplay));

  // per-episode saturation tallies for the trailing-window statistic
  std::vector<std::pair<std::int64_t, std::int64_t>> episode_saturation;
  episode_saturation.reserve(static_cast<std::size_t>(std::max<std::int64_t>(cfg.episodes, 1)));

  std::int64_t evals_done = 0;
  auto run_eval_point = [&](std::int64_t episode_index) {
    const std::uint64_t eval_seed =
        derive_seed(cfg.seed, stream::kEvalBase + static_cast<std::uint64_t>(evals_done));
    ++evals_done;
    const EvalReport report = evaluate_policy(agent, cfg, cfg.eval_episodes, eval_seed);
    evals_csv << episode_index << ',' << report.episodes << ',' << report.goals << ','
              << fmt(report.scoring_percent) << ','
              << (report.avg_steps_to_goal ? fmt(*report.avg_steps_to_goal) : std::string())
              << "\n";
    evals_csv.flush();
    save_agent_checkpoint(agent, cfg, out / "checkpoint_latest");
    result.final_eval = report;
  };

  const std::size_t warmup = cfg.effective_warmup();
  try {
    for (std::int64_t episode = 1; episode <= cfg.episodes; ++episode) {
      hfo::EnvState state = hfo::reset(cfg.env, env_rng);
      double total_reward = 0.0;
      double loss_sum = 0.0;
      double q_sum = 0.0;
      std::int64_t updates_this_episode = 0;
      std::int64_t sat_count = 0;
      std::int64_t sat_total = 0;

      while (state.terminal == hfo::TerminalKind::None) {
        const auto feats = hfo::features(state, cfg.env);
        const auto act = agent.act(feats, true, explore_rng);
        const auto step = hfo::step(state, cfg.env, act.action);

        if (!act.explored) {
          ++result.greedy_steps;
          if (any_param_out_of_bounds(act.action, cfg.schema)) ++result.overflow_steps;
          sat_total += static_cast<std::int64_t>(act.raw_params.size());
          for (double r : act.raw_params) {
            if (std::fabs(std::tanh(r)) > 0.99) ++sat_count;
          }
        }
        if (step.clamped) ++result.clamp_events;

        memory.push(Transition{feats, act.action_vector, step.reward,
                               hfo::features(step.next, cfg.env), step.terminal});
        ++result.total_env_steps;
        total_reward += step.reward;

        if (memory.size() >= warmup) {
          const auto metrics = agent.train_step(memory, replay_rng);
          if (metrics.updated) {
            ++updates_this_episode;
            loss_sum += metrics.critic_loss;
            q_sum += metrics.mean_q;
            result.final_mean_q = metrics.mean_q;
            result.final_critic_loss = metrics.critic_loss;
          }
        }

        if (trace.is_open()) {
          trace << episode << ',' << step.next.step_count << ',' << fmt(state.agent_pos.x) << ','
                << fmt(state.agent_pos.y) << ',' << fmt(state.agent_vel.x) << ','
                << fmt(state.agent_vel.y) << ',' << fmt(state.orientation_deg) << ','
                << fmt(state.ball_pos.x) << ',' << fmt(state.ball_pos.y) << ','
                << fmt(state.ball_vel.x) << ',' << fmt(state.ball_vel.y) << ','
                << cfg.schema.action(act.action.discrete_index).name << ','
                << join_params(act.action.parameters) << ',' << join_params(step.applied_params)
                << ',' << fmt(step.reward) << ',' << to_string(step.next.terminal) << "\n";
        }
        state = step.next;
      }

      result.total_updates = agent.update_count();
      ++result.episodes_run;
      episode_saturation.emplace_back(sat_count, sat_total);
      if (state.kick_awarded && result.first_kick_episode < 0) {
        result.first_kick_episode = episode;
      }
      if (state.terminal == hfo::TerminalKind::Goal && result.first_goal_episode < 0) {
        result.first_goal_episode = episode;
      }

      const double mean_q =
          updates_this_episode ? q_sum / static_cast<double>(updates_this_episode)
                               : std::numeric_limits<double>::quiet_NaN();
      const double mean_loss =
          updates_this_episode ? loss_sum / static_cast<double>(updates_this_episode)
                               : std::numeric_limits<double>::quiet_NaN();
      episodes_csv << episode << ',' << fmt(total_reward) << ',' << state.step_count << ','
                   << to_string(state.terminal) << ',' << fmt(mean_q) << ',' << fmt(mean_loss)
                   << ',' << fmt(epsilon_at(cfg.agent.epsilon, agent.update_count())) << "\n";
      episodes_csv.flush();

      if (episode % cfg.eval_interval == 0) run_eval_point(episode);
    }

    // end-of-run evaluation unless the loop just produced one
    if (cfg.episodes > 0 && (cfg.episodes % cfg.eval_interval != 0)) run_eval_point(cfg.episodes);
  } catch (const std::exception& e) {
    result.aborted = true;
    result.abort_reason = e.what();
  }

  // trailing saturation fraction over the last tenth of episodes
  if (!episode_saturation.empty()) {
    const std::size_t window = std::max<std::size_t>(1, episode_saturation.size() / 10);
    std::int64_t sat = 0;
    std::int64_t total = 0;
    for (std::size_t i = episode_saturation.size() - window; i < episode_saturation.size(); ++i) {
      sat += episode_saturation[i].first;
      total += episode_saturation[i].second;
    }
    result.trailing_saturation_fraction =
        total > 0 ? static_cast<double>(sat) / static_cast<double>(total) : 0.0;
  }

  if (!result.aborted) save_agent_checkpoint(agent, cfg, out / "checkpoint_final");

  std::ofstream summary(out / "summary.txt", std::ios::trunc);
  summary << "aborted = " << (result.aborted ? "1" : "0") << "\n";
  if (result.aborted) summary << "abort_reason = " << result.abort_reason << "\n";
  summary << "episodes_run = " << result.episodes_run << "\n"
          << "total_env_steps = " << result.total_env_steps << "\n"
          << "total_updates = " << result.total_updates << "\n"
          << "first_kick_episode = " << result.first_kick_episode << "\n"
          << "first_goal_episode = " << result.first_goal_episode << "\n"
          << "greedy_steps = " << result.greedy_steps << "\n"
          << "overflow_steps = " << result.overflow_steps << "\n"
          << "clamp_events = " << result.clamp_events << "\n"
          << "trailing_saturation_fraction = " << fmt(result.trailing_saturation_fraction) << "\n"
          << "final_mean_q = " << fmt(result.final_mean_q) << "\n"
          << "final_critic_loss = " << fmt(result.final_critic_loss) << "\n";
  if (result.final_eval) {
    summary << "final_scoring_percent = " << fmt(result.final_eval->scoring_percent) << "\n"
            << "final_avg_steps_to_goal = "
            << (result.final_eval->avg_steps_to_goal ? fmt(*result.final_eval->avg_steps_to_goal)
                                                     : std::string("n/a"))
            << "\n";
  }

  return result;
}

CompareSummary compare_bounding(const TrainingConfig& base, int seeds_per_strategy, int jobs) {
  if (seeds_per_strategy < 1) {
    throw std::invalid_argument("compare_bounding: need at least one seed per strategy");
  }
  const std::vector<BoundingStrategy> strategies = {
      BoundingStrategy::Inverting, BoundingStrategy::Zeroing, BoundingStrategy::Squashing};

  CompareSummary summary;
  const std::filesystem::path compare_dir = std::filesystem::path(base.out_dir) / "compare";
  for (const auto strategy : strategies) {
    for (int s = 0; s < seeds_per_strategy; ++s) {
      CompareCell cell;
      cell.strategy = strategy;
      cell.seed = base.seed + static_cast<std::uint64_t>(s);
      summary.cells.push_back(cell);
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= summary.cells.size()) return;
      CompareCell& cell = summary.cells[i];
      TrainingConfig cfg = base;
      cfg.agent.bounding = cell.strategy;
      cfg.seed = cell.seed;
      cfg.out_dir = (compare_dir / to_string(cell.strategy) /
                     ("seed" + std::to_string(cell.seed)))
                        .string();
      try {
        cell.result = run_training(cfg);
      } catch (const std::exception& e) {
        // a diverged cell is data for the comparison, not a crash
        cell.result.aborted = true;
        cell.result.abort_reason = e.what();
      }
    }
  };

  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(summary.cells.size())));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::filesystem::create_directories(compare_dir);
  summary.csv_path = compare_dir / "compare_summary.csv";
  std::ofstream csv = open_log(summary.csv_path,
                               "strategy,seed,aborted,episodes,scoring_percent,avg_steps_to_goal,"
                               "first_kick_episode,first_goal_episode,overflow_steps,greedy_steps,"
                               "overflow_fraction,saturation_fraction,clamp_events,final_mean_q,"
                               "final_critic_loss");
  for (const auto& cell : summary.cells) {
    const TrainResult& r = cell.result;
    const double overflow_fraction =
        r.greedy_steps > 0
            ? static_cast<double>(r.overflow_steps) / static_cast<double>(r.greedy_steps)
            : 0.0;
    csv << to_string(cell.strategy) << ',' << cell.seed << ',' << (r.aborted ? 1 : 0) << ','
        << r.episodes_run << ','
        << (r.final_eval ? fmt(r.final_eval->scoring_percent) : std::string()) << ','
        << (r.final_eval && r.final_eval->avg_steps_to_goal
                ? fmt(*r.final_eval->avg_steps_to_goal)
                : std::string())
        << ',' << r.first_kick_episode << ',' << r.first_goal_episode << ',' << r.overflow_steps
        << ',' << r.greedy_steps << ',' << fmt(overflow_fraction) << ','
        << fmt(r.trailing_saturation_fraction) << ',' << r.clamp_events << ','
        << fmt(r.final_mean_q) << ',' << fmt(r.final_critic_loss) << "\n";
  }
  return summary;
}

}  // namespace pax::harness
