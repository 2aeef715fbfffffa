#include "paxrl/config.hpp"

#include <charconv>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pax::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double d = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  }
  return d;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::int64_t out = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t out = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw std::invalid_argument("config: bad unsigned integer for " + key + ": '" + v + "'");
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

std::vector<int> parse_hidden(const std::string& key, const std::string& v) {
  std::vector<int> out;
  if (trim(v).empty()) return out;
  for (const auto& p : split(v, ',')) {
    out.push_back(static_cast<int>(parse_int(key, p)));
  }
  return out;
}

std::string format_hidden(const std::vector<int>& hidden) {
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(hidden[i]);
  }
  return s;
}

std::vector<ParamSpec> parse_params(const std::string& key, const std::string& v) {
  std::vector<ParamSpec> out;
  if (trim(v).empty()) return out;
  for (const auto& p : split(v, ',')) {
    const auto fields = split(p, ':');
    if (fields.size() != 3) {
      throw std::invalid_argument("config: bad parameter spec for " + key + ": '" + p + "'");
    }
    out.push_back({fields[0], parse_double(key, fields[1]), parse_double(key, fields[2])});
  }
  return out;
}

std::string format_params(const std::vector<ParamSpec>& params) {
  std::string s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) s += ',';
    s += params[i].name + ':' + format_double(params[i].min_value) + ':' +
         format_double(params[i].max_value);
  }
  return s;
}

std::string env_override_name(const std::string& key) {
  std::string name = "PAXRL_";
  for (char c : key) {
    name += (c == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return name;
}

// Ordered (key, value) view of a config; the single source of truth for the
// canonical key set and dump order.
std::vector<std::pair<std::string, std::string>> to_pairs(const TrainingConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("net.hidden", format_hidden(c.agent.hidden_layers));
  kv.emplace_back("net.init_stddev", format_double(c.agent.init_stddev));
  kv.emplace_back("net.negative_slope", format_double(c.agent.negative_slope));
  kv.emplace_back("ddpg.gamma", format_double(c.agent.gamma));
  kv.emplace_back("ddpg.tau", format_double(c.agent.tau));
  kv.emplace_back("ddpg.actor_lr", format_double(c.agent.actor_lr));
  kv.emplace_back("ddpg.critic_lr", format_double(c.agent.critic_lr));
  kv.emplace_back("ddpg.batch_size", std::to_string(c.agent.batch_size));
  kv.emplace_back("ddpg.bounding", to_string(c.agent.bounding));
  kv.emplace_back("ddpg.warmup", std::to_string(c.warmup));
  kv.emplace_back("replay.capacity", std::to_string(c.replay_capacity));
  kv.emplace_back("explore.epsilon_start", format_double(c.agent.epsilon.start));
  kv.emplace_back("explore.epsilon_end", format_double(c.agent.epsilon.end));
  kv.emplace_back("explore.anneal_updates", std::to_string(c.agent.epsilon.anneal_updates));
  std::string actions;
  for (std::size_t i = 0; i < c.schema.num_actions(); ++i) {
    if (i) actions += ',';
    actions += c.schema.action(i).name;
  }
  kv.emplace_back("schema.actions", actions);
  for (std::size_t i = 0; i < c.schema.num_actions(); ++i) {
    kv.emplace_back("schema." + c.schema.action(i).name + ".params",
                    format_params(c.schema.action(i).params));
  }
  kv.emplace_back("env.field_length", format_double(c.env.field_length));
  kv.emplace_back("env.field_half_width", format_double(c.env.field_half_width));
  kv.emplace_back("env.goal_half_width", format_double(c.env.goal_half_width));
  kv.emplace_back("env.kickable_radius", format_double(c.env.kickable_radius));
  kv.emplace_back("env.agent_max_speed", format_double(c.env.agent_max_speed));
  kv.emplace_back("env.dash_accel_scale", format_double(c.env.dash_accel_scale));
  kv.emplace_back("env.agent_vel_decay", format_double(c.env.agent_vel_decay));
  kv.emplace_back("env.ball_vel_decay", format_double(c.env.ball_vel_decay));
  kv.emplace_back("env.kick_speed_scale", format_double(c.env.kick_speed_scale));
  kv.emplace_back("env.max_steps", std::to_string(c.env.max_steps));
  kv.emplace_back("env.spawn_x_min", format_double(c.env.spawn_x_min));
  kv.emplace_back("env.spawn_x_max", format_double(c.env.spawn_x_max));
  kv.emplace_back("env.spawn_y_half", format_double(c.env.spawn_y_half));
  kv.emplace_back("env.min_agent_ball_distance", format_double(c.env.min_agent_ball_distance));
  kv.emplace_back("run.episodes", std::to_string(c.episodes));
  kv.emplace_back("run.eval_interval", std::to_string(c.eval_interval));
  kv.emplace_back("run.eval_episodes", std::to_string(c.eval_episodes));
  kv.emplace_back("run.seed", std::to_string(c.seed));
  kv.emplace_back("run.out_dir", c.out_dir);
  return kv;
}

class KeyMap {
 public:
  explicit KeyMap(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  bool has(const std::string& key) {
    touch(key);
    return values_.count(key) > 0;
  }

  std::string get(const std::string& key, const std::string& fallback) {
    touch(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  void apply_env_override(const std::string& key) {
    if (const char* v = std::getenv(env_override_name(key).c_str())) values_[key] = v;
  }

  void reject_unknown() const {
    for (const auto& [k, _] : values_) {
      if (!consumed_.count(k)) throw std::invalid_argument("config: unknown key '" + k + "'");
    }
  }

 private:
  void touch(const std::string& key) { consumed_.insert(key); }
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

TrainingConfig from_map(std::map<std::string, std::string> raw, bool env_overrides) {
  TrainingConfig c;
  KeyMap kv(std::move(raw));

  // Fixed keys first; schema.* keys depend on the action list.
  const std::vector<std::string> fixed = {
      "net.hidden",         "net.init_stddev",    "net.negative_slope",
      "ddpg.gamma",         "ddpg.tau",           "ddpg.actor_lr",
      "ddpg.critic_lr",     "ddpg.batch_size",    "ddpg.bounding",
      "ddpg.warmup",        "replay.capacity",    "explore.epsilon_start",
      "explore.epsilon_end", "explore.anneal_updates", "schema.actions",
      "env.field_length",   "env.field_half_width", "env.goal_half_width",
      "env.kickable_radius", "env.agent_max_speed", "env.dash_accel_scale",
      "env.agent_vel_decay", "env.ball_vel_decay", "env.kick_speed_scale",
      "env.max_steps",      "env.spawn_x_min",    "env.spawn_x_max",
      "env.spawn_y_half",   "env.min_agent_ball_distance", "run.episodes",
      "run.eval_interval",  "run.eval_episodes",  "run.seed",
      "run.out_dir"};
  if (env_overrides) {
    for (const auto& k : fixed) kv.apply_env_override(k);
  }

  const TrainingConfig defaults;
  auto dbl = [&](const std::string& key, double fallback) {
    return kv.has(key) ? parse_double(key, kv.get(key, "")) : fallback;
  };
  auto i64 = [&](const std::string& key, std::int64_t fallback) {
    return kv.has(key) ? parse_int(key, kv.get(key, "")) : fallback;
  };
  auto u64 = [&](const std::string& key, std::uint64_t fallback) {
    return kv.has(key) ? parse_uint(key, kv.get(key, "")) : fallback;
  };

  c.agent.hidden_layers = kv.has("net.hidden")
                              ? parse_hidden("net.hidden", kv.get("net.hidden", ""))
                              : defaults.agent.hidden_layers;
  c.agent.init_stddev = dbl("net.init_stddev", defaults.agent.init_stddev);
  c.agent.negative_slope = dbl("net.negative_slope", defaults.agent.negative_slope);
  c.agent.gamma = dbl("ddpg.gamma", defaults.agent.gamma);
  c.agent.tau = dbl("ddpg.tau", defaults.agent.tau);
  c.agent.actor_lr = dbl("ddpg.actor_lr", defaults.agent.actor_lr);
  c.agent.critic_lr = dbl("ddpg.critic_lr", defaults.agent.critic_lr);
  c.agent.batch_size = static_cast<std::size_t>(u64("ddpg.batch_size", defaults.agent.batch_size));
  const std::string bounding = kv.get("ddpg.bounding", to_string(defaults.agent.bounding));
  if (const auto b = bounding_from_string(trim(bounding))) {
    c.agent.bounding = *b;
  } else {
    throw std::invalid_argument("config: ddpg.bounding must be zero|squash|invert, got '" +
                                bounding + "'");
  }
  c.warmup = static_cast<std::size_t>(u64("ddpg.warmup", defaults.warmup));
  c.replay_capacity = static_cast<std::size_t>(u64("replay.capacity", defaults.replay_capacity));
  c.agent.epsilon.start = dbl("explore.epsilon_start", defaults.agent.epsilon.start);
  c.agent.epsilon.end = dbl("explore.epsilon_end", defaults.agent.epsilon.end);
  c.agent.epsilon.anneal_updates =
      i64("explore.anneal_updates", defaults.agent.epsilon.anneal_updates);

  if (kv.has("schema.actions")) {
    const auto names = split(kv.get("schema.actions", ""), ',');
    std::vector<ActionSpec> actions;
    for (const auto& name : names) {
      const std::string key = "schema." + name + ".params";
      if (env_overrides) kv.apply_env_override(key);
      if (!kv.has(key)) throw std::invalid_argument("config: missing " + key);
      actions.push_back({name, parse_params(key, kv.get(key, ""))});
    }
    c.schema = ActionSchema(std::move(actions));
  } else {
    // consume any schema params present for the default action set
    for (std::size_t i = 0; i < c.schema.num_actions(); ++i) {
      const std::string key = "schema." + c.schema.action(i).name + ".params";
      if (env_overrides) kv.apply_env_override(key);
      if (kv.has(key)) {
        throw std::invalid_argument("config: " + key + " given without schema.actions");
      }
    }
  }

  c.env.field_length = dbl("env.field_length", defaults.env.field_length);
  c.env.field_half_width = dbl("env.field_half_width", defaults.env.field_half_width);
  c.env.goal_half_width = dbl("env.goal_half_width", defaults.env.goal_half_width);
  c.env.kickable_radius = dbl("env.kickable_radius", defaults.env.kickable_radius);
  c.env.agent_max_speed = dbl("env.agent_max_speed", defaults.env.agent_max_speed);
  c.env.dash_accel_scale = dbl("env.dash_accel_scale", defaults.env.dash_accel_scale);
  c.env.agent_vel_decay = dbl("env.agent_vel_decay", defaults.env.agent_vel_decay);
  c.env.ball_vel_decay = dbl("env.ball_vel_decay", defaults.env.ball_vel_decay);
  c.env.kick_speed_scale = dbl("env.kick_speed_scale", defaults.env.kick_speed_scale);
  c.env.max_steps = static_cast<int>(i64("env.max_steps", defaults.env.max_steps));
  c.env.spawn_x_min = dbl("env.spawn_x_min", defaults.env.spawn_x_min);
  c.env.spawn_x_max = dbl("env.spawn_x_max", defaults.env.spawn_x_max);
  c.env.spawn_y_half = dbl("env.spawn_y_half", defaults.env.spawn_y_half);
  c.env.min_agent_ball_distance =
      dbl("env.min_agent_ball_distance", defaults.env.min_agent_ball_distance);
  c.episodes = i64("run.episodes", defaults.episodes);
  c.eval_interval = i64("run.eval_interval", defaults.eval_interval);
  c.eval_episodes = static_cast<int>(i64("run.eval_episodes", defaults.eval_episodes));
  c.seed = u64("run.seed", defaults.seed);
  c.out_dir = kv.get("run.out_dir", defaults.out_dir);

  kv.reject_unknown();
  validate_config(c);
  return c;
}

std::map<std::string, std::string> parse_lines(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));
    if (!kv.emplace(key, value).second) {
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    }
  }
  return kv;
}

}  // namespace

TrainingConfig parse_config(const std::string& text) { return from_map(parse_lines(text), false); }

TrainingConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_map(parse_lines(buf.str()), true);
}

std::string dump_config(const TrainingConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_pairs(cfg)) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

void validate_config(const TrainingConfig& c) {
  std::vector<std::string> errors;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };

  for (int h : c.agent.hidden_layers) require(h > 0, "net.hidden entries must be positive");
  require(c.agent.init_stddev > 0.0, "net.init_stddev must be positive");
  require(c.agent.negative_slope >= 0.0 && c.agent.negative_slope < 1.0,
          "net.negative_slope must be in [0,1)");
  require(c.agent.gamma >= 0.0 && c.agent.gamma < 1.0, "ddpg.gamma must be in [0,1)");
  require(c.agent.tau > 0.0 && c.agent.tau <= 1.0, "ddpg.tau must be in (0,1]");
  require(c.agent.actor_lr > 0.0, "ddpg.actor_lr must be positive");
  require(c.agent.critic_lr > 0.0, "ddpg.critic_lr must be positive");
  require(c.agent.batch_size >= 1, "ddpg.batch_size must be >= 1");
  require(c.replay_capacity >= c.agent.batch_size,
          "replay.capacity must be >= ddpg.batch_size");
  require(c.agent.epsilon.end >= 0.0 && c.agent.epsilon.end <= c.agent.epsilon.start &&
              c.agent.epsilon.start <= 1.0,
          "epsilon schedule must satisfy 0 <= end <= start <= 1");
  require(c.agent.epsilon.anneal_updates >= 1, "explore.anneal_updates must be >= 1");
  require(c.schema == ActionSchema::hfo(),
          "schema must match the built-in HFO action set (Dash, Turn, Tackle, Kick with "
          "power 0:100 and direction -180:180 bounds)");
  require(c.env.field_length > 0.0, "env.field_length must be positive");
  require(c.env.field_half_width > 0.0, "env.field_half_width must be positive");
  require(c.env.goal_half_width > 0.0 && c.env.goal_half_width <= c.env.field_half_width,
          "env.goal_half_width must be in (0, field_half_width]");
  require(c.env.kickable_radius > 0.0 &&
              c.env.kickable_radius < 2.0 * c.env.goal_half_width,
          "env.kickable_radius must be positive and smaller than the goal width");
  require(c.env.agent_max_speed > 0.0, "env.agent_max_speed must be positive");
  require(c.env.dash_accel_scale > 0.0, "env.dash_accel_scale must be positive");
  require(c.env.agent_vel_decay >= 0.0 && c.env.agent_vel_decay < 1.0,
          "env.agent_vel_decay must be in [0,1)");
  require(c.env.ball_vel_decay >= 0.0 && c.env.ball_vel_decay < 1.0,
          "env.ball_vel_decay must be in [0,1)");
  require(c.env.kick_speed_scale > 0.0, "env.kick_speed_scale must be positive");
  require(c.env.max_steps >= 1, "env.max_steps must be >= 1");
  require(c.env.spawn_x_min >= 0.0 && c.env.spawn_x_min < c.env.spawn_x_max &&
              c.env.spawn_x_max <= c.env.field_length,
          "spawn x range must lie inside the field");
  require(c.env.spawn_y_half > 0.0 && c.env.spawn_y_half <= c.env.field_half_width,
          "env.spawn_y_half must lie inside the field");
  require(c.env.min_agent_ball_distance >= 0.0, "env.min_agent_ball_distance must be >= 0");
  require(c.episodes >= 0, "run.episodes must be >= 0");
  require(c.eval_interval >= 1, "run.eval_interval must be >= 1");
  require(c.eval_episodes >= 1, "run.eval_episodes must be >= 1");
  require(!c.out_dir.empty(), "run.out_dir must not be empty");

  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) {
      msg += "\n  - ";
      msg += e;
    }
    throw std::invalid_argument(msg);
  }
}

std::uint64_t config_hash(const TrainingConfig& cfg) {
  const std::string dump = dump_config(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace pax::harness
