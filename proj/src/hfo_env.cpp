#include "paxrl/hfo_env.hpp"

#include <algorithm>
#include <stdexcept>

namespace pax::hfo {

namespace {

constexpr double kPi = 3.14159265358979323846;

double deg_to_rad(double d) { return d * kPi / 180.0; }
double rad_to_deg(double r) { return r * 180.0 / kPi; }

Vec2 unit_from_deg(double deg) {
  const double r = deg_to_rad(deg);
  return {std::cos(r), std::sin(r)};
}

double angle_to_deg(const Vec2& from, const Vec2& to) {
  return rad_to_deg(std::atan2(to.y - from.y, to.x - from.x));
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

bool inside_field(const Vec2& p, const EnvConfig& cfg) {
  return p.x >= 0.0 && p.x <= cfg.field_length && std::fabs(p.y) <= cfg.field_half_width;
}

}  // namespace

double normalize_angle_deg(double a) {
  double r = a - 360.0 * std::floor((a + 180.0) / 360.0);
  // floor rounding can land exactly on +180
  if (r >= 180.0) r -= 360.0;
  return r;
}

std::string to_string(TerminalKind k) {
  switch (k) {
    case TerminalKind::None:
      return "none";
    case TerminalKind::Goal:
      return "goal";
    case TerminalKind::OutOfBounds:
      return "out_of_bounds";
    case TerminalKind::Timeout:
      return "timeout";
  }
  return "none";
}

const ActionSchema& env_schema() {
  static const ActionSchema schema = ActionSchema::hfo();
  return schema;
}

EnvState reset(const EnvConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> sx(cfg.spawn_x_min, cfg.spawn_x_max);
  std::uniform_real_distribution<double> sy(-cfg.spawn_y_half, cfg.spawn_y_half);
  std::uniform_real_distribution<double> so(-180.0, 180.0);

  EnvState s;
  s.agent_pos = {sx(rng), sy(rng)};
  s.orientation_deg = normalize_angle_deg(so(rng));
  do {
    s.ball_pos = {sx(rng), sy(rng)};
  } while (distance(s.agent_pos, s.ball_pos) < cfg.min_agent_ball_distance);
  return s;
}

StepOutcome step(const EnvState& state, const EnvConfig& cfg, const ParameterizedAction& action) {
  if (state.terminal != TerminalKind::None) {
    throw std::logic_error("step: episode already terminal");
  }
  const ActionSchema& schema = env_schema();
  if (action.discrete_index >= schema.num_actions() ||
      action.parameters.size() != schema.param_count(action.discrete_index)) {
    throw std::invalid_argument("step: action does not match the schema");
  }

  StepOutcome out;
  out.applied_params = action.parameters;
  const std::size_t off = schema.param_offset(action.discrete_index);
  for (std::size_t i = 0; i < out.applied_params.size(); ++i) {
    const ParamSpec& spec = schema.param(off + i);
    const double raw = out.applied_params[i];
    if (!std::isfinite(raw)) throw std::invalid_argument("step: non-finite action parameter");
    const double c = clamp(raw, spec.min_value, spec.max_value);
    if (c != raw) out.clamped = true;
    out.applied_params[i] = c;
  }

  EnvState next = state;
  switch (action.discrete_index) {
    case action_index::kDash: {
      const double power = out.applied_params[0];
      const double dir = out.applied_params[1];
      const Vec2 u = unit_from_deg(state.orientation_deg + dir);
      const double mag = power / 100.0 * cfg.dash_accel_scale;
      next.agent_vel.x += mag * u.x;
      next.agent_vel.y += mag * u.y;
      const double speed = std::hypot(next.agent_vel.x, next.agent_vel.y);
      if (speed > cfg.agent_max_speed) {
        const double scale = cfg.agent_max_speed / speed;
        next.agent_vel.x *= scale;
        next.agent_vel.y *= scale;
      }
      break;
    }
    case action_index::kTurn:
      next.orientation_deg = normalize_angle_deg(state.orientation_deg + out.applied_params[0]);
      break;
    case action_index::kTackle:
      // no opponent to contest; only useful against one
      break;
    case action_index::kKick: {
      if (distance(state.agent_pos, state.ball_pos) <= cfg.kickable_radius) {
        const double power = out.applied_params[0];
        const double dir = out.applied_params[1];
        const Vec2 u = unit_from_deg(state.orientation_deg + dir);
        const double speed = power / 100.0 * cfg.kick_speed_scale;
        next.ball_vel = {speed * u.x, speed * u.y};
      }
      break;
    }
    default:
      break;
  }

  next.agent_pos.x += next.agent_vel.x;
  next.agent_pos.y += next.agent_vel.y;
  next.ball_pos.x += next.ball_vel.x;
  next.ball_pos.y += next.ball_vel.y;
  next.agent_vel.x *= cfg.agent_vel_decay;
  next.agent_vel.y *= cfg.agent_vel_decay;
  next.ball_vel.x *= cfg.ball_vel_decay;
  next.ball_vel.y *= cfg.ball_vel_decay;

  // the agent cannot leave the field
  next.agent_pos.x = clamp(next.agent_pos.x, 0.0, cfg.field_length);
  next.agent_pos.y = clamp(next.agent_pos.y, -cfg.field_half_width, cfg.field_half_width);

  next.step_count = state.step_count + 1;

  if (!next.kick_awarded && distance(next.agent_pos, next.ball_pos) <= cfg.kickable_radius) {
    next.kick_awarded = true;
  }

  // Terminal checks, in order. The goal test interpolates the ball segment
  // between the previous and new position so a fast ball cannot tunnel
  // through the goal line.
  if (next.ball_pos.x >= cfg.field_length) {
    const double run = next.ball_pos.x - state.ball_pos.x;
    const double t = run > 0.0 ? (cfg.field_length - state.ball_pos.x) / run : 0.0;
    const double y_cross = state.ball_pos.y + t * (next.ball_pos.y - state.ball_pos.y);
    next.terminal = (std::fabs(y_cross) <= cfg.goal_half_width) ? TerminalKind::Goal
                                                                : TerminalKind::OutOfBounds;
  } else if (!inside_field(next.ball_pos, cfg)) {
    next.terminal = TerminalKind::OutOfBounds;
  } else if (next.step_count >= cfg.max_steps) {
    next.terminal = TerminalKind::Timeout;
  }

  out.reward = reward_fn(state, next, cfg);
  out.terminal = next.terminal != TerminalKind::None;
  out.next = next;
  return out;
}

double reward_fn(const EnvState& prev, const EnvState& next, const EnvConfig& cfg) {
  const Vec2 goal = cfg.goal_center();
  const double move_to_ball =
      distance(prev.agent_pos, prev.ball_pos) - distance(next.agent_pos, next.ball_pos);
  const double kick_to_goal =
      distance(prev.ball_pos, goal) - distance(next.ball_pos, goal);
  const double i_kick = (next.kick_awarded && !prev.kick_awarded) ? 1.0 : 0.0;
  const double i_goal = (next.terminal == TerminalKind::Goal) ? 1.0 : 0.0;
  return move_to_ball + i_kick + 3.0 * kick_to_goal + 5.0 * i_goal;
}

std::vector<double> features(const EnvState& state, const EnvConfig& cfg) {
  const double diag = cfg.field_diagonal();
  const Vec2 goal = cfg.goal_center();
  const Vec2 top_post = {cfg.field_length, cfg.goal_half_width};
  const Vec2 bottom_post = {cfg.field_length, -cfg.goal_half_width};

  auto norm_dist = [&](double d) { return std::min(d / diag, 1.0); };
  auto rel_angle = [&](const Vec2& target) {
    return normalize_angle_deg(angle_to_deg(state.agent_pos, target) - state.orientation_deg) /
           180.0;
  };

  const double speed = std::hypot(state.agent_vel.x, state.agent_vel.y);
  const double vel_dir_rel =
      speed > 0.0
          ? normalize_angle_deg(rad_to_deg(std::atan2(state.agent_vel.y, state.agent_vel.x)) -
                                state.orientation_deg) /
                180.0
          : 0.0;
  const double kickable =
      distance(state.agent_pos, state.ball_pos) <= cfg.kickable_radius ? 1.0 : 0.0;

  return {
      state.agent_pos.x / cfg.field_length * 2.0 - 1.0,
      state.agent_pos.y / cfg.field_half_width,
      state.orientation_deg / 180.0,
      speed / cfg.agent_max_speed,
      vel_dir_rel,
      kickable,
      norm_dist(distance(state.agent_pos, state.ball_pos)),
      rel_angle(state.ball_pos),
      norm_dist(distance(state.agent_pos, goal)),
      rel_angle(goal),
      rel_angle(top_post),
      rel_angle(bottom_post),
      norm_dist(distance(state.ball_pos, goal)),
      static_cast<double>(cfg.max_steps - state.step_count) / static_cast<double>(cfg.max_steps),
  };
}

}  // namespace pax::hfo
