#ifndef PAXRL_HFO_ENV_HPP
#define PAXRL_HFO_ENV_HPP

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "paxrl/pamdp.hpp"

namespace pax::hfo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

inline double distance(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Wraps any angle in degrees onto [-180, 180).
double normalize_angle_deg(double a);

enum class TerminalKind { None, Goal, OutOfBounds, Timeout };

std::string to_string(TerminalKind k);

// Simplified half-field-offense world: a point-mass agent and ball on the
// offensive half, goal segment on the right end line. Distances in meters,
// angles in degrees, one action per timestep.
struct EnvConfig {
  double field_length = 52.5;      // x in [0, field_length]
  double field_half_width = 34.0;  // y in [-field_half_width, field_half_width]
  double goal_half_width = 3.66;   // goal segment x = field_length, |y| <= goal_half_width
  double kickable_radius = 1.0;
  double agent_max_speed = 1.0;
  double dash_accel_scale = 0.3;  // acceleration at power 100
  double agent_vel_decay = 0.4;
  double ball_vel_decay = 0.94;
  double kick_speed_scale = 2.0;  // ball speed at power 100
  int max_steps = 500;
  // reset boxes
  double spawn_x_min = 0.0;
  double spawn_x_max = 42.0;
  double spawn_y_half = 25.0;
  double min_agent_ball_distance = 2.0;

  Vec2 goal_center() const { return {field_length, 0.0}; }
  double field_diagonal() const { return std::hypot(field_length, 2.0 * field_half_width); }
};

struct EnvState {
  Vec2 agent_pos;
  Vec2 agent_vel;
  double orientation_deg = 0.0;  // [-180, 180)
  Vec2 ball_pos;
  Vec2 ball_vel;
  int step_count = 0;
  bool kick_awarded = false;  // latch: the once-per-episode kickable bonus fired
  TerminalKind terminal = TerminalKind::None;
};

struct StepOutcome {
  EnvState next;
  double reward = 0.0;
  bool terminal = false;
  std::vector<double> applied_params;  // after clamping to bounds
  bool clamped = false;                // any parameter was out of bounds on entry
};

// Agent and ball placed uniformly in the spawn box, ball re-drawn until it
// is at least min_agent_ball_distance away; orientation uniform in
// [-180, 180); velocities zero.
EnvState reset(const EnvConfig& cfg, std::mt19937_64& rng);

// Advances one timestep. Parameters are clamped to their schema bounds on
// entry. Throws if `state` is already terminal or the action is malformed.
StepOutcome step(const EnvState& state, const EnvConfig& cfg, const ParameterizedAction& action);

// Reward of the prev -> next transition:
//   [d_prev(a,b) - d_next(a,b)] + I_kick + 3 [d_prev(b,g) - d_next(b,g)] + 5 I_goal
// where I_kick fires on the step that first latched kick_awarded and I_goal
// on the goal-terminal step.
double reward_fn(const EnvState& prev, const EnvState& next, const EnvConfig& cfg);

inline constexpr int kFeatureCount = 14;

// Egocentric feature vector, every component normalized into [-1, 1].
std::vector<double> features(const EnvState& state, const EnvConfig& cfg);

// The schema the environment executes; bounds here are what step() clamps to.
const ActionSchema& env_schema();

namespace action_index {
inline constexpr std::size_t kDash = 0;
inline constexpr std::size_t kTurn = 1;
inline constexpr std::size_t kTackle = 2;
inline constexpr std::size_t kKick = 3;
}  // namespace action_index

}  // namespace pax::hfo

#endif
