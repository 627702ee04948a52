#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "softrtc/core.hpp"

namespace softrtc {

// 2-D double-integrator tracking tasks with scripted PD experts.
//
// PointMassTrack follows a smooth Lissajous reference; ModeSwitch holds a
// fixed target that relocates at a known step, which concentrates action
// discontinuities at chunk boundaries under delayed execution.
struct EnvSpec {
  enum class Task { PointMassTrack, ModeSwitch };
  Task task = Task::PointMassTrack;
  double dt = 0.05;
  int episode_len = 200;
  double action_bound = 10.0;
  double solve_threshold = 0.15;  // mean tracking error over the last solve_tail steps
  int solve_tail = 20;
  int horizon = 8;           // chunk horizon used for the observation preview
  int switch_step = 100;     // ModeSwitch target relocation step
  double init_jitter = 0.3;  // scale of the seeded initial state perturbation

  int obs_dim() const { return 4 + 2 * horizon; }
  void validate() const;
};

using Vec2 = std::array<double, 2>;

struct EnvState {
  Vec2 pos{0.0, 0.0};
  Vec2 vel{0.0, 0.0};
  int step_idx = 0;
  // Seeded reference parameters: Lissajous phases for PointMassTrack,
  // before/after targets for ModeSwitch.
  std::array<double, 4> ref_params{0.0, 0.0, 0.0, 0.0};
};

class Env {
 public:
  Env(const EnvSpec& spec, uint64_t seed);

  void reset(uint64_t seed);

  // Observation: [pos, vel, offsets of the next `horizon` reference points
  // relative to the current position].
  Vec observe() const;

  struct StepResult {
    double reward;          // exp(-||pos - ref||), evaluated after the transition
    double tracking_error;  // ||pos - ref|| after the transition
    Vec executed;           // the action actually applied, post clipping
  };
  StepResult step(const Vec& action);

  Vec2 reference(int step) const;
  Vec2 reference_velocity(int step) const;

  const EnvSpec& spec() const { return spec_; }
  const EnvState& state() const { return state_; }
  void set_state(const EnvState& state) { state_ = state; }
  bool done() const { return state_.step_idx >= spec_.episode_len; }

 private:
  EnvSpec spec_;
  EnvState state_;
};

// PD tracking law a = kp * (ref - pos) + kd * (ref' - vel), clipped to bounds.
Vec expert_action(const Env& env, double kp = 8.0, double kd = 4.0);

struct Dataset {
  std::vector<std::pair<Vec, ActionChunk>> pairs;  // (observation, next H expert actions)
  std::string task;
  EnvSpec spec;
  int demo_episodes = 0;
  int horizon = 0;
  uint64_t seed = 0;
};

// Rolls the scripted expert and records a sliding window of (observation,
// next H expert actions) at every step with H future steps remaining.
Dataset generate_demos(const EnvSpec& spec, int episodes, int horizon, uint64_t seed);

EnvSpec::Task task_from_name(const std::string& name);
const char* task_name(EnvSpec::Task task);

}  // namespace softrtc
