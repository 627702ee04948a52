#include "softrtc/envs.hpp"

#include <algorithm>
#include <cmath>

#include "softrtc/rng.hpp"

namespace softrtc {

void EnvSpec::validate() const {
  require(dt > 0.0, "EnvSpec: dt must be > 0");
  require(episode_len >= 1, "EnvSpec: episode_len must be >= 1");
  require(std::isfinite(action_bound) && action_bound > 0.0,
          "EnvSpec: action bound must be finite and positive");
  require(solve_threshold > 0.0, "EnvSpec: solve threshold must be > 0");
  require(solve_tail >= 1 && solve_tail <= episode_len, "EnvSpec: bad solve_tail");
  require(horizon >= 1, "EnvSpec: horizon must be >= 1");
}

namespace {
constexpr double kTrackRadius = 1.0;
constexpr double kTrackFreqX = 0.3;  // rad/s, slow enough for a PD law without feedforward
constexpr double kTrackFreqY = 0.4;
constexpr double kSwitchRadius = 2.0;
}  // namespace

Env::Env(const EnvSpec& spec, uint64_t seed) : spec_(spec) {
  spec_.validate();
  reset(seed);
}

void Env::reset(uint64_t seed) {
  Rng rng(derive_seed(seed, {0x656e76ULL}));
  state_ = EnvState{};
  if (spec_.task == EnvSpec::Task::PointMassTrack) {
    state_.ref_params[0] = rng.uniform() * 2.0 * M_PI;  // phase x
    state_.ref_params[1] = rng.uniform() * 2.0 * M_PI;  // phase y
  } else {
    // Targets on a circle; the second is pushed away from the first.
    double a0 = rng.uniform() * 2.0 * M_PI;
    double a1 = a0 + M_PI * (0.5 + rng.uniform());
    state_.ref_params = {kSwitchRadius * std::cos(a0), kSwitchRadius * std::sin(a0),
                         kSwitchRadius * std::cos(a1), kSwitchRadius * std::sin(a1)};
  }
  Vec2 start = reference(0);
  state_.pos = {start[0] + spec_.init_jitter * rng.normal(),
                start[1] + spec_.init_jitter * rng.normal()};
  state_.vel = {spec_.init_jitter * rng.normal(), spec_.init_jitter * rng.normal()};
}

Vec2 Env::reference(int step) const {
  step = std::clamp(step, 0, spec_.episode_len);
  if (spec_.task == EnvSpec::Task::PointMassTrack) {
    double t = step * spec_.dt;
    return {kTrackRadius * std::sin(kTrackFreqX * t + state_.ref_params[0]),
            kTrackRadius * std::sin(kTrackFreqY * t + state_.ref_params[1])};
  }
  if (step < spec_.switch_step) return {state_.ref_params[0], state_.ref_params[1]};
  return {state_.ref_params[2], state_.ref_params[3]};
}

Vec2 Env::reference_velocity(int step) const {
  step = std::clamp(step, 0, spec_.episode_len);
  if (spec_.task == EnvSpec::Task::PointMassTrack) {
    double t = step * spec_.dt;
    return {kTrackRadius * kTrackFreqX * std::cos(kTrackFreqX * t + state_.ref_params[0]),
            kTrackRadius * kTrackFreqY * std::cos(kTrackFreqY * t + state_.ref_params[1])};
  }
  return {0.0, 0.0};
}

Vec Env::observe() const {
  Vec obs;
  obs.reserve(spec_.obs_dim());
  obs.push_back(state_.pos[0]);
  obs.push_back(state_.pos[1]);
  obs.push_back(state_.vel[0]);
  obs.push_back(state_.vel[1]);
  for (int i = 1; i <= spec_.horizon; ++i) {
    Vec2 r = reference(state_.step_idx + i);
    obs.push_back(r[0] - state_.pos[0]);
    obs.push_back(r[1] - state_.pos[1]);
  }
  return obs;
}

Env::StepResult Env::step(const Vec& action) {
  require(action.size() == 2, "Env::step: action must be 2-D");
  require(all_finite(action), "Env::step: non-finite action");
  require(!done(), "Env::step: episode already finished");

  Vec executed = {std::clamp(action[0], -spec_.action_bound, spec_.action_bound),
                  std::clamp(action[1], -spec_.action_bound, spec_.action_bound)};

  state_.pos[0] += state_.vel[0] * spec_.dt;
  state_.pos[1] += state_.vel[1] * spec_.dt;
  state_.vel[0] += executed[0] * spec_.dt;
  state_.vel[1] += executed[1] * spec_.dt;
  state_.step_idx += 1;

  Vec2 ref = reference(state_.step_idx);
  double dx = state_.pos[0] - ref[0];
  double dy = state_.pos[1] - ref[1];
  double err = std::sqrt(dx * dx + dy * dy);
  return StepResult{std::exp(-err), err, std::move(executed)};
}

Vec expert_action(const Env& env, double kp, double kd) {
  const EnvState& s = env.state();
  Vec2 ref = env.reference(s.step_idx);
  Vec2 ref_v = env.reference_velocity(s.step_idx);
  double bound = env.spec().action_bound;
  return {std::clamp(kp * (ref[0] - s.pos[0]) + kd * (ref_v[0] - s.vel[0]), -bound, bound),
          std::clamp(kp * (ref[1] - s.pos[1]) + kd * (ref_v[1] - s.vel[1]), -bound, bound)};
}

Dataset generate_demos(const EnvSpec& spec, int episodes, int horizon, uint64_t seed) {
  require(episodes >= 1, "generate_demos: episodes must be >= 1");
  require(horizon >= 1 && horizon <= spec.episode_len, "generate_demos: bad horizon");

  Dataset out;
  out.task = task_name(spec.task);
  out.spec = spec;
  out.demo_episodes = episodes;
  out.horizon = horizon;
  out.seed = seed;

  for (int ep = 0; ep < episodes; ++ep) {
    Env env(spec, derive_seed(seed, {0x64656d6fULL, static_cast<uint64_t>(ep)}));
    std::vector<Vec> observations;
    std::vector<Vec> actions;
    observations.reserve(spec.episode_len);
    actions.reserve(spec.episode_len);
    while (!env.done()) {
      observations.push_back(env.observe());
      Vec a = expert_action(env);
      env.step(a);
      actions.push_back(std::move(a));
    }
    const int n = static_cast<int>(actions.size());
    for (int t = 0; t + horizon <= n; ++t) {
      ActionChunk chunk(horizon, 2);
      for (int j = 0; j < horizon; ++j) {
        chunk(j, 0) = actions[t + j][0];
        chunk(j, 1) = actions[t + j][1];
      }
      out.pairs.emplace_back(observations[t], std::move(chunk));
    }
  }
  return out;
}

EnvSpec::Task task_from_name(const std::string& name) {
  if (name == "point_mass_track") return EnvSpec::Task::PointMassTrack;
  if (name == "mode_switch") return EnvSpec::Task::ModeSwitch;
  throw ConfigError("unknown task: " + name);
}

const char* task_name(EnvSpec::Task task) {
  return task == EnvSpec::Task::PointMassTrack ? "point_mass_track" : "mode_switch";
}

}  // namespace softrtc
