#include <doctest.h>

#include <cmath>

#include "softrtc/envs.hpp"
#include "softrtc/executor.hpp"

using namespace softrtc;

namespace {

EnvSpec track_spec() {
  EnvSpec spec;
  spec.task = EnvSpec::Task::PointMassTrack;
  return spec;
}

EnvSpec switch_spec() {
  EnvSpec spec;
  spec.task = EnvSpec::Task::ModeSwitch;
  return spec;
}

// Runs the scripted expert to the end and reports the full log.
RolloutLog expert_rollout(const EnvSpec& spec, uint64_t seed) {
  Env env(spec, seed);
  RolloutLog log;
  while (!env.done()) {
    Vec a = expert_action(env);
    auto res = env.step(a);
    log.actions.push_back(res.executed);
    log.rewards.push_back(res.reward);
    log.errors.push_back(res.tracking_error);
  }
  log.episode_return = episode_return(log);
  log.solved = solved(log, spec);
  return log;
}

}  // namespace

TEST_SUITE("envs") {

TEST_CASE("zero action from rest leaves the state in place") {
  Env env(switch_spec(), 1);
  EnvState s = env.state();
  s.pos = {0.5, -0.5};
  s.vel = {0.0, 0.0};
  env.set_state(s);
  env.step(Vec{0.0, 0.0});
  CHECK(env.state().pos == Vec2{0.5, -0.5});
  CHECK(env.state().vel == Vec2{0.0, 0.0});
}

TEST_CASE("constant action integrates to n*a*dt of velocity") {
  Env env(switch_spec(), 2);
  EnvState s = env.state();
  s.vel = {0.0, 0.0};
  env.set_state(s);
  const int n = 10;
  for (int i = 0; i < n; ++i) env.step(Vec{2.0, -1.0});
  CHECK(env.state().vel[0] == doctest::Approx(n * 2.0 * env.spec().dt));
  CHECK(env.state().vel[1] == doctest::Approx(n * -1.0 * env.spec().dt));
}

TEST_CASE("on-reference step earns reward 1") {
  Env env(switch_spec(), 3);
  EnvState s = env.state();
  Vec2 target = env.reference(1);
  s.pos = target;
  s.vel = {0.0, 0.0};
  env.set_state(s);
  auto res = env.step(Vec{0.0, 0.0});
  CHECK(res.reward == 1.0);
  CHECK(res.tracking_error == 0.0);
}

TEST_CASE("actions are clipped to the bound") {
  Env env(switch_spec(), 4);
  auto res = env.step(Vec{1e9, -1e9});
  CHECK(res.executed[0] == env.spec().action_bound);
  CHECK(res.executed[1] == -env.spec().action_bound);
  CHECK_THROWS_AS(env.step(Vec{std::nan(""), 0.0}), std::invalid_argument);
}

TEST_CASE("expert is zero on-reference and proportional off-reference") {
  Env env(switch_spec(), 5);
  EnvState s = env.state();
  s.pos = env.reference(s.step_idx);
  s.vel = env.reference_velocity(s.step_idx);
  env.set_state(s);
  Vec a = expert_action(env);
  CHECK(a[0] == 0.0);
  CHECK(a[1] == 0.0);

  s.pos[0] -= 1.0;  // unit position error, matched velocity
  env.set_state(s);
  a = expert_action(env, 4.0, 2.0);
  CHECK(a[0] == doctest::Approx(4.0));
  CHECK(a[1] == 0.0);
}

TEST_CASE("expert solves both tasks across 32 seeds") {
  for (const EnvSpec& spec : {track_spec(), switch_spec()}) {
    int solves = 0;
    for (uint64_t seed = 0; seed < 32; ++seed) solves += expert_rollout(spec, seed).solved;
    CHECK(solves == 32);
  }
}

TEST_CASE("random actions do not solve the tracking task") {
  int solves = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Env env(track_spec(), seed);
    Rng rng(seed + 100);
    RolloutLog log;
    while (!env.done()) {
      auto res = env.step(Vec{4.0 * rng.normal(), 4.0 * rng.normal()});
      log.errors.push_back(res.tracking_error);
      log.actions.push_back(res.executed);
    }
    solves += solved(log, track_spec());
  }
  CHECK(solves <= 1);
}

TEST_CASE("mode switch relocates the target at the configured step") {
  EnvSpec spec = switch_spec();
  Env env(spec, 6);
  Vec2 before = env.reference(spec.switch_step - 1);
  Vec2 after = env.reference(spec.switch_step);
  double jump = std::hypot(after[0] - before[0], after[1] - before[1]);
  CHECK(jump > 1.0);
  CHECK(env.reference(spec.switch_step + 5) == after);
}

TEST_CASE("demo dataset has E-H+1 pairs per episode and is deterministic") {
  EnvSpec spec = track_spec();
  Dataset a = generate_demos(spec, 3, 8, 42);
  Dataset b = generate_demos(spec, 3, 8, 42);
  CHECK(a.pairs.size() == 3 * (spec.episode_len - 8 + 1));
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].first == b.pairs[i].first);
    CHECK(a.pairs[i].second == b.pairs[i].second);
  }
}

TEST_CASE("adjacent demo chunks satisfy the sliding-window identity") {
  Dataset ds = generate_demos(track_spec(), 2, 8, 7);
  const int per_episode = track_spec().episode_len - 8 + 1;
  for (size_t i = 0; i + 1 < ds.pairs.size(); ++i) {
    if ((i + 1) % per_episode == 0) continue;  // episode boundary
    const ActionChunk& now = ds.pairs[i].second;
    const ActionChunk& next = ds.pairs[i + 1].second;
    for (int j = 1; j < 8; ++j) {
      CHECK(now(j, 0) == next(j - 1, 0));
      CHECK(now(j, 1) == next(j - 1, 1));
    }
  }
}

TEST_CASE("observation layout is position, velocity, then reference preview") {
  EnvSpec spec = track_spec();
  Env env(spec, 8);
  Vec obs = env.observe();
  REQUIRE(static_cast<int>(obs.size()) == spec.obs_dim());
  CHECK(obs[0] == env.state().pos[0]);
  CHECK(obs[3] == env.state().vel[1]);
  Vec2 r1 = env.reference(1);
  CHECK(obs[4] == r1[0] - env.state().pos[0]);
  CHECK(obs[5] == r1[1] - env.state().pos[1]);
}

TEST_CASE("all-on-reference rollout has return 1") {
  RolloutLog log;
  log.rewards.assign(50, 1.0);
  log.errors.assign(50, 0.0);
  CHECK(episode_return(log) == 1.0);
  CHECK(solved(log, track_spec()));
}

}  // TEST_SUITE
