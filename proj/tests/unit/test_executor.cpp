#include <doctest.h>

#include "softrtc/executor.hpp"
#include "softrtc/metrics.hpp"

using namespace softrtc;

namespace {

ModelConfig rollout_config(const EnvSpec& spec, uint64_t seed = 0) {
  ModelConfig cfg;
  cfg.obs_dim = spec.obs_dim();
  cfg.horizon = 8;
  cfg.action_dim = 2;
  cfg.hidden = {16};
  cfg.seed = seed;
  return cfg;
}

ExecutionConfig exec_config(int delay, ExecMode mode) {
  ExecutionConfig exec;
  exec.horizon = 8;
  exec.exec_horizon = 4;
  exec.delay = delay;
  exec.mode = mode;
  return exec;
}

RolloutLog run(const EnvSpec& spec, const ModelParams& params, int delay, ExecMode mode,
               uint64_t seed) {
  Env env(spec, seed);
  Rng rng(seed + 1000);
  return rollout(env, params, exec_config(delay, mode), DelayScaled{2, 5}, Schedule::Linear,
                 SolverConfig{}, rng);
}

}  // namespace

TEST_SUITE("executor") {

TEST_CASE("align_prior shifts by the execution horizon") {
  ActionChunk prev(8, 2);
  for (int j = 0; j < 8; ++j) {
    prev(j, 0) = j;
    prev(j, 1) = 10 + j;
  }
  PriorChunk prior = align_prior(prev, 4, 8);
  CHECK(prior.valid == std::vector<uint8_t>{1, 1, 1, 1, 0, 0, 0, 0});
  for (int j = 0; j < 4; ++j) {
    CHECK(prior.values(j, 0) == prev(4 + j, 0));
    CHECK(prior.values(j, 1) == prev(4 + j, 1));
  }
  for (int j = 4; j < 8; ++j) {
    CHECK(prior.values(j, 0) == 0.0);
    CHECK(prior.values(j, 1) == 0.0);
  }
}

TEST_CASE("align_prior with s = H leaves no valid tokens") {
  PriorChunk prior = align_prior(ActionChunk(8, 2, 1.0), 8, 8);
  for (uint8_t v : prior.valid) CHECK(v == 0);
}

TEST_CASE("execution config invariants") {
  ExecutionConfig exec = exec_config(0, ExecMode::Rtc);
  exec.exec_horizon = 0;
  CHECK_THROWS_AS(exec.validate(), std::invalid_argument);
  exec = exec_config(5, ExecMode::Rtc);  // H=8 < s+d=9
  CHECK_THROWS_AS(exec.validate(), std::invalid_argument);
  exec = exec_config(4, ExecMode::Rtc);
  CHECK_NOTHROW(exec.validate());
}

TEST_CASE("rtc and naive rollouts are identical at zero delay") {
  EnvSpec spec;
  ModelParams params = init_model(rollout_config(spec, 80));
  RolloutLog rtc = run(spec, params, 0, ExecMode::Rtc, 42);
  RolloutLog naive = run(spec, params, 0, ExecMode::Naive, 42);
  REQUIRE(rtc.length() == naive.length());
  for (int i = 0; i < rtc.length(); ++i) CHECK(rtc.actions[i] == naive.actions[i]);
  CHECK(rtc.rewards == naive.rewards);
  CHECK(rtc.boundaries == naive.boundaries);
}

TEST_CASE("timeline: committed prefix indices never execute and spacing is s") {
  EnvSpec spec;
  ModelParams params = init_model(rollout_config(spec, 81));
  const int d = 3;
  RolloutLog log = run(spec, params, d, ExecMode::Rtc, 7);

  CHECK(log.length() == spec.episode_len);
  for (const auto& [chunk, local] : log.provenance) {
    if (chunk >= 1) CHECK(local >= d);
    CHECK(local < 8);
  }
  for (size_t i = 1; i < log.boundaries.size(); ++i)
    CHECK(log.boundaries[i] - log.boundaries[i - 1] == 4);
  CHECK(log.boundaries.front() == 4 + d);
}

TEST_CASE("executed prefix matches the aligned prior elementwise") {
  // During chunk k's generation gap, the executed actions must be the same
  // rows of chunk k-1 that align_prior handed to chunk k as committed prefix.
  EnvSpec spec;
  ModelParams params = init_model(rollout_config(spec, 82));
  const int d = 3, s = 4;
  RolloutLog log = run(spec, params, d, ExecMode::Rtc, 9);

  for (int k = 1; k * s + d <= log.length(); ++k) {
    PriorChunk prior = align_prior(log.chunks[k - 1], s, 8);
    for (int i = 0; i < d; ++i) {
      int step = k * s + i;
      if (step >= log.length()) break;
      CHECK(log.provenance[step] == std::pair<int, int>{k - 1, s + i});
      REQUIRE(prior.valid[i]);
      for (int a = 0; a < 2; ++a) CHECK(log.actions[step][a] == prior.values(i, a));
    }
  }
}

TEST_CASE("evaluation grid has one row per cell and is deterministic") {
  EnvSpec track;
  EnvSpec mode;
  mode.task = EnvSpec::Task::ModeSwitch;
  ModelParams params = init_model(rollout_config(track, 83));

  EvalRequest req;
  req.tasks = {track, mode};
  req.delays = {0, 1, 2, 3, 4};
  req.episodes = 4;
  req.method_label = "probe";
  req.exec_horizon = 4;
  req.master_seed = 5;
  req.workers = 1;

  std::vector<ResultRow> rows = evaluate(req, params);
  CHECK(rows.size() == 2 * 5 * 4);
  for (const ResultRow& r : rows) {
    CHECK(r.ret >= 0.0);
    CHECK(r.ret <= 1.0);
  }

  req.workers = 4;
  std::vector<ResultRow> parallel = evaluate(req, params);
  REQUIRE(parallel.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].method == parallel[i].method);
    CHECK(rows[i].task == parallel[i].task);
    CHECK(rows[i].delay == parallel[i].delay);
    CHECK(rows[i].seed == parallel[i].seed);
    CHECK(rows[i].ret == parallel[i].ret);
    CHECK(rows[i].solve == parallel[i].solve);
    CHECK(rows[i].action_delta == parallel[i].action_delta);
    CHECK(rows[i].action_jerk == parallel[i].action_jerk);
    CHECK(rows[i].boundary_jump == parallel[i].boundary_jump);
  }
}

TEST_CASE("per-cell solve rates stay within [0, 1]") {
  EnvSpec spec;
  ModelParams params = init_model(rollout_config(spec, 84));
  EvalRequest req;
  req.tasks = {spec};
  req.delays = {0, 2};
  req.episodes = 3;
  req.method_label = "probe";
  req.exec_horizon = 4;
  req.master_seed = 17;
  std::vector<ResultRow> rows = evaluate(req, params);
  for (const ResultRow& r : rows) CHECK((r.solve == true || r.solve == false));
}

}  // TEST_SUITE
