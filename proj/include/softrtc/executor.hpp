#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softrtc/envs.hpp"
#include "softrtc/infer.hpp"

namespace softrtc {

enum class ExecMode { Naive, Rtc };

struct ExecutionConfig {
  int horizon = 8;       // H, chunk length
  int exec_horizon = 4;  // s, replan period
  int delay = 0;         // d, inference delay in controller timesteps
  ExecMode mode = ExecMode::Rtc;

  void validate() const {
    require(exec_horizon >= 1, "ExecutionConfig: exec_horizon must be >= 1");
    require(exec_horizon <= horizon, "ExecutionConfig: exec_horizon must be <= horizon");
    require(delay >= 0, "ExecutionConfig: delay must be >= 0");
    require(horizon >= exec_horizon + delay,
            "ExecutionConfig: need horizon >= exec_horizon + delay");
  }
};

struct RolloutLog {
  std::vector<Vec> actions;          // executed action per controller step, post clipping
  std::vector<double> rewards;       // per-step reward
  std::vector<double> errors;        // per-step tracking error
  std::vector<int> boundaries;       // first step executing each chunk k >= 1
  std::vector<double> gen_seconds;   // wall time per chunk generation
  // Provenance: (chunk index, local token index) for every executed step.
  std::vector<std::pair<int, int>> provenance;
  // Raw generated chunks, kept in memory for invariant checks; not serialized.
  std::vector<ActionChunk> chunks;
  bool solved = false;
  double episode_return = 0.0;

  int length() const { return static_cast<int>(actions.size()); }
};

// Re-indexes the previous chunk into the upcoming chunk frame:
// Y[j] = prev[s + j] for j < H - s, invalid (zero-filled) beyond the overlap.
PriorChunk align_prior(const ActionChunk& prev_chunk, int exec_horizon, int horizon);

// Simulates asynchronous chunked execution with a fixed inference delay.
//
// Timeline: chunk k is generated from the observation at step k*s and becomes
// available at k*s + d; until then the previous chunk keeps executing. Chunk 0
// is generated synchronously (effective delay 0). Delay is bookkeeping, not
// wall-clock sleeping, so rollouts are deterministic.
//
// In rtc mode each chunk k >= 1 is generated with the aligned previous chunk
// as prior and the configured delay; naive mode passes no prior and zero
// weights, so any handoff artifacts come purely from the timeline.
RolloutLog rollout(Env& env, const ModelParams& params, const ExecutionConfig& exec,
                   const WindowRule& rule, Schedule schedule, const SolverConfig& solver,
                   Rng& rng);

bool solved(const RolloutLog& log, const EnvSpec& spec);
double episode_return(const RolloutLog& log);

// One result-table row; the CSV column order is fixed.
struct ResultRow {
  std::string method;
  std::string task;
  int delay = 0;
  int seed = 0;
  double ret = 0.0;
  bool solve = false;
  double action_delta = 0.0;
  double action_jerk = 0.0;
  double boundary_jump = 0.0;
};

struct EvalRequest {
  std::vector<EnvSpec> tasks;
  std::vector<int> delays;
  int episodes = 32;
  std::string method_label;
  ExecMode mode = ExecMode::Rtc;
  WindowRule rule = DelayScaled{2, 5};
  Schedule schedule = Schedule::Linear;
  SolverConfig solver;
  int exec_horizon = 4;
  uint64_t master_seed = 0;
  int workers = 1;
};

// Runs the task x delay x episode grid and aggregates one row per episode.
// Per-cell rng streams are derived from the master seed, so the table is
// independent of worker count and scheduling.
std::vector<ResultRow> evaluate(const EvalRequest& request, const ModelParams& params);

}  // namespace softrtc
