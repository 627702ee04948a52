#include "softrtc/executor.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "softrtc/metrics.hpp"

namespace softrtc {

PriorChunk align_prior(const ActionChunk& prev_chunk, int exec_horizon, int horizon) {
  require(prev_chunk.rows == horizon, "align_prior: chunk horizon mismatch");
  require(exec_horizon >= 1 && exec_horizon <= horizon, "align_prior: bad exec_horizon");
  PriorChunk prior;
  prior.values = ActionChunk(horizon, prev_chunk.cols);
  prior.valid.assign(horizon, 0);
  const int overlap = horizon - exec_horizon;
  for (int j = 0; j < overlap; ++j) {
    std::copy(prev_chunk.row(exec_horizon + j), prev_chunk.row(exec_horizon + j) + prev_chunk.cols,
              prior.values.row(j));
    prior.valid[j] = 1;
  }
  return prior;
}

RolloutLog rollout(Env& env, const ModelParams& params, const ExecutionConfig& exec,
                   const WindowRule& rule, Schedule schedule, const SolverConfig& solver,
                   Rng& rng) {
  exec.validate();
  require(params.config.horizon == exec.horizon, "rollout: model horizon != exec horizon");
  const int s = exec.exec_horizon;
  const int d = exec.delay;
  const int episode_len = env.spec().episode_len;

  RolloutLog log;
  std::vector<ActionChunk> chunks;

  auto generate = [&](int k) {
    Vec obs = env.observe();
    auto t0 = std::chrono::steady_clock::now();
    ActionChunk chunk;
    if (exec.mode == ExecMode::Rtc && k > 0) {
      PriorChunk prior = align_prior(chunks.back(), s, exec.horizon);
      chunk = generate_chunk(params, obs, &prior, d, rule, schedule, solver, rng);
    } else {
      // Chunk 0 bootstraps synchronously; naive mode never conditions.
      chunk = generate_chunk(params, obs, nullptr, 0, rule, schedule, solver, rng);
    }
    auto t1 = std::chrono::steady_clock::now();
    log.gen_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    chunks.push_back(std::move(chunk));
  };

  // availability(0) = 0 (bootstrap), availability(k) = k*s + d for k >= 1.
  for (int step = 0; step < episode_len; ++step) {
    if (step % s == 0 && step / s == static_cast<int>(chunks.size())) generate(step / s);

    int active = static_cast<int>(chunks.size()) - 1;
    while (active > 0 && active * s + d > step) --active;
    const int local = step - active * s;

    Vec action(params.config.action_dim);
    for (int a = 0; a < params.config.action_dim; ++a) action[a] = chunks[active](local, a);

    Env::StepResult res = env.step(action);
    if (active > 0 && local == d) log.boundaries.push_back(step);
    log.actions.push_back(std::move(res.executed));
    log.rewards.push_back(res.reward);
    log.errors.push_back(res.tracking_error);
    log.provenance.emplace_back(active, local);
  }

  log.episode_return = episode_return(log);
  log.solved = solved(log, env.spec());
  log.chunks = std::move(chunks);
  return log;
}

bool solved(const RolloutLog& log, const EnvSpec& spec) {
  if (log.errors.empty()) return false;
  const int n = static_cast<int>(log.errors.size());
  const int tail = std::min(spec.solve_tail, n);
  double acc = 0.0;
  for (int i = n - tail; i < n; ++i) acc += log.errors[i];
  return acc / tail < spec.solve_threshold;
}

double episode_return(const RolloutLog& log) {
  if (log.rewards.empty()) return 0.0;
  double acc = 0.0;
  for (double r : log.rewards) acc += r;
  return acc / static_cast<double>(log.rewards.size());
}

std::vector<ResultRow> evaluate(const EvalRequest& request, const ModelParams& params) {
  require(!request.tasks.empty(), "evaluate: no tasks");
  require(!request.delays.empty(), "evaluate: no delays");
  require(request.episodes >= 1, "evaluate: episodes must be >= 1");

  struct Cell {
    int task_idx, delay, episode;
  };
  std::vector<Cell> cells;
  for (size_t ti = 0; ti < request.tasks.size(); ++ti)
    for (int delay : request.delays)
      for (int ep = 0; ep < request.episodes; ++ep)
        cells.push_back(Cell{static_cast<int>(ti), delay, ep});

  std::vector<ResultRow> rows(cells.size());
  auto run_cell = [&](size_t idx) {
    const Cell& cell = cells[idx];
    const EnvSpec& spec = request.tasks[cell.task_idx];

    ExecutionConfig exec;
    exec.horizon = params.config.horizon;
    exec.exec_horizon = request.exec_horizon;
    exec.delay = cell.delay;
    exec.mode = request.mode;

    const uint64_t cell_seed =
        derive_seed(request.master_seed, {static_cast<uint64_t>(cell.task_idx),
                                          static_cast<uint64_t>(cell.delay),
                                          static_cast<uint64_t>(cell.episode)});
    Env env(spec, derive_seed(cell_seed, {1}));
    Rng rng(derive_seed(cell_seed, {2}));
    RolloutLog log =
        rollout(env, params, exec, request.rule, request.schedule, request.solver, rng);

    ResultRow row;
    row.method = request.method_label;
    row.task = task_name(spec.task);
    row.delay = cell.delay;
    row.seed = cell.episode;
    row.ret = log.episode_return;
    row.solve = log.solved;
    row.action_delta = action_delta(log.actions);
    row.action_jerk = action_jerk(log.actions);
    row.boundary_jump = log.boundaries.empty() ? 0.0 : boundary_jump(log);
    rows[idx] = std::move(row);
  };

  int workers = std::max(1, request.workers);
  if (workers == 1) {
    for (size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) run_cell(i);
      });
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace softrtc
