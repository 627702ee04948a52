#include "softrtc/infer.hpp"

namespace softrtc {

WeightProfile clamp_to_prior(WeightProfile weights, const PriorChunk& prior) {
  require(static_cast<int>(prior.valid.size()) == weights.horizon(),
          "clamp_to_prior: prior length mismatch");
  for (int j = 0; j < weights.horizon(); ++j)
    if (!prior.valid[j]) weights.omega[j] = 0.0;
  return weights;
}

namespace {

struct SolveContext {
  WeightProfile weights;
  bool has_prior;
};

SolveContext prepare(const ModelParams& params, const PriorChunk* prior, int delay,
                     const WindowRule& rule, Schedule schedule, const SolverConfig& solver) {
  solver.validate();
  const auto& cfg = params.config;
  WeightProfile weights = token_weights(rule, schedule, delay, cfg.horizon);
  if (prior) {
    require(prior->values.rows == cfg.horizon && prior->values.cols == cfg.action_dim,
            "generate_chunk: prior shape mismatch");
    weights = clamp_to_prior(std::move(weights), *prior);
  } else {
    require(weights.all_zero(), "generate_chunk: nonzero weights but no prior chunk");
  }
  return SolveContext{std::move(weights), prior != nullptr};
}

}  // namespace

ActionChunk generate_chunk(const ModelParams& params, const Vec& obs, const PriorChunk* prior,
                           int delay, const WindowRule& rule, Schedule schedule,
                           const SolverConfig& solver, Rng& rng, long* model_eval_count) {
  SolveContext ctx = prepare(params, prior, delay, rule, schedule, solver);
  const auto& cfg = params.config;
  const int T = solver.flow_steps;

  ActionChunk x = rng.normal_mat(cfg.horizon, cfg.action_dim);
  // With no prior the weights are all zero, so the reference rows are never read.
  const ActionChunk& prior_values = ctx.has_prior ? prior->values : x;

  for (int k = 0; k < T; ++k) {
    ActionChunk blended = blend_state(ctx.weights, prior_values, x);
    std::vector<double> times = blend_time(ctx.weights, static_cast<double>(k) / T);
    ActionChunk v = forward(params, obs, blended, times);
    if (model_eval_count) ++*model_eval_count;
    for (size_t i = 0; i < x.data.size(); ++i) x.data[i] = blended.data[i] + v.data[i] / T;
    if (!x.all_finite()) throw DivergenceError("generate_chunk: non-finite solver state");
  }
  if (solver.post_blend && ctx.has_prior) x = blend_state(ctx.weights, prior->values, x);
  return x;
}

SolverTrace solver_trace(const ModelParams& params, const Vec& obs, const PriorChunk* prior,
                         int delay, const WindowRule& rule, Schedule schedule,
                         const SolverConfig& solver, Rng& rng) {
  SolveContext ctx = prepare(params, prior, delay, rule, schedule, solver);
  const auto& cfg = params.config;
  const int T = solver.flow_steps;

  SolverTrace trace;
  trace.weights = ctx.weights;
  ActionChunk x = rng.normal_mat(cfg.horizon, cfg.action_dim);
  const ActionChunk& prior_values = ctx.has_prior ? prior->values : x;

  for (int k = 0; k < T; ++k) {
    SolverStep step;
    step.state = x;
    step.blended_state = blend_state(ctx.weights, prior_values, x);
    step.blended_time = blend_time(ctx.weights, static_cast<double>(k) / T);
    ActionChunk v = forward(params, obs, step.blended_state, step.blended_time);
    for (size_t i = 0; i < x.data.size(); ++i)
      x.data[i] = step.blended_state.data[i] + v.data[i] / T;
    if (!x.all_finite()) throw DivergenceError("solver_trace: non-finite solver state");
    trace.steps.push_back(std::move(step));
  }
  if (solver.post_blend && ctx.has_prior) x = blend_state(ctx.weights, prior->values, x);
  trace.output = std::move(x);
  return trace;
}

}  // namespace softrtc
