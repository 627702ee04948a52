#pragma once

#include <cstdint>
#include <vector>

#include "softrtc/model.hpp"
#include "softrtc/weights.hpp"

namespace softrtc {

struct SolverConfig {
  int flow_steps = 5;       // T
  bool post_blend = false;  // re-blend the returned chunk (off: return x^T verbatim)

  void validate() const { require(flow_steps >= 1, "SolverConfig: flow_steps must be >= 1"); }
};

// Previous chunk re-indexed into the current chunk frame. Tokens without an
// aligned previous action are marked invalid and must never carry weight.
struct PriorChunk {
  ActionChunk values;
  std::vector<uint8_t> valid;

  static PriorChunk all_valid(ActionChunk values) {
    PriorChunk p;
    p.valid.assign(values.rows, 1);
    p.values = std::move(values);
    return p;
  }
};

// Weights with nonzero mass on invalid prior tokens are clamped to zero;
// this is the inference-side guard for windows that extend past the
// physically available overlap.
WeightProfile clamp_to_prior(WeightProfile weights, const PriorChunk& prior);

// One explicit Euler pass over the learned vector field with token-wise
// prior blending:
//   x~ = blend_state(omega, Y, x^k),  t~ = blend_time(omega, k/T),
//   x^{k+1} = x~ + (1/T) * v(obs, x~, t~)
// starting from x^0 ~ N(0, I) drawn from rng (row-major). Passing a null
// prior requires the clamped weights to be identically zero.
// model_eval_count, when supplied, is incremented once per vector-field call.
ActionChunk generate_chunk(const ModelParams& params, const Vec& obs, const PriorChunk* prior,
                           int delay, const WindowRule& rule, Schedule schedule,
                           const SolverConfig& solver, Rng& rng,
                           long* model_eval_count = nullptr);

struct SolverStep {
  ActionChunk state;          // x^k before blending
  ActionChunk blended_state;  // x~^k
  std::vector<double> blended_time;
};

struct SolverTrace {
  std::vector<SolverStep> steps;
  ActionChunk output;
  WeightProfile weights;  // after prior clamping
};

// Same computation as generate_chunk with per-step recording.
SolverTrace solver_trace(const ModelParams& params, const Vec& obs, const PriorChunk* prior,
                         int delay, const WindowRule& rule, Schedule schedule,
                         const SolverConfig& solver, Rng& rng);

}  // namespace softrtc
