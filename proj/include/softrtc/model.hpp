#pragma once

#include <cstdint>
#include <vector>

#include "softrtc/core.hpp"
#include "softrtc/rng.hpp"

namespace softrtc {

// Fully connected vector-field network. Input is the concatenation
// [observation, flattened chunk state, per-token flow times]; output is a
// horizon x action_dim velocity. tanh hidden activations, linear output,
// double precision throughout.
struct ModelConfig {
  int obs_dim = 0;
  int horizon = 0;
  int action_dim = 0;
  std::vector<int> hidden = {64, 64};
  uint64_t seed = 0;

  int input_dim() const { return obs_dim + horizon * action_dim + horizon; }
  int output_dim() const { return horizon * action_dim; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct ModelParams {
  ModelConfig config;
  std::vector<double> flat;  // per layer: weight matrix (out x in, row-major), then bias

  // Layer sizes including input and output: config derived.
  std::vector<int> layer_sizes() const;
  size_t param_count() const { return flat.size(); }
  // Offset of layer l's weight block / bias block inside flat.
  size_t weight_offset(int layer) const;
  size_t bias_offset(int layer) const;
};

struct OptimizerState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerState init(size_t param_count, double lr);
};

// Activations recorded during a forward pass, reused by the backward pass.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;  // [0] = input, last = output
};

ModelParams init_model(const ModelConfig& config);

ActionChunk forward(const ModelParams& params, const Vec& obs, const ActionChunk& state,
                    const std::vector<double>& times, ForwardTrace* trace = nullptr);

struct Gradients {
  std::vector<double> params;  // same layout as ModelParams::flat
  ActionChunk state;           // gradient with respect to the chunk state input
};

// Reverse-mode gradients of <forward(...), upstream> with respect to the
// parameters and the chunk state. Recomputes the forward pass unless a trace
// from the matching call is supplied.
Gradients backward(const ModelParams& params, const Vec& obs, const ActionChunk& state,
                   const std::vector<double>& times, const ActionChunk& upstream,
                   const ForwardTrace* trace = nullptr);

// Bias-corrected adaptive-moment update, in place.
void adam_step(ModelParams& params, const std::vector<double>& grads, OptimizerState& opt);

}  // namespace softrtc
