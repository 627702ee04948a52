#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "softrtc/model.hpp"
#include "softrtc/weights.hpp"

namespace softrtc {

struct TrainSample {
  Vec obs;            // o_t
  ActionChunk target; // supervised chunk A_t
  int delay = 0;      // simulated inference delay in controller timesteps
};

// Prior-informed corrupted chunk. With w = omega[j]:
//   tau_w[j] = w + (1 - w) * tau
//   x[j]     = tau_w[j] * target[j] + (1 - tau_w[j]) * noise[j]
// Fully clamped tokens are copied from the target verbatim.
struct CorruptedChunk {
  ActionChunk x;
  std::vector<double> tau_per_token;
  ActionChunk noise;
  double tau = 0.0;
};

struct TrainConfig {
  int epochs = 150;
  int batch_size = 64;
  double lr = 2e-3;
  double eps_denom = 1e-6;  // stabilizer in the loss denominator
  int d_max = 4;            // delays drawn uniformly from {0..d_max}
  uint64_t seed = 0;
  WindowRule rule = DelayScaled{2, 5};
  Schedule schedule = Schedule::Linear;

  void validate(int horizon) const;
};

CorruptedChunk corrupt(const ActionChunk& target, const ActionChunk& noise, double tau,
                       const WeightProfile& weights);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grads;
};

// Masked flow-matching loss over a batch, with gradients.
//
// Per sample, in batch order: draw noise (row-major standard normals) then a
// scalar tau from rng, build the weight profile from the sample delay,
// corrupt, and score
//   sum_j (1 - w_j) * ||v_j - (target_j - noise_j)||^2
//   / (sum_j (1 - w_j) + eps_denom).
// The returned loss is the batch mean. The draw order is part of the
// contract; reference implementations in the tests rely on it.
LossGrad loss_and_grads(const ModelParams& params, const std::vector<TrainSample>& batch,
                        const WindowRule& rule, Schedule schedule, double eps_denom, Rng& rng);

struct TrainResult {
  ModelParams params;
  std::vector<std::pair<long, double>> loss_curve;  // (step, batch loss)
};

// Minimizes the masked objective with Adam. Delays are resampled per example
// per epoch from uniform {0..d_max}; examples are reshuffled every epoch.
// Deterministic given config.seed.
TrainResult train(const std::vector<std::pair<Vec, ActionChunk>>& dataset,
                  const TrainConfig& config, const ModelParams& init);

}  // namespace softrtc
