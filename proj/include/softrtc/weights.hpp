#pragma once

#include <variant>
#include <vector>

#include "softrtc/core.hpp"

namespace softrtc {

// Soft-conditioning endpoint rules. The endpoint e(d) bounds how far the
// prior-conditioned window extends into the chunk for a realized delay d.
struct DelayScaled {
  int multiplier = 2;  // lambda >= 1
  int h_max = 5;       // max soft horizon
};
struct FixedWindow {
  int length = 3;  // h >= 0
};
struct OffsetWindow {
  int length = 0;  // L >= 0, soft region appended after the committed prefix
  int cap = 8;     // endpoint cap, <= H
};
using WindowRule = std::variant<DelayScaled, FixedWindow, OffsetWindow>;

enum class Schedule { Linear, Zeros, ShiftedLinear };

// Token weights for one chunk: omega[j] = 1 for committed tokens, 0 for free
// tokens, and a schedule value in between. Nonincreasing in j.
struct WeightProfile {
  std::vector<double> omega;
  int delay = 0;
  int endpoint = 0;

  int horizon() const { return static_cast<int>(omega.size()); }
  bool all_zero() const {
    for (double w : omega)
      if (w != 0.0) return false;
    return true;
  }
};

// Schedule value g(u) on [0, 1); monotone nonincreasing, range [0, 1].
double schedule_value(Schedule schedule, double u);

// Conditioning endpoint e(d). Returns 0 at d = 0 for every rule; for d > 0
// the result is clamped into [d, H].
int endpoint(const WindowRule& rule, int delay, int horizon);

// Full token-weight profile: 1 for j < d, g((j-d)/(e-d)) for d <= j < e,
// 0 for j >= e. ShiftedLinear evaluates g at (j-d+1)/(e-d+1) instead.
WeightProfile token_weights(const WindowRule& rule, Schedule schedule, int delay, int horizon);

// Token-wise convex combination of a prior chunk and the solver state.
// Weight-0 and weight-1 rows are copied verbatim so the identity cases are
// exact at the bit level.
ActionChunk blend_state(const WeightProfile& weights, const ActionChunk& prior,
                        const ActionChunk& state);

// Per-token flow time: omega + (1 - omega) * t, with exact endpoints for
// omega in {0, 1}.
std::vector<double> blend_time(const WeightProfile& weights, double t);

const char* window_rule_name(const WindowRule& rule);
const char* schedule_name(Schedule schedule);

}  // namespace softrtc
