#include "softrtc/weights.hpp"

#include <algorithm>

namespace softrtc {

double schedule_value(Schedule schedule, double u) {
  switch (schedule) {
    case Schedule::Linear:
      return 1.0 - u;
    case Schedule::Zeros:
      return 0.0;
    case Schedule::ShiftedLinear:
      return 1.0 - u;
  }
  throw std::invalid_argument("unknown schedule");
}

namespace {

void check_rule(const WindowRule& rule, int horizon) {
  if (const auto* ds = std::get_if<DelayScaled>(&rule)) {
    require(ds->multiplier >= 1, "DelayScaled: multiplier must be >= 1");
    require(ds->h_max >= 0, "DelayScaled: h_max must be >= 0");
  } else if (const auto* fw = std::get_if<FixedWindow>(&rule)) {
    require(fw->length >= 0, "FixedWindow: length must be >= 0");
  } else if (const auto* ow = std::get_if<OffsetWindow>(&rule)) {
    require(ow->length >= 0, "OffsetWindow: length must be >= 0");
    require(ow->cap <= horizon, "OffsetWindow: cap must be <= horizon");
  }
}

}  // namespace

int endpoint(const WindowRule& rule, int delay, int horizon) {
  require(horizon >= 1, "endpoint: horizon must be >= 1");
  require(delay >= 0, "endpoint: delay must be >= 0");
  require(delay <= horizon, "endpoint: delay must be <= horizon");
  check_rule(rule, horizon);
  if (delay == 0) return 0;

  int raw = 0;
  if (const auto* ds = std::get_if<DelayScaled>(&rule)) {
    // Integer multiplier and delay, so ceil(lambda * d) is exact.
    raw = std::min(ds->multiplier * delay, ds->h_max);
  } else if (const auto* fw = std::get_if<FixedWindow>(&rule)) {
    raw = std::min(std::max(delay, fw->length), horizon);
  } else {
    const auto& ow = std::get<OffsetWindow>(rule);
    raw = std::min(delay + ow.length, ow.cap);
  }
  // e >= d keeps the window from ending inside the committed prefix.
  return std::clamp(raw, delay, horizon);
}

WeightProfile token_weights(const WindowRule& rule, Schedule schedule, int delay, int horizon) {
  int e = endpoint(rule, delay, horizon);
  WeightProfile profile;
  profile.delay = delay;
  profile.endpoint = e;
  profile.omega.assign(horizon, 0.0);
  for (int j = 0; j < horizon; ++j) {
    if (j < delay) {
      profile.omega[j] = 1.0;
    } else if (j < e) {
      double u = (schedule == Schedule::ShiftedLinear)
                     ? static_cast<double>(j - delay + 1) / (e - delay + 1)
                     : static_cast<double>(j - delay) / (e - delay);
      profile.omega[j] = schedule_value(schedule, u);
    }
  }
  return profile;
}

ActionChunk blend_state(const WeightProfile& weights, const ActionChunk& prior,
                        const ActionChunk& state) {
  require(prior.same_shape(state), "blend_state: prior/state shape mismatch");
  require(weights.horizon() == state.rows, "blend_state: weight length != chunk horizon");
  ActionChunk out(state.rows, state.cols);
  for (int j = 0; j < state.rows; ++j) {
    double w = weights.omega[j];
    if (w == 0.0) {
      std::copy(state.row(j), state.row(j) + state.cols, out.row(j));
    } else if (w == 1.0) {
      std::copy(prior.row(j), prior.row(j) + prior.cols, out.row(j));
    } else {
      for (int a = 0; a < state.cols; ++a) out(j, a) = w * prior(j, a) + (1.0 - w) * state(j, a);
    }
  }
  return out;
}

std::vector<double> blend_time(const WeightProfile& weights, double t) {
  require(t >= 0.0 && t <= 1.0, "blend_time: t outside [0, 1]");
  std::vector<double> out(weights.omega.size());
  for (size_t j = 0; j < out.size(); ++j) {
    double w = weights.omega[j];
    if (w == 0.0)
      out[j] = t;
    else if (w == 1.0)
      out[j] = 1.0;
    else
      out[j] = w + (1.0 - w) * t;
  }
  return out;
}

const char* window_rule_name(const WindowRule& rule) {
  if (std::holds_alternative<DelayScaled>(rule)) return "delay_scaled";
  if (std::holds_alternative<FixedWindow>(rule)) return "fixed";
  return "offset";
}

const char* schedule_name(Schedule schedule) {
  switch (schedule) {
    case Schedule::Linear:
      return "linear";
    case Schedule::Zeros:
      return "zeros";
    case Schedule::ShiftedLinear:
      return "shifted_linear";
  }
  return "unknown";
}

}  // namespace softrtc
