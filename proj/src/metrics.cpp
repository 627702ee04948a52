#include "softrtc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "softrtc/executor.hpp"
#include "softrtc/rng.hpp"

namespace softrtc {

namespace {

double l2_diff(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// Linear-interpolation quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  double pos = q * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double action_delta(const std::vector<Vec>& actions) {
  require(actions.size() >= 2, "action_delta: need at least 2 actions");
  double acc = 0.0;
  for (size_t t = 0; t + 1 < actions.size(); ++t) acc += l2_diff(actions[t + 1], actions[t]);
  return acc / static_cast<double>(actions.size() - 1);
}

double action_jerk(const std::vector<Vec>& actions) {
  require(actions.size() >= 3, "action_jerk: need at least 3 actions");
  double acc = 0.0;
  for (size_t t = 0; t + 2 < actions.size(); ++t) {
    double norm = 0.0;
    for (size_t i = 0; i < actions[t].size(); ++i) {
      double d = actions[t + 2][i] - 2.0 * actions[t + 1][i] + actions[t][i];
      norm += d * d;
    }
    acc += std::sqrt(norm);
  }
  return acc / static_cast<double>(actions.size() - 2);
}

double boundary_jump(const RolloutLog& log) {
  require(!log.boundaries.empty(), "boundary_jump: no chunk boundaries");
  double acc = 0.0;
  for (int b : log.boundaries) {
    require(b >= 1 && b < log.length(), "boundary_jump: boundary out of range");
    acc += l2_diff(log.actions[b], log.actions[b - 1]);
  }
  return acc / static_cast<double>(log.boundaries.size());
}

BootstrapCI bootstrap_ci(const std::vector<double>& values, double level, int resamples,
                         uint64_t seed) {
  require(values.size() >= 2, "bootstrap_ci: need at least 2 values");
  require(level > 0.0 && level < 1.0, "bootstrap_ci: level must be in (0, 1)");
  require(resamples >= 1, "bootstrap_ci: resamples must be >= 1");

  const size_t n = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);

  Rng rng(seed);
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += values[rng.uniform_int(0, static_cast<int>(n) - 1)];
    means[r] = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());

  BootstrapCI ci;
  ci.point = mean;
  ci.level = level;
  ci.resamples = resamples;
  double alpha = 1.0 - level;
  ci.lower = quantile_sorted(means, alpha / 2.0);
  ci.upper = quantile_sorted(means, 1.0 - alpha / 2.0);
  return ci;
}

}  // namespace softrtc
