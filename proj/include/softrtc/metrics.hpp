#pragma once

#include <cstdint>
#include <vector>

#include "softrtc/core.hpp"

namespace softrtc {

struct RolloutLog;

// Mean l2 norm of consecutive action differences. Needs length >= 2.
double action_delta(const std::vector<Vec>& actions);

// Mean l2 norm of second finite differences. Needs length >= 3.
double action_jerk(const std::vector<Vec>& actions);

// Mean l2 action jump across chunk boundaries, where a boundary is the first
// step executing a newly generated chunk. Needs at least one boundary.
double boundary_jump(const RolloutLog& log);

struct BootstrapCI {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  int resamples = 10000;
};

// Percentile bootstrap over per-task means. Deterministic given seed.
BootstrapCI bootstrap_ci(const std::vector<double>& values, double level = 0.95,
                         int resamples = 10000, uint64_t seed = 0);

}  // namespace softrtc
