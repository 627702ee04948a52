#pragma once

#include <string>
#include <vector>

#include "softrtc/infer.hpp"

namespace softrtc {

struct BenchResult {
  std::string method;
  int batch = 1;
  int warmup = 0;
  int iters = 0;
  int inner_reps = 1;         // auto-raised when a single call is below timer resolution
  double mean_s = 0.0;        // per-call latency statistics, seconds
  double median_s = 0.0;
  double p95_s = 0.0;
  double ratio_vs_naive = 1.0;
  long model_evals_per_chunk = 0;
};

// Chunk-generation methods under test. All run the same solver; they differ
// only in the weight profile and prior handling.
enum class BenchMethod { Naive, Hard, Soft };
const char* bench_method_name(BenchMethod method);

// Times steady-state chunk generation on fixed inputs: `warmup` unmeasured
// calls, then `iters` measured calls of `batch` independent generations each.
BenchResult time_generation(BenchMethod method, const ModelParams& params, int batch, int warmup,
                            int iters, int delay = 2, const SolverConfig& solver = {});

// Runs naive/hard/soft at each batch size and fills in ratios against naive.
std::vector<BenchResult> bench_compare(const ModelParams& params,
                                       const std::vector<int>& batch_sizes, int warmup,
                                       int iters, int delay = 2,
                                       const SolverConfig& solver = {});

std::string bench_report(const std::vector<BenchResult>& results);

}  // namespace softrtc
