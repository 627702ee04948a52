#include "softrtc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "softrtc/executor.hpp"
#include "softrtc/serialize.hpp"

namespace softrtc {

const char* bench_method_name(BenchMethod method) {
  switch (method) {
    case BenchMethod::Naive:
      return "naive";
    case BenchMethod::Hard:
      return "hard";
    case BenchMethod::Soft:
      return "soft";
  }
  return "unknown";
}

namespace {

struct BenchSetup {
  Vec obs;
  PriorChunk prior;
  WindowRule rule = DelayScaled{2, 5};
  Schedule schedule = Schedule::Linear;
  int delay = 0;
  bool use_prior = false;
};

BenchSetup make_setup(BenchMethod method, const ModelParams& params, int delay) {
  const auto& cfg = params.config;
  Rng rng(7);
  BenchSetup setup;
  setup.obs.resize(cfg.obs_dim);
  for (double& v : setup.obs) v = rng.normal();
  setup.prior = PriorChunk::all_valid(rng.normal_mat(cfg.horizon, cfg.action_dim));
  switch (method) {
    case BenchMethod::Naive:
      setup.delay = 0;
      setup.use_prior = false;
      break;
    case BenchMethod::Hard:
      setup.delay = delay;
      setup.use_prior = true;
      setup.schedule = Schedule::Zeros;
      break;
    case BenchMethod::Soft:
      setup.delay = delay;
      setup.use_prior = true;
      setup.schedule = Schedule::Linear;
      break;
  }
  return setup;
}

double run_once(const BenchSetup& setup, const ModelParams& params, const SolverConfig& solver,
                int batch, long* evals) {
  // Fresh identical stream per call keeps every measured call the same work.
  Rng rng(11);
  double sink = 0.0;
  for (int b = 0; b < batch; ++b) {
    ActionChunk chunk =
        generate_chunk(params, setup.obs, setup.use_prior ? &setup.prior : nullptr, setup.delay,
                       setup.rule, setup.schedule, solver, rng, evals);
    sink += chunk.data[0];
  }
  return sink;
}

}  // namespace

BenchResult time_generation(BenchMethod method, const ModelParams& params, int batch, int warmup,
                            int iters, int delay, const SolverConfig& solver) {
  require(warmup >= 1, "time_generation: warmup must be >= 1");
  require(iters >= 10, "time_generation: iters must be >= 10");
  require(batch >= 1, "time_generation: batch must be >= 1");

  BenchSetup setup = make_setup(method, params, delay);

  BenchResult result;
  result.method = bench_method_name(method);
  result.batch = batch;
  result.warmup = warmup;
  result.iters = iters;

  long evals = 0;
  double sink = 0.0;
  for (int i = 0; i < warmup; ++i) sink += run_once(setup, params, solver, batch, &evals);
  result.model_evals_per_chunk = evals / (static_cast<long>(warmup) * batch);

  // Raise inner repetitions until one measured sample comfortably exceeds
  // the steady_clock resolution.
  using clock = std::chrono::steady_clock;
  int reps = 1;
  for (;;) {
    auto t0 = clock::now();
    for (int r = 0; r < reps; ++r) sink += run_once(setup, params, solver, batch, nullptr);
    auto t1 = clock::now();
    if (std::chrono::duration<double>(t1 - t0).count() >= 50e-6 || reps >= 1 << 20) break;
    reps *= 2;
  }
  result.inner_reps = reps;

  std::vector<double> samples(iters);
  for (int i = 0; i < iters; ++i) {
    auto t0 = clock::now();
    for (int r = 0; r < reps; ++r) sink += run_once(setup, params, solver, batch, nullptr);
    auto t1 = clock::now();
    samples[i] = std::chrono::duration<double>(t1 - t0).count() / reps;
  }
  volatile double guard = sink;  // keep the generation loops observable
  (void)guard;

  std::sort(samples.begin(), samples.end());
  double total = 0.0;
  for (double s : samples) total += s;
  result.mean_s = total / iters;
  result.median_s = samples[iters / 2];
  result.p95_s = samples[static_cast<size_t>(0.95 * (iters - 1))];
  return result;
}

std::vector<BenchResult> bench_compare(const ModelParams& params,
                                       const std::vector<int>& batch_sizes, int warmup, int iters,
                                       int delay, const SolverConfig& solver) {
  std::vector<BenchResult> results;
  for (int batch : batch_sizes) {
    BenchResult naive = time_generation(BenchMethod::Naive, params, batch, warmup, iters, delay,
                                        solver);
    naive.ratio_vs_naive = 1.0;
    results.push_back(naive);
    for (BenchMethod m : {BenchMethod::Hard, BenchMethod::Soft}) {
      BenchResult r = time_generation(m, params, batch, warmup, iters, delay, solver);
      r.ratio_vs_naive = r.median_s / naive.median_s;
      results.push_back(r);
    }
  }
  return results;
}

std::string bench_report(const std::vector<BenchResult>& results) {
  std::ostringstream out;
  out << "# softrtc-bench v1\n";
  out << "method,batch,warmup,iters,inner_reps,mean_s,median_s,p95_s,ratio_vs_naive,"
         "model_evals_per_chunk\n";
  for (const BenchResult& r : results) {
    out << r.method << ',' << r.batch << ',' << r.warmup << ',' << r.iters << ',' << r.inner_reps
        << ',' << format_double(r.mean_s) << ',' << format_double(r.median_s) << ','
        << format_double(r.p95_s) << ',' << format_double(r.ratio_vs_naive) << ','
        << r.model_evals_per_chunk << "\n";
  }
  return out.str();
}

}  // namespace softrtc
