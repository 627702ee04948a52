#include <doctest.h>

#include <cmath>

#include "softrtc/infer.hpp"

using namespace softrtc;

namespace {

ModelConfig small_config(uint64_t seed, int horizon = 4) {
  ModelConfig cfg;
  cfg.obs_dim = 3;
  cfg.horizon = horizon;
  cfg.action_dim = 2;
  cfg.hidden = {16};
  cfg.seed = seed;
  return cfg;
}

// Plain Euler flow sampling with no conditioning, written directly.
ActionChunk reference_plain_euler(const ModelParams& params, const Vec& obs, int flow_steps,
                                  Rng& rng) {
  const auto& cfg = params.config;
  ActionChunk x = rng.normal_mat(cfg.horizon, cfg.action_dim);
  for (int k = 0; k < flow_steps; ++k) {
    std::vector<double> times(cfg.horizon, static_cast<double>(k) / flow_steps);
    ActionChunk v = forward(params, obs, x, times);
    for (size_t i = 0; i < x.data.size(); ++i) x.data[i] = x.data[i] + v.data[i] / flow_steps;
  }
  return x;
}

// Hard conditioning via explicit index tests rather than weight profiles.
ActionChunk reference_binary_mask_euler(const ModelParams& params, const Vec& obs,
                                        const ActionChunk& prior, int delay, int flow_steps,
                                        Rng& rng) {
  const auto& cfg = params.config;
  ActionChunk x = rng.normal_mat(cfg.horizon, cfg.action_dim);
  for (int k = 0; k < flow_steps; ++k) {
    ActionChunk blended(cfg.horizon, cfg.action_dim);
    std::vector<double> times(cfg.horizon);
    for (int j = 0; j < cfg.horizon; ++j) {
      bool clamped = j < delay;
      times[j] = clamped ? 1.0 : static_cast<double>(k) / flow_steps;
      for (int a = 0; a < cfg.action_dim; ++a) blended(j, a) = clamped ? prior(j, a) : x(j, a);
    }
    ActionChunk v = forward(params, obs, blended, times);
    for (size_t i = 0; i < x.data.size(); ++i) x.data[i] = blended.data[i] + v.data[i] / flow_steps;
  }
  return x;
}

}  // namespace

TEST_SUITE("infer") {

TEST_CASE("zero delay with no prior equals plain Euler sampling bit for bit") {
  ModelParams params = init_model(small_config(50));
  Vec obs{0.2, -0.4, 1.1};
  SolverConfig solver;
  solver.flow_steps = 5;

  Rng rng_a(51), rng_b(51);
  ActionChunk ours =
      generate_chunk(params, obs, nullptr, 0, DelayScaled{2, 5}, Schedule::Linear, solver, rng_a);
  ActionChunk ref = reference_plain_euler(params, obs, solver.flow_steps, rng_b);
  CHECK(ours == ref);
}

TEST_CASE("zero delay with a prior still equals plain Euler bit for bit") {
  ModelParams params = init_model(small_config(52));
  Vec obs{0.0, 0.5, -0.3};
  Rng prior_rng(53);
  PriorChunk prior = PriorChunk::all_valid(prior_rng.normal_mat(4, 2));
  SolverConfig solver;

  Rng rng_a(54), rng_b(54);
  ActionChunk ours =
      generate_chunk(params, obs, &prior, 0, DelayScaled{2, 5}, Schedule::Linear, solver, rng_a);
  ActionChunk ref = reference_plain_euler(params, obs, solver.flow_steps, rng_b);
  CHECK(ours == ref);
}

TEST_CASE("zeros schedule equals the binary-mask sampler bit for bit") {
  ModelParams params = init_model(small_config(55));
  Vec obs{1.0, 0.1, 0.6};
  Rng prior_rng(56);
  PriorChunk prior = PriorChunk::all_valid(prior_rng.normal_mat(4, 2));
  SolverConfig solver;

  for (int d = 1; d <= 4; ++d) {
    Rng rng_a(100 + d), rng_b(100 + d), rng_c(100 + d);
    ActionChunk zeros = generate_chunk(params, obs, &prior, d, DelayScaled{2, 5}, Schedule::Zeros,
                                       solver, rng_a);
    ActionChunk offset0 = generate_chunk(params, obs, &prior, d, OffsetWindow{0, 4},
                                         Schedule::Linear, solver, rng_b);
    ActionChunk ref =
        reference_binary_mask_euler(params, obs, prior.values, d, solver.flow_steps, rng_c);
    CHECK(zeros == ref);
    CHECK(offset0 == ref);
  }
}

TEST_CASE("two hand-unrolled Euler steps on a hand-set single-layer model") {
  // Model: horizon 3, action dim 1, hidden [2], tanh, all parameters set by
  // hand. The oracle below repeats Algorithm steps with scalar arithmetic.
  ModelConfig cfg;
  cfg.obs_dim = 1;
  cfg.horizon = 3;
  cfg.action_dim = 1;
  cfg.hidden = {2};
  cfg.seed = 0;
  ModelParams params = init_model(cfg);

  // Layer 0: 2 x 7 weights + 2 biases; layer 1: 3 x 2 weights + 3 biases.
  std::vector<double> w0 = {0.1, -0.2, 0.3,  0.05, -0.1, 0.2, 0.4,
                            0.0, 0.25, -0.3, 0.15, 0.1,  0.0, -0.2};
  std::vector<double> b0 = {0.01, -0.02};
  std::vector<double> w1 = {0.5, -0.4, 0.3, 0.2, -0.1, 0.6};
  std::vector<double> b1 = {0.05, 0.0, -0.05};
  std::copy(w0.begin(), w0.end(), params.flat.begin());
  std::copy(b0.begin(), b0.end(), params.flat.begin() + 14);
  std::copy(w1.begin(), w1.end(), params.flat.begin() + 16);
  std::copy(b1.begin(), b1.end(), params.flat.begin() + 22);

  Vec obs{0.7};
  Rng prior_rng(57);
  PriorChunk prior = PriorChunk::all_valid(prior_rng.normal_mat(3, 1));
  SolverConfig solver;
  solver.flow_steps = 2;
  const int delay = 1;
  const WindowRule rule = FixedWindow{3};

  Rng rng(58);
  ActionChunk out =
      generate_chunk(params, obs, &prior, delay, rule, Schedule::Linear, solver, rng);

  // Oracle: replay the exact draws, then unroll both steps by hand.
  // d=1, fixed h=3: e=3, so token 0 is committed, token 1 gets g(0)=1 and
  // token 2 gets g(1/2)=0.5.
  Rng rng_ref(58);
  double x[3];
  for (int j = 0; j < 3; ++j) x[j] = rng_ref.normal();
  const double omega[3] = {1.0, 1.0, 0.5};

  auto model_eval = [&](const double xin[3], const double tin[3], double vout[3]) {
    double u[7] = {obs[0], xin[0], xin[1], xin[2], tin[0], tin[1], tin[2]};
    double h[2];
    for (int i = 0; i < 2; ++i) {
      double acc = b0[i];
      for (int j = 0; j < 7; ++j) acc += w0[i * 7 + j] * u[j];
      h[i] = std::tanh(acc);
    }
    for (int o = 0; o < 3; ++o) vout[o] = b1[o] + w1[o * 2] * h[0] + w1[o * 2 + 1] * h[1];
  };

  for (int k = 0; k < 2; ++k) {
    double t = k / 2.0;
    double xb[3], tb[3], v[3];
    for (int j = 0; j < 3; ++j) {
      xb[j] = omega[j] * prior.values(j, 0) + (1.0 - omega[j]) * x[j];
      tb[j] = omega[j] + (1.0 - omega[j]) * t;
    }
    model_eval(xb, tb, v);
    for (int j = 0; j < 3; ++j) x[j] = xb[j] + v[j] / 2.0;
  }

  for (int j = 0; j < 3; ++j) CHECK(std::abs(out(j, 0) - x[j]) < 1e-12);
}

TEST_CASE("missing prior with nonzero weights is an error") {
  ModelParams params = init_model(small_config(59));
  Vec obs{0, 0, 0};
  SolverConfig solver;
  Rng rng(60);
  CHECK_THROWS_AS(
      generate_chunk(params, obs, nullptr, 2, DelayScaled{2, 5}, Schedule::Linear, solver, rng),
      std::invalid_argument);
}

TEST_CASE("weights on invalid prior tokens are clamped to zero") {
  ModelParams params = init_model(small_config(61));
  Vec obs{0.1, 0.2, 0.3};
  Rng prior_rng(62);
  PriorChunk prior = PriorChunk::all_valid(prior_rng.normal_mat(4, 2));
  prior.valid = {1, 1, 0, 0};  // overlap shorter than the soft window
  SolverConfig solver;

  Rng rng(63);
  SolverTrace trace =
      solver_trace(params, obs, &prior, 2, DelayScaled{2, 8}, Schedule::Linear, solver, rng);
  // Raw weights at d=2 with e=4 would be [1, 1, 1, 0.5]; tokens 2, 3 are invalid.
  CHECK(trace.weights.omega == std::vector<double>{1, 1, 0, 0});
}

TEST_CASE("determinism: same inputs and seed give the same chunk") {
  ModelParams params = init_model(small_config(64));
  Vec obs{0.4, -0.2, 0.9};
  Rng prior_rng(65);
  PriorChunk prior = PriorChunk::all_valid(prior_rng.normal_mat(4, 2));
  SolverConfig solver;

  Rng rng_a(66), rng_b(66);
  ActionChunk a =
      generate_chunk(params, obs, &prior, 2, DelayScaled{2, 5}, Schedule::Linear, solver, rng_a);
  ActionChunk b =
      generate_chunk(params, obs, &prior, 2, DelayScaled{2, 5}, Schedule::Linear, solver, rng_b);
  CHECK(a == b);
}

TEST_CASE("trace records T steps with exact clamp identities") {
  ModelParams params = init_model(small_config(67));
  Vec obs{0.2, 0.2, -0.1};
  Rng prior_rng(68);
  PriorChunk prior = PriorChunk::all_valid(prior_rng.normal_mat(4, 2));
  SolverConfig solver;
  solver.flow_steps = 5;

  Rng rng(69);
  SolverTrace trace =
      solver_trace(params, obs, &prior, 2, DelayScaled{2, 5}, Schedule::Linear, solver, rng);
  CHECK(trace.steps.size() == 5);

  for (int k = 0; k < 5; ++k) {
    const SolverStep& step = trace.steps[k];
    for (int j = 0; j < 4; ++j) {
      if (trace.weights.omega[j] == 1.0) {
        for (int a = 0; a < 2; ++a) CHECK(step.blended_state(j, a) == prior.values(j, a));
        CHECK(step.blended_time[j] == 1.0);
      }
      if (trace.weights.omega[j] == 0.0) {
        for (int a = 0; a < 2; ++a) CHECK(step.blended_state(j, a) == step.state(j, a));
        CHECK(step.blended_time[j] == static_cast<double>(k) / 5);
      }
    }
  }
}

TEST_CASE("trace output matches generate_chunk and counts T model evals") {
  ModelParams params = init_model(small_config(70));
  Vec obs{0.3, 0.3, 0.3};
  Rng prior_rng(71);
  PriorChunk prior = PriorChunk::all_valid(prior_rng.normal_mat(4, 2));
  SolverConfig solver;

  Rng rng_a(72), rng_b(72);
  long evals = 0;
  ActionChunk direct = generate_chunk(params, obs, &prior, 1, DelayScaled{2, 5}, Schedule::Linear,
                                      solver, rng_a, &evals);
  SolverTrace trace =
      solver_trace(params, obs, &prior, 1, DelayScaled{2, 5}, Schedule::Linear, solver, rng_b);
  CHECK(direct == trace.output);
  CHECK(evals == solver.flow_steps);
}

}  // TEST_SUITE
