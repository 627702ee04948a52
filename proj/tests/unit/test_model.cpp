#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "softrtc/model.hpp"

using namespace softrtc;

namespace {

ModelConfig tiny_config(uint64_t seed = 0) {
  ModelConfig cfg;
  cfg.obs_dim = 4;
  cfg.horizon = 3;
  cfg.action_dim = 1;
  cfg.hidden = {8};
  cfg.seed = seed;
  return cfg;
}

struct Inputs {
  Vec obs;
  ActionChunk x;
  std::vector<double> t;
  ActionChunk upstream;
};

Inputs random_inputs(const ModelConfig& cfg, Rng& rng) {
  Inputs in;
  in.obs.resize(cfg.obs_dim);
  for (double& v : in.obs) v = rng.normal();
  in.x = rng.normal_mat(cfg.horizon, cfg.action_dim);
  in.t.resize(cfg.horizon);
  for (double& v : in.t) v = rng.uniform();
  in.upstream = rng.normal_mat(cfg.horizon, cfg.action_dim);
  return in;
}

double dot_forward(const ModelParams& params, const Inputs& in) {
  ActionChunk y = forward(params, in.obs, in.x, in.t);
  double acc = 0.0;
  for (size_t i = 0; i < y.data.size(); ++i) acc += y.data[i] * in.upstream.data[i];
  return acc;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("init is deterministic and seed sensitive") {
  ModelParams a = init_model(tiny_config(0));
  ModelParams b = init_model(tiny_config(0));
  ModelParams c = init_model(tiny_config(1));
  CHECK(a.flat == b.flat);
  CHECK(a.flat != c.flat);
}

TEST_CASE("parameter count matches layer shapes") {
  ModelConfig cfg;
  cfg.obs_dim = 6;
  cfg.horizon = 8;
  cfg.action_dim = 2;
  cfg.hidden = {32, 32};
  ModelParams params = init_model(cfg);
  // input 6 + 16 + 8 = 30, layers 30->32->32->16
  size_t expected = (30 * 32 + 32) + (32 * 32 + 32) + (32 * 16 + 16);
  CHECK(params.param_count() == expected);
  CHECK(params.layer_sizes() == std::vector<int>{30, 32, 32, 16});
}

TEST_CASE("zero params give zero output") {
  ModelParams params = init_model(tiny_config());
  std::fill(params.flat.begin(), params.flat.end(), 0.0);
  Rng rng(3);
  Inputs in = random_inputs(params.config, rng);
  ActionChunk y = forward(params, in.obs, in.x, in.t);
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("forward is deterministic and pure") {
  ModelParams params = init_model(tiny_config(5));
  std::vector<double> before = params.flat;
  Rng rng(4);
  Inputs in = random_inputs(params.config, rng);
  ActionChunk y1 = forward(params, in.obs, in.x, in.t);
  ActionChunk y2 = forward(params, in.obs, in.x, in.t);
  CHECK(y1 == y2);
  CHECK(params.flat == before);
}

TEST_CASE("forward rejects bad inputs") {
  ModelParams params = init_model(tiny_config());
  Rng rng(5);
  Inputs in = random_inputs(params.config, rng);
  Vec short_obs(params.config.obs_dim - 1, 0.0);
  CHECK_THROWS_AS(forward(params, short_obs, in.x, in.t), std::invalid_argument);
  Inputs bad = in;
  bad.x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(forward(params, bad.obs, bad.x, bad.t), std::invalid_argument);
}

TEST_CASE("output is sensitive to each token's flow time") {
  ModelParams params = init_model(tiny_config(7));
  Rng rng(6);
  Inputs in = random_inputs(params.config, rng);
  for (double& v : in.t) v = 0.5;
  for (int j = 0; j < params.config.horizon; ++j) {
    auto bumped = in.t;
    bumped[j] += 1e-4;
    ActionChunk base = forward(params, in.obs, in.x, in.t);
    ActionChunk moved = forward(params, in.obs, in.x, bumped);
    double diff = 0.0;
    for (size_t i = 0; i < base.data.size(); ++i) diff += std::abs(moved.data[i] - base.data[i]);
    CHECK(diff > 0.0);
  }
}

TEST_CASE("zero upstream gives zero gradients") {
  ModelParams params = init_model(tiny_config(8));
  Rng rng(7);
  Inputs in = random_inputs(params.config, rng);
  in.upstream = ActionChunk(params.config.horizon, params.config.action_dim, 0.0);
  Gradients g = backward(params, in.obs, in.x, in.t, in.upstream);
  for (double v : g.params) CHECK(v == 0.0);
  for (double v : g.state.data) CHECK(v == 0.0);
}

TEST_CASE("parameter gradients match central finite differences") {
  ModelParams params = init_model(tiny_config(9));
  Rng rng(8);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    Inputs in = random_inputs(params.config, rng);
    Gradients g = backward(params, in.obs, in.x, in.t, in.upstream);
    // Every 7th parameter keeps the check fast while covering all layers.
    for (size_t i = 0; i < params.flat.size(); i += 7) {
      ModelParams plus = params, minus = params;
      plus.flat[i] += h;
      minus.flat[i] -= h;
      double fd = (dot_forward(plus, in) - dot_forward(minus, in)) / (2 * h);
      CHECK(rel_err(g.params[i], fd) < 1e-4);
    }
  }
}

TEST_CASE("state gradients match central finite differences") {
  ModelParams params = init_model(tiny_config(10));
  Rng rng(9);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    Inputs in = random_inputs(params.config, rng);
    Gradients g = backward(params, in.obs, in.x, in.t, in.upstream);
    for (size_t i = 0; i < in.x.data.size(); ++i) {
      Inputs plus = in, minus = in;
      plus.x.data[i] += h;
      minus.x.data[i] -= h;
      double fd = (dot_forward(params, plus) - dot_forward(params, minus)) / (2 * h);
      CHECK(rel_err(g.state.data[i], fd) < 1e-4);
    }
  }
}

TEST_CASE("flat parameter layout round-trips through layer offsets") {
  ModelParams params = init_model(tiny_config(11));
  auto sizes = params.layer_sizes();
  size_t total = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    CHECK(params.weight_offset(static_cast<int>(l)) == total);
    total += static_cast<size_t>(sizes[l + 1]) * sizes[l];
    CHECK(params.bias_offset(static_cast<int>(l)) == total);
    total += sizes[l + 1];
  }
  CHECK(total == params.param_count());
}

TEST_CASE("adam: zero grads leave params unchanged") {
  ModelParams params = init_model(tiny_config(12));
  std::vector<double> before = params.flat;
  OptimizerState opt = OptimizerState::init(params.flat.size(), 1e-3);
  adam_step(params, std::vector<double>(params.flat.size(), 0.0), opt);
  CHECK(params.flat == before);
  CHECK(opt.step == 1);
}

TEST_CASE("adam: first step moves each param by about lr in the sign direction") {
  ModelConfig cfg = tiny_config(13);
  ModelParams params = init_model(cfg);
  params.flat.assign(params.flat.size(), 0.0);
  std::vector<double> grads(params.flat.size(), 0.0);
  grads[0] = 0.5;
  grads[1] = -2.0;
  OptimizerState opt = OptimizerState::init(params.flat.size(), 1e-3);
  adam_step(params, grads, opt);
  // Bias-corrected moments give m_hat = g, v_hat = g^2, so the step is
  // -lr * g / (|g| + eps) ~= -lr * sign(g).
  CHECK(params.flat[0] == doctest::Approx(-1e-3).epsilon(1e-4));
  CHECK(params.flat[1] == doctest::Approx(1e-3).epsilon(1e-4));
  CHECK(params.flat[2] == 0.0);
}

TEST_CASE("adam is deterministic across runs") {
  auto run = [] {
    ModelParams params = init_model(tiny_config(14));
    OptimizerState opt = OptimizerState::init(params.flat.size(), 1e-2);
    Rng rng(15);
    for (int i = 0; i < 5; ++i) {
      std::vector<double> grads(params.flat.size());
      for (double& g : grads) g = rng.normal();
      adam_step(params, grads, opt);
    }
    return params.flat;
  };
  CHECK(run() == run());
}

TEST_CASE("adam rejects non-finite grads") {
  ModelParams params = init_model(tiny_config(16));
  OptimizerState opt = OptimizerState::init(params.flat.size(), 1e-3);
  std::vector<double> grads(params.flat.size(), 0.0);
  grads[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(adam_step(params, grads, opt), DivergenceError);
}

}  // TEST_SUITE
