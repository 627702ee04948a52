#include "softrtc/fm_train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace softrtc {

void TrainConfig::validate(int horizon) const {
  require(epochs >= 0, "TrainConfig: epochs must be >= 0");
  require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  require(lr > 0.0, "TrainConfig: lr must be > 0");
  require(eps_denom > 0.0, "TrainConfig: eps_denom must be > 0");
  require(d_max >= 0 && d_max <= horizon, "TrainConfig: d_max must be in [0, horizon]");
}

CorruptedChunk corrupt(const ActionChunk& target, const ActionChunk& noise, double tau,
                       const WeightProfile& weights) {
  require(target.same_shape(noise), "corrupt: target/noise shape mismatch");
  require(weights.horizon() == target.rows, "corrupt: weight length != chunk horizon");
  require(tau >= 0.0 && tau <= 1.0, "corrupt: tau outside [0, 1]");

  CorruptedChunk c;
  c.noise = noise;
  c.tau = tau;
  c.tau_per_token.resize(target.rows);
  c.x = ActionChunk(target.rows, target.cols);
  for (int j = 0; j < target.rows; ++j) {
    double w = weights.omega[j];
    if (w == 1.0) {
      // Fully clamped: the token is the target action, independent of noise and tau.
      c.tau_per_token[j] = 1.0;
      std::copy(target.row(j), target.row(j) + target.cols, c.x.row(j));
    } else {
      double tw = (w == 0.0) ? tau : w + (1.0 - w) * tau;
      c.tau_per_token[j] = tw;
      for (int a = 0; a < target.cols; ++a)
        c.x(j, a) = tw * target(j, a) + (1.0 - tw) * noise(j, a);
    }
  }
  return c;
}

LossGrad loss_and_grads(const ModelParams& params, const std::vector<TrainSample>& batch,
                        const WindowRule& rule, Schedule schedule, double eps_denom, Rng& rng) {
  require(!batch.empty(), "loss_and_grads: empty batch");
  const auto& cfg = params.config;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  LossGrad result;
  result.grads.assign(params.flat.size(), 0.0);

  for (const TrainSample& sample : batch) {
    require(sample.target.rows == cfg.horizon && sample.target.cols == cfg.action_dim,
            "loss_and_grads: target shape mismatch");
    ActionChunk noise = rng.normal_mat(cfg.horizon, cfg.action_dim);
    double tau = rng.uniform();

    WeightProfile weights = token_weights(rule, schedule, sample.delay, cfg.horizon);
    CorruptedChunk corrupted = corrupt(sample.target, noise, tau, weights);

    ForwardTrace trace;
    ActionChunk v = forward(params, sample.obs, corrupted.x, corrupted.tau_per_token, &trace);

    double weight_sum = 0.0;
    for (int j = 0; j < cfg.horizon; ++j) weight_sum += 1.0 - weights.omega[j];
    const double denom = weight_sum + eps_denom;

    double numer = 0.0;
    ActionChunk upstream(cfg.horizon, cfg.action_dim);
    for (int j = 0; j < cfg.horizon; ++j) {
      double lw = 1.0 - weights.omega[j];
      for (int a = 0; a < cfg.action_dim; ++a) {
        double r = v(j, a) - (sample.target(j, a) - noise(j, a));
        numer += lw * r * r;
        upstream(j, a) = 2.0 * lw * r / denom * inv_batch;
      }
    }
    result.loss += numer / denom * inv_batch;

    Gradients g = backward(params, sample.obs, corrupted.x, corrupted.tau_per_token, upstream,
                           &trace);
    for (size_t i = 0; i < result.grads.size(); ++i) result.grads[i] += g.params[i];
  }

  if (!std::isfinite(result.loss)) throw DivergenceError("loss_and_grads: non-finite loss");
  return result;
}

TrainResult train(const std::vector<std::pair<Vec, ActionChunk>>& dataset,
                  const TrainConfig& config, const ModelParams& init) {
  require(!dataset.empty(), "train: empty dataset");
  config.validate(init.config.horizon);

  TrainResult result;
  result.params = init;
  if (config.epochs == 0) return result;

  OptimizerState opt = OptimizerState::init(init.flat.size(), config.lr);
  const size_t n = dataset.size();
  long step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng(derive_seed(config.seed, {0x65706f63ULL, static_cast<uint64_t>(epoch)}));

    // Fisher-Yates shuffle, then per-example delay draws, then batch rng.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = n - 1; i > 0; --i) {
      size_t k = static_cast<size_t>(epoch_rng.uniform_int(0, static_cast<int>(i)));
      std::swap(order[i], order[k]);
    }
    std::vector<int> delays(n);
    for (size_t i = 0; i < n; ++i) delays[i] = epoch_rng.uniform_int(0, config.d_max);

    for (size_t start = 0; start < n; start += config.batch_size) {
      size_t stop = std::min(n, start + config.batch_size);
      std::vector<TrainSample> batch;
      batch.reserve(stop - start);
      for (size_t i = start; i < stop; ++i) {
        const auto& [obs, target] = dataset[order[i]];
        batch.push_back(TrainSample{obs, target, delays[i]});
      }
      LossGrad lg = loss_and_grads(result.params, batch, config.rule, config.schedule,
                                   config.eps_denom, epoch_rng);
      adam_step(result.params, lg.grads, opt);
      result.loss_curve.emplace_back(step, lg.loss);
      ++step;
    }
  }
  return result;
}

}  // namespace softrtc
