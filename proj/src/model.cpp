#include "softrtc/model.hpp"

#include <cmath>

namespace softrtc {

void ModelConfig::validate() const {
  require(obs_dim >= 1, "ModelConfig: obs_dim must be >= 1");
  require(horizon >= 1, "ModelConfig: horizon must be >= 1");
  require(action_dim >= 1, "ModelConfig: action_dim must be >= 1");
  require(!hidden.empty(), "ModelConfig: hidden layer list must be nonempty");
  for (int h : hidden) require(h >= 1, "ModelConfig: hidden widths must be >= 1");
}

std::vector<int> ModelParams::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(config.input_dim());
  for (int h : config.hidden) sizes.push_back(h);
  sizes.push_back(config.output_dim());
  return sizes;
}

size_t ModelParams::weight_offset(int layer) const {
  auto sizes = layer_sizes();
  size_t off = 0;
  for (int l = 0; l < layer; ++l)
    off += static_cast<size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  return off;
}

size_t ModelParams::bias_offset(int layer) const {
  auto sizes = layer_sizes();
  return weight_offset(layer) + static_cast<size_t>(sizes[layer + 1]) * sizes[layer];
}

OptimizerState OptimizerState::init(size_t param_count, double lr) {
  OptimizerState s;
  s.m.assign(param_count, 0.0);
  s.v.assign(param_count, 0.0);
  s.lr = lr;
  return s;
}

ModelParams init_model(const ModelConfig& config) {
  config.validate();
  ModelParams params;
  params.config = config;
  auto sizes = [&] {
    std::vector<int> s{config.input_dim()};
    for (int h : config.hidden) s.push_back(h);
    s.push_back(config.output_dim());
    return s;
  }();

  size_t total = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l)
    total += static_cast<size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  params.flat.assign(total, 0.0);

  Rng rng(config.seed);
  size_t off = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    double scale = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    size_t n_w = static_cast<size_t>(sizes[l + 1]) * sizes[l];
    for (size_t i = 0; i < n_w; ++i) params.flat[off + i] = scale * rng.normal();
    off += n_w + sizes[l + 1];  // biases stay zero
  }
  return params;
}

namespace {

void check_inputs(const ModelParams& params, const Vec& obs, const ActionChunk& state,
                  const std::vector<double>& times) {
  const auto& cfg = params.config;
  require(static_cast<int>(obs.size()) == cfg.obs_dim, "forward: obs size mismatch");
  require(state.rows == cfg.horizon && state.cols == cfg.action_dim,
          "forward: chunk state shape mismatch");
  require(static_cast<int>(times.size()) == cfg.horizon, "forward: flow-time length mismatch");
  require(all_finite(obs) && state.all_finite() && all_finite(times),
          "forward: non-finite input");
  for (double t : times) require(t >= 0.0 && t <= 1.0, "forward: flow time outside [0, 1]");
}

std::vector<double> assemble_input(const ModelConfig& cfg, const Vec& obs,
                                   const ActionChunk& state, const std::vector<double>& times) {
  std::vector<double> u;
  u.reserve(cfg.input_dim());
  u.insert(u.end(), obs.begin(), obs.end());
  u.insert(u.end(), state.data.begin(), state.data.end());
  u.insert(u.end(), times.begin(), times.end());
  return u;
}

void run_forward(const ModelParams& params, std::vector<double> input, ForwardTrace& trace) {
  auto sizes = params.layer_sizes();
  int n_layers = static_cast<int>(sizes.size()) - 1;
  trace.activations.clear();
  trace.activations.reserve(n_layers + 1);
  trace.activations.push_back(std::move(input));

  size_t off = 0;
  for (int l = 0; l < n_layers; ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const double* w = params.flat.data() + off;
    const double* b = w + static_cast<size_t>(out) * in;
    const std::vector<double>& a = trace.activations.back();
    std::vector<double> z(out);
    for (int i = 0; i < out; ++i) {
      double acc = b[i];
      const double* wi = w + static_cast<size_t>(i) * in;
      for (int j = 0; j < in; ++j) acc += wi[j] * a[j];
      z[i] = (l < n_layers - 1) ? std::tanh(acc) : acc;
    }
    trace.activations.push_back(std::move(z));
    off += static_cast<size_t>(out) * in + out;
  }
}

}  // namespace

ActionChunk forward(const ModelParams& params, const Vec& obs, const ActionChunk& state,
                    const std::vector<double>& times, ForwardTrace* trace) {
  check_inputs(params, obs, state, times);
  ForwardTrace local;
  ForwardTrace& tr = trace ? *trace : local;
  run_forward(params, assemble_input(params.config, obs, state, times), tr);

  const auto& cfg = params.config;
  ActionChunk out(cfg.horizon, cfg.action_dim);
  out.data = tr.activations.back();
  return out;
}

Gradients backward(const ModelParams& params, const Vec& obs, const ActionChunk& state,
                   const std::vector<double>& times, const ActionChunk& upstream,
                   const ForwardTrace* trace) {
  check_inputs(params, obs, state, times);
  const auto& cfg = params.config;
  require(upstream.rows == cfg.horizon && upstream.cols == cfg.action_dim,
          "backward: upstream shape mismatch");

  ForwardTrace local;
  if (!trace) {
    run_forward(params, assemble_input(cfg, obs, state, times), local);
    trace = &local;
  }

  auto sizes = params.layer_sizes();
  int n_layers = static_cast<int>(sizes.size()) - 1;
  require(static_cast<int>(trace->activations.size()) == n_layers + 1,
          "backward: trace does not match model");

  Gradients g;
  g.params.assign(params.flat.size(), 0.0);
  std::vector<double> delta = upstream.data;

  for (int l = n_layers - 1; l >= 0; --l) {
    const int in = sizes[l], out = sizes[l + 1];
    const size_t w_off = params.weight_offset(l);
    const double* w = params.flat.data() + w_off;
    const std::vector<double>& a = trace->activations[l];

    double* gw = g.params.data() + w_off;
    double* gb = gw + static_cast<size_t>(out) * in;
    for (int i = 0; i < out; ++i) {
      gb[i] = delta[i];
      double* gwi = gw + static_cast<size_t>(i) * in;
      for (int j = 0; j < in; ++j) gwi[j] = delta[i] * a[j];
    }

    std::vector<double> prev(in, 0.0);
    for (int i = 0; i < out; ++i) {
      const double* wi = w + static_cast<size_t>(i) * in;
      for (int j = 0; j < in; ++j) prev[j] += wi[j] * delta[i];
    }
    if (l > 0) {
      // tanh'(z) = 1 - a^2 where a is the stored activation.
      for (int j = 0; j < in; ++j) prev[j] *= 1.0 - a[j] * a[j];
    }
    delta = std::move(prev);
  }

  g.state = ActionChunk(cfg.horizon, cfg.action_dim);
  std::copy(delta.begin() + cfg.obs_dim, delta.begin() + cfg.obs_dim + cfg.output_dim(),
            g.state.data.begin());
  return g;
}

void adam_step(ModelParams& params, const std::vector<double>& grads, OptimizerState& opt) {
  require(grads.size() == params.flat.size(), "adam_step: gradient size mismatch");
  require(opt.m.size() == params.flat.size() && opt.v.size() == params.flat.size(),
          "adam_step: optimizer state size mismatch");
  for (double gv : grads)
    if (!std::isfinite(gv)) throw DivergenceError("adam_step: non-finite gradient");

  opt.step += 1;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (size_t i = 0; i < params.flat.size(); ++i) {
    opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * grads[i];
    opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * grads[i] * grads[i];
    double m_hat = opt.m[i] / bc1;
    double v_hat = opt.v[i] / bc2;
    params.flat[i] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps);
  }
}

}  // namespace softrtc
