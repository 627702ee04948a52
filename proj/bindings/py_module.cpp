#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "softrtc/bench.hpp"
#include "softrtc/config.hpp"
#include "softrtc/fm_train.hpp"
#include "softrtc/metrics.hpp"
#include "softrtc/serialize.hpp"

namespace py = pybind11;
using namespace softrtc;

namespace {

Mat mat_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Mat m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + m.data.size(), m.data.begin());
  return m;
}

py::array_t<double> mat_to_numpy(const Mat& m) {
  py::array_t<double> arr({m.rows, m.cols});
  std::copy(m.data.begin(), m.data.end(), arr.mutable_data());
  return arr;
}

py::array_t<double> vec_to_numpy(const std::vector<double>& v) {
  py::array_t<double> arr(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), arr.mutable_data());
  return arr;
}

WindowRule rule_from_args(const std::string& name, py::kwargs kwargs) {
  auto geti = [&](const char* key, int fallback) {
    return kwargs.contains(key) ? kwargs[key].cast<int>() : fallback;
  };
  if (name == "delay_scaled") return DelayScaled{geti("multiplier", 2), geti("h_max", 5)};
  if (name == "fixed") return FixedWindow{geti("length", 3)};
  if (name == "offset") return OffsetWindow{geti("length", 0), geti("cap", 8)};
  throw std::invalid_argument("unknown window rule: " + name);
}

Schedule schedule_from_str(const std::string& name) {
  if (name == "linear") return Schedule::Linear;
  if (name == "zeros") return Schedule::Zeros;
  if (name == "shifted_linear") return Schedule::ShiftedLinear;
  throw std::invalid_argument("unknown schedule: " + name);
}

EnvSpec spec_from_dict(const py::dict& d) {
  EnvSpec spec;
  for (auto item : d) {
    std::string key = py::str(item.first);
    if (key == "task")
      spec.task = task_from_name(item.second.cast<std::string>());
    else if (key == "dt")
      spec.dt = item.second.cast<double>();
    else if (key == "episode_len")
      spec.episode_len = item.second.cast<int>();
    else if (key == "action_bound")
      spec.action_bound = item.second.cast<double>();
    else if (key == "solve_threshold")
      spec.solve_threshold = item.second.cast<double>();
    else if (key == "solve_tail")
      spec.solve_tail = item.second.cast<int>();
    else if (key == "horizon")
      spec.horizon = item.second.cast<int>();
    else if (key == "switch_step")
      spec.switch_step = item.second.cast<int>();
    else if (key == "init_jitter")
      spec.init_jitter = item.second.cast<double>();
    else
      throw std::invalid_argument("unknown env spec key: " + key);
  }
  spec.validate();
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Token-weighted action-prior denoising for chunked flow policies";

  py::register_exception<DivergenceError>(m, "DivergenceError");

  py::class_<DelayScaled>(m, "DelayScaled")
      .def(py::init<int, int>(), py::arg("multiplier") = 2, py::arg("h_max") = 5)
      .def_readonly("multiplier", &DelayScaled::multiplier)
      .def_readonly("h_max", &DelayScaled::h_max);
  py::class_<FixedWindow>(m, "FixedWindow")
      .def(py::init<int>(), py::arg("length") = 3)
      .def_readonly("length", &FixedWindow::length);
  py::class_<OffsetWindow>(m, "OffsetWindow")
      .def(py::init<int, int>(), py::arg("length") = 0, py::arg("cap") = 8)
      .def_readonly("length", &OffsetWindow::length)
      .def_readonly("cap", &OffsetWindow::cap);
  m.def("window_rule", &rule_from_args, py::arg("name"),
        "Build a window rule: delay_scaled(multiplier, h_max) | fixed(length) | "
        "offset(length, cap)");

  py::class_<WeightProfile>(m, "WeightProfile")
      .def_property_readonly("omega", [](const WeightProfile& p) { return vec_to_numpy(p.omega); })
      .def_readonly("delay", &WeightProfile::delay)
      .def_readonly("endpoint", &WeightProfile::endpoint);

  m.def(
      "endpoint",
      [](const WindowRule& rule, int delay, int horizon) { return endpoint(rule, delay, horizon); },
      py::arg("rule"), py::arg("delay"), py::arg("horizon"));
  m.def(
      "token_weights",
      [](const WindowRule& rule, const std::string& schedule, int delay, int horizon) {
        return token_weights(rule, schedule_from_str(schedule), delay, horizon);
      },
      py::arg("rule"), py::arg("schedule"), py::arg("delay"), py::arg("horizon"));
  m.def("blend_state", [](const WeightProfile& w, py::array_t<double> prior,
                          py::array_t<double> state) {
    return mat_to_numpy(blend_state(w, mat_from_numpy(prior), mat_from_numpy(state)));
  });
  m.def("blend_time", [](const WeightProfile& w, double t) { return vec_to_numpy(blend_time(w, t)); });

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init([](int obs_dim, int horizon, int action_dim, std::vector<int> hidden,
                       uint64_t seed) {
             ModelConfig cfg;
             cfg.obs_dim = obs_dim;
             cfg.horizon = horizon;
             cfg.action_dim = action_dim;
             cfg.hidden = std::move(hidden);
             cfg.seed = seed;
             cfg.validate();
             return cfg;
           }),
           py::arg("obs_dim"), py::arg("horizon"), py::arg("action_dim"),
           py::arg("hidden") = std::vector<int>{64, 64}, py::arg("seed") = 0)
      .def_readonly("obs_dim", &ModelConfig::obs_dim)
      .def_readonly("horizon", &ModelConfig::horizon)
      .def_readonly("action_dim", &ModelConfig::action_dim)
      .def_readonly("hidden", &ModelConfig::hidden)
      .def_readonly("seed", &ModelConfig::seed);

  py::class_<ModelParams>(m, "ModelParams")
      .def_readonly("config", &ModelParams::config)
      .def_property_readonly("flat", [](const ModelParams& p) { return vec_to_numpy(p.flat); })
      .def("with_flat",
           [](const ModelParams& p, py::array_t<double, py::array::c_style> flat) {
             if (static_cast<size_t>(flat.size()) != p.flat.size())
               throw std::invalid_argument("flat parameter size mismatch");
             ModelParams q = p;
             std::copy(flat.data(), flat.data() + flat.size(), q.flat.begin());
             return q;
           })
      .def("param_count", &ModelParams::param_count);

  m.def("init_model", &init_model, py::arg("config"));
  m.def(
      "forward",
      [](const ModelParams& params, const Vec& obs, py::array_t<double> state,
         const std::vector<double>& times) {
        return mat_to_numpy(forward(params, obs, mat_from_numpy(state), times));
      },
      py::arg("params"), py::arg("obs"), py::arg("state"), py::arg("times"));
  m.def(
      "backward",
      [](const ModelParams& params, const Vec& obs, py::array_t<double> state,
         const std::vector<double>& times, py::array_t<double> upstream) {
        Gradients g = backward(params, obs, mat_from_numpy(state), times,
                               mat_from_numpy(upstream));
        return py::make_tuple(vec_to_numpy(g.params), mat_to_numpy(g.state));
      },
      py::arg("params"), py::arg("obs"), py::arg("state"), py::arg("times"), py::arg("upstream"));

  m.def(
      "corrupt",
      [](py::array_t<double> target, py::array_t<double> noise, double tau,
         const WeightProfile& weights) {
        CorruptedChunk c = corrupt(mat_from_numpy(target), mat_from_numpy(noise), tau, weights);
        return py::make_tuple(mat_to_numpy(c.x), vec_to_numpy(c.tau_per_token));
      },
      py::arg("target"), py::arg("noise"), py::arg("tau"), py::arg("weights"));

  m.def(
      "generate_chunk",
      [](const ModelParams& params, const Vec& obs, py::object prior_values,
         py::object prior_valid, int delay, const WindowRule& rule, const std::string& schedule,
         int flow_steps, uint64_t seed) {
        SolverConfig solver;
        solver.flow_steps = flow_steps;
        Rng rng(seed);
        if (prior_values.is_none())
          return mat_to_numpy(generate_chunk(params, obs, nullptr, delay, rule,
                                             schedule_from_str(schedule), solver, rng));
        PriorChunk prior;
        prior.values = mat_from_numpy(prior_values.cast<py::array_t<double>>());
        if (prior_valid.is_none())
          prior.valid.assign(prior.values.rows, 1);
        else
          for (auto v : prior_valid.cast<std::vector<bool>>())
            prior.valid.push_back(v ? 1 : 0);
        return mat_to_numpy(generate_chunk(params, obs, &prior, delay, rule,
                                           schedule_from_str(schedule), solver, rng));
      },
      py::arg("params"), py::arg("obs"), py::arg("prior_values") = py::none(),
      py::arg("prior_valid") = py::none(), py::arg("delay") = 0,
      py::arg("rule") = DelayScaled{2, 5}, py::arg("schedule") = "linear",
      py::arg("flow_steps") = 5, py::arg("seed") = 0);

  m.def(
      "align_prior",
      [](py::array_t<double> prev, int exec_horizon, int horizon) {
        PriorChunk p = align_prior(mat_from_numpy(prev), exec_horizon, horizon);
        std::vector<bool> valid(p.valid.begin(), p.valid.end());
        return py::make_tuple(mat_to_numpy(p.values), valid);
      },
      py::arg("prev_chunk"), py::arg("exec_horizon"), py::arg("horizon"));

  m.def(
      "generate_demos",
      [](const py::dict& spec, int episodes, int horizon, uint64_t seed) {
        Dataset ds = generate_demos(spec_from_dict(spec), episodes, horizon, seed);
        py::list pairs;
        for (const auto& [obs, chunk] : ds.pairs)
          pairs.append(py::make_tuple(vec_to_numpy(obs), mat_to_numpy(chunk)));
        return pairs;
      },
      py::arg("spec"), py::arg("episodes"), py::arg("horizon"), py::arg("seed") = 0);

  m.def(
      "train",
      [](py::list pairs, const ModelParams& init, int epochs, int batch_size, double lr,
         double eps_denom, int d_max, const WindowRule& rule, const std::string& schedule,
         uint64_t seed) {
        std::vector<std::pair<Vec, ActionChunk>> dataset;
        for (auto item : pairs) {
          auto tup = item.cast<py::tuple>();
          py::array_t<double, py::array::c_style | py::array::forcecast> obs_arr =
              tup[0].cast<py::array_t<double>>();
          Vec obs(obs_arr.data(), obs_arr.data() + obs_arr.size());
          dataset.emplace_back(std::move(obs), mat_from_numpy(tup[1].cast<py::array_t<double>>()));
        }
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.lr = lr;
        cfg.eps_denom = eps_denom;
        cfg.d_max = d_max;
        cfg.rule = rule;
        cfg.schedule = schedule_from_str(schedule);
        cfg.seed = seed;
        TrainResult result = train(dataset, cfg, init);
        return py::make_tuple(result.params, result.loss_curve);
      },
      py::arg("dataset"), py::arg("init"), py::arg("epochs") = 150, py::arg("batch_size") = 64,
      py::arg("lr") = 2e-3, py::arg("eps_denom") = 1e-6, py::arg("d_max") = 4,
      py::arg("rule") = DelayScaled{2, 5}, py::arg("schedule") = "linear",
      py::arg("seed") = 0);

  py::class_<ResultRow>(m, "ResultRow")
      .def_readonly("method", &ResultRow::method)
      .def_readonly("task", &ResultRow::task)
      .def_readonly("delay", &ResultRow::delay)
      .def_readonly("seed", &ResultRow::seed)
      .def_property_readonly("ret", [](const ResultRow& r) { return r.ret; })
      .def_readonly("solve", &ResultRow::solve)
      .def_readonly("action_delta", &ResultRow::action_delta)
      .def_readonly("action_jerk", &ResultRow::action_jerk)
      .def_readonly("boundary_jump", &ResultRow::boundary_jump);

  m.def(
      "evaluate",
      [](const py::dict& spec, const ModelParams& params, const std::vector<int>& delays,
         int episodes, const std::string& mode, const WindowRule& rule,
         const std::string& schedule, int exec_horizon, int flow_steps, uint64_t seed,
         int workers, const std::string& method) {
        EvalRequest req;
        req.tasks = {spec_from_dict(spec)};
        req.delays = delays;
        req.episodes = episodes;
        req.method_label = method;
        req.mode = mode == "naive" ? ExecMode::Naive : ExecMode::Rtc;
        req.rule = rule;
        req.schedule = schedule_from_str(schedule);
        req.solver.flow_steps = flow_steps;
        req.exec_horizon = exec_horizon;
        req.master_seed = seed;
        req.workers = workers;
        return evaluate(req, params);
      },
      py::arg("spec"), py::arg("params"), py::arg("delays"), py::arg("episodes") = 32,
      py::arg("mode") = "rtc", py::arg("rule") = DelayScaled{2, 5},
      py::arg("schedule") = "linear", py::arg("exec_horizon") = 4, py::arg("flow_steps") = 5,
      py::arg("seed") = 0, py::arg("workers") = 1, py::arg("method") = "rtc");

  m.def("action_delta", [](py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected steps x action_dim");
    std::vector<Vec> actions(arr.shape(0), Vec(arr.shape(1)));
    for (py::ssize_t t = 0; t < arr.shape(0); ++t)
      for (py::ssize_t a = 0; a < arr.shape(1); ++a) actions[t][a] = arr.at(t, a);
    return action_delta(actions);
  });
  m.def("action_jerk", [](py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected steps x action_dim");
    std::vector<Vec> actions(arr.shape(0), Vec(arr.shape(1)));
    for (py::ssize_t t = 0; t < arr.shape(0); ++t)
      for (py::ssize_t a = 0; a < arr.shape(1); ++a) actions[t][a] = arr.at(t, a);
    return action_jerk(actions);
  });
  m.def(
      "bootstrap_ci",
      [](const std::vector<double>& values, double level, int resamples, uint64_t seed) {
        BootstrapCI ci = bootstrap_ci(values, level, resamples, seed);
        return py::make_tuple(ci.point, ci.lower, ci.upper);
      },
      py::arg("values"), py::arg("level") = 0.95, py::arg("resamples") = 10000,
      py::arg("seed") = 0);

  m.def("save_checkpoint", &save_checkpoint, py::arg("path"), py::arg("params"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def(
      "bench_compare",
      [](const ModelParams& params, const std::vector<int>& batch_sizes, int warmup, int iters,
         int delay) {
        py::list out;
        for (const BenchResult& r : bench_compare(params, batch_sizes, warmup, iters, delay)) {
          py::dict d;
          d["method"] = r.method;
          d["batch"] = r.batch;
          d["median_s"] = r.median_s;
          d["mean_s"] = r.mean_s;
          d["p95_s"] = r.p95_s;
          d["ratio_vs_naive"] = r.ratio_vs_naive;
          d["model_evals_per_chunk"] = r.model_evals_per_chunk;
          out.append(d);
        }
        return out;
      },
      py::arg("params"), py::arg("batch_sizes") = std::vector<int>{1},
      py::arg("warmup") = 10, py::arg("iters") = 50, py::arg("delay") = 2);
}
