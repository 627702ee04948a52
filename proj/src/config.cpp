#include "softrtc/config.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "softrtc/serialize.hpp"

namespace softrtc {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError("unknown config key: " + (path.empty() ? key : path + "." + key));
  }
}

template <typename T>
void read_field(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for " + (path.empty() ? std::string(key) : path + "." + key) +
                      ": " + e.what());
  }
}

Schedule schedule_from_name(const std::string& name) {
  if (name == "linear") return Schedule::Linear;
  if (name == "zeros") return Schedule::Zeros;
  if (name == "shifted_linear") return Schedule::ShiftedLinear;
  throw ConfigError("unknown schedule: " + name);
}

ExecMode mode_from_name(const std::string& name) {
  if (name == "naive") return ExecMode::Naive;
  if (name == "rtc") return ExecMode::Rtc;
  throw ConfigError("unknown execution mode: " + name);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");

  ExperimentConfig cfg;
  check_keys(root, "",
             {"master_seed", "out_dir", "env", "exec", "model", "window", "solver", "data",
              "train", "eval", "sweep", "bench"});
  read_field(root, "", "master_seed", cfg.master_seed);
  read_field(root, "", "out_dir", cfg.out_dir);

  if (root.contains("env")) {
    const json& env = root.at("env");
    check_keys(env, "env",
               {"task", "dt", "episode_len", "action_bound", "solve_threshold", "solve_tail",
                "switch_step", "init_jitter"});
    std::string task = task_name(cfg.env.task);
    read_field(env, "env", "task", task);
    cfg.env.task = task_from_name(task);
    read_field(env, "env", "dt", cfg.env.dt);
    read_field(env, "env", "episode_len", cfg.env.episode_len);
    read_field(env, "env", "action_bound", cfg.env.action_bound);
    read_field(env, "env", "solve_threshold", cfg.env.solve_threshold);
    read_field(env, "env", "solve_tail", cfg.env.solve_tail);
    read_field(env, "env", "switch_step", cfg.env.switch_step);
    read_field(env, "env", "init_jitter", cfg.env.init_jitter);
  }

  if (root.contains("exec")) {
    const json& exec = root.at("exec");
    check_keys(exec, "exec", {"horizon", "exec_horizon"});
    read_field(exec, "exec", "horizon", cfg.horizon);
    read_field(exec, "exec", "exec_horizon", cfg.exec_horizon);
  }
  cfg.env.horizon = cfg.horizon;  // the observation preview length follows H

  if (root.contains("model")) {
    const json& model = root.at("model");
    check_keys(model, "model", {"hidden"});
    read_field(model, "model", "hidden", cfg.hidden);
  }

  if (root.contains("window")) {
    const json& window = root.at("window");
    check_keys(window, "window",
               {"rule", "lambda", "h_max", "fixed_h", "offset_l", "offset_cap", "schedule"});
    std::string rule_name = window_rule_name(cfg.rule);
    read_field(window, "window", "rule", rule_name);
    int lambda = 2, h_max = 5, fixed_h = 3, offset_l = 0, offset_cap = cfg.horizon;
    read_field(window, "window", "lambda", lambda);
    read_field(window, "window", "h_max", h_max);
    read_field(window, "window", "fixed_h", fixed_h);
    read_field(window, "window", "offset_l", offset_l);
    read_field(window, "window", "offset_cap", offset_cap);
    if (rule_name == "delay_scaled")
      cfg.rule = DelayScaled{lambda, h_max};
    else if (rule_name == "fixed")
      cfg.rule = FixedWindow{fixed_h};
    else if (rule_name == "offset")
      cfg.rule = OffsetWindow{offset_l, offset_cap};
    else
      throw ConfigError("unknown window rule: " + rule_name);

    std::string sched = schedule_name(cfg.schedule);
    read_field(window, "window", "schedule", sched);
    cfg.schedule = schedule_from_name(sched);
  }

  if (root.contains("solver")) {
    const json& solver = root.at("solver");
    check_keys(solver, "solver", {"flow_steps", "post_blend"});
    read_field(solver, "solver", "flow_steps", cfg.solver.flow_steps);
    read_field(solver, "solver", "post_blend", cfg.solver.post_blend);
  }

  if (root.contains("data")) {
    const json& data = root.at("data");
    check_keys(data, "data", {"episodes", "out"});
    read_field(data, "data", "episodes", cfg.data_episodes);
    read_field(data, "data", "out", cfg.data_out);
  }

  if (root.contains("train")) {
    const json& train = root.at("train");
    check_keys(train, "train",
               {"epochs", "batch_size", "lr", "eps_denom", "d_max", "dataset", "out_checkpoint",
                "loss_curve"});
    read_field(train, "train", "epochs", cfg.train.epochs);
    read_field(train, "train", "batch_size", cfg.train.batch_size);
    read_field(train, "train", "lr", cfg.train.lr);
    read_field(train, "train", "eps_denom", cfg.train.eps_denom);
    read_field(train, "train", "d_max", cfg.train.d_max);
    read_field(train, "train", "dataset", cfg.train_dataset);
    read_field(train, "train", "out_checkpoint", cfg.train_checkpoint_out);
    read_field(train, "train", "loss_curve", cfg.train_loss_curve_out);
  }

  if (root.contains("eval")) {
    const json& eval = root.at("eval");
    check_keys(eval, "eval",
               {"tasks", "delays", "episodes", "mode", "method", "checkpoint", "out"});
    read_field(eval, "eval", "tasks", cfg.eval_tasks);
    read_field(eval, "eval", "delays", cfg.eval_delays);
    read_field(eval, "eval", "episodes", cfg.eval_episodes);
    std::string mode = cfg.eval_mode == ExecMode::Naive ? "naive" : "rtc";
    read_field(eval, "eval", "mode", mode);
    cfg.eval_mode = mode_from_name(mode);
    read_field(eval, "eval", "method", cfg.eval_method_label);
    read_field(eval, "eval", "checkpoint", cfg.eval_checkpoint);
    read_field(eval, "eval", "out", cfg.eval_out);
  }
  if (cfg.eval_tasks.empty()) cfg.eval_tasks = {task_name(cfg.env.task)};

  if (root.contains("sweep")) {
    const json& sweep = root.at("sweep");
    check_keys(sweep, "sweep", {"axis", "values", "train_per_value", "out"});
    read_field(sweep, "sweep", "axis", cfg.sweep_axis);
    read_field(sweep, "sweep", "values", cfg.sweep_values);
    read_field(sweep, "sweep", "train_per_value", cfg.sweep_train_per_value);
    read_field(sweep, "sweep", "out", cfg.sweep_out);
  }

  if (root.contains("bench")) {
    const json& bench = root.at("bench");
    check_keys(bench, "bench", {"batch_sizes", "warmup", "iters", "delay", "checkpoint", "out"});
    read_field(bench, "bench", "batch_sizes", cfg.bench_batch_sizes);
    read_field(bench, "bench", "warmup", cfg.bench_warmup);
    read_field(bench, "bench", "iters", cfg.bench_iters);
    read_field(bench, "bench", "delay", cfg.bench_delay);
    if (bench.contains("checkpoint")) cfg.bench_checkpoint = bench.at("checkpoint").get<std::string>();
    read_field(bench, "bench", "out", cfg.bench_out);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

void ExperimentConfig::validate() const {
  try {
    env.validate();
    require(horizon >= 1, "exec.horizon must be >= 1");
    require(exec_horizon >= 1 && exec_horizon <= horizon,
            "exec.exec_horizon must be in [1, horizon]");
    require(env.horizon == horizon, "env horizon must match exec.horizon");
    int max_delay = 0;
    for (int d : eval_delays) {
      require(d >= 0, "eval.delays must be nonnegative");
      max_delay = std::max(max_delay, d);
    }
    require(horizon >= exec_horizon + max_delay,
            "need exec.horizon >= exec.exec_horizon + max eval delay");
    require(eval_episodes >= 1, "eval.episodes must be >= 1");
    require(!hidden.empty(), "model.hidden must be nonempty");
    solver.validate();
    train.validate(horizon);
    require(train.d_max <= horizon, "train.d_max must be <= exec.horizon");
    for (int v : sweep_values) require(v >= 0, "sweep.values must be nonnegative");
    require(sweep_axis == "lambda" || sweep_axis == "fixed_h" || sweep_axis == "offset_l",
            "sweep.axis must be one of lambda, fixed_h, offset_l");
    require(bench_warmup >= 1 && bench_iters >= 10, "bench needs warmup >= 1 and iters >= 10");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ModelConfig ExperimentConfig::model_config(uint64_t seed) const {
  ModelConfig mc;
  mc.obs_dim = 4 + 2 * horizon;
  mc.horizon = horizon;
  mc.action_dim = 2;
  mc.hidden = hidden;
  mc.seed = seed;
  return mc;
}

WindowRule ExperimentConfig::rule_for_axis(const std::string& axis, int value) const {
  if (axis == "lambda") {
    int h_max = std::holds_alternative<DelayScaled>(rule) ? std::get<DelayScaled>(rule).h_max : 5;
    return DelayScaled{value, h_max};
  }
  if (axis == "fixed_h") return FixedWindow{value};
  if (axis == "offset_l") {
    int cap = std::holds_alternative<OffsetWindow>(rule) ? std::get<OffsetWindow>(rule).cap
                                                         : horizon;
    return OffsetWindow{value, cap};
  }
  throw ConfigError("unknown sweep axis: " + axis);
}

std::string ExperimentConfig::resolved_json() const {
  json j;
  j["master_seed"] = master_seed;
  j["out_dir"] = out_dir;
  j["env"] = {{"task", task_name(env.task)},
              {"dt", env.dt},
              {"episode_len", env.episode_len},
              {"action_bound", env.action_bound},
              {"solve_threshold", env.solve_threshold},
              {"solve_tail", env.solve_tail},
              {"switch_step", env.switch_step},
              {"init_jitter", env.init_jitter}};
  j["exec"] = {{"horizon", horizon}, {"exec_horizon", exec_horizon}};
  j["model"] = {{"hidden", hidden}};
  json window = {{"rule", window_rule_name(rule)}, {"schedule", schedule_name(schedule)}};
  if (const auto* ds = std::get_if<DelayScaled>(&rule)) {
    window["lambda"] = ds->multiplier;
    window["h_max"] = ds->h_max;
  } else if (const auto* fw = std::get_if<FixedWindow>(&rule)) {
    window["fixed_h"] = fw->length;
  } else if (const auto* ow = std::get_if<OffsetWindow>(&rule)) {
    window["offset_l"] = ow->length;
    window["offset_cap"] = ow->cap;
  }
  j["window"] = window;
  j["solver"] = {{"flow_steps", solver.flow_steps}, {"post_blend", solver.post_blend}};
  j["data"] = {{"episodes", data_episodes}, {"out", data_out}};
  j["train"] = {{"epochs", train.epochs},       {"batch_size", train.batch_size},
                {"lr", train.lr},               {"eps_denom", train.eps_denom},
                {"d_max", train.d_max},         {"dataset", train_dataset},
                {"out_checkpoint", train_checkpoint_out},
                {"loss_curve", train_loss_curve_out}};
  j["eval"] = {{"tasks", eval_tasks},
               {"delays", eval_delays},
               {"episodes", eval_episodes},
               {"mode", eval_mode == ExecMode::Naive ? "naive" : "rtc"},
               {"method", eval_method_label},
               {"checkpoint", eval_checkpoint},
               {"out", eval_out}};
  j["sweep"] = {{"axis", sweep_axis},
                {"values", sweep_values},
                {"train_per_value", sweep_train_per_value},
                {"out", sweep_out}};
  json bench = {{"batch_sizes", bench_batch_sizes},
                {"warmup", bench_warmup},
                {"iters", bench_iters},
                {"delay", bench_delay},
                {"out", bench_out}};
  if (bench_checkpoint) bench["checkpoint"] = *bench_checkpoint;
  j["bench"] = bench;
  return j.dump();
}

std::string ExperimentConfig::comment_block(const std::vector<std::string>& input_files) const {
  std::string out = "# config " + resolved_json() + "\n";
  for (const std::string& file : input_files) {
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(hash_file(file)));
    out += "# input " + file + " fnv1a64:" + hex + "\n";
  }
  return out;
}

std::string ExperimentConfig::resolve_path(const std::string& path) const {
  if (path.empty() || path.front() == '/') return path;
  if (out_dir.empty() || out_dir == ".") return path;
  return out_dir + "/" + path;
}

}  // namespace softrtc
