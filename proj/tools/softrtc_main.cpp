#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "softrtc/bench.hpp"
#include "softrtc/config.hpp"
#include "softrtc/fm_train.hpp"
#include "softrtc/metrics.hpp"
#include "softrtc/serialize.hpp"

namespace {

using namespace softrtc;

int default_workers() {
  if (const char* env = std::getenv("SOFTRTC_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;  // overrides master seed when >= 0
  int workers = 0;
  bool plot = false;
};

ExperimentConfig load(const CliOptions& opt) {
  if (!std::filesystem::exists(opt.config_path))
    throw MissingInputError("config file not found: " + opt.config_path);
  ExperimentConfig cfg = load_config(opt.config_path);
  if (opt.seed >= 0) cfg.master_seed = static_cast<uint64_t>(opt.seed);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (cfg.out_dir != "." && !cfg.out_dir.empty())
    std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

std::string require_input(const ExperimentConfig& cfg, const std::string& path,
                          const std::string& what) {
  std::string resolved = cfg.resolve_path(path);
  if (!std::filesystem::exists(resolved))
    throw MissingInputError("missing " + what + ": " + resolved);
  return resolved;
}

EnvSpec task_spec(const ExperimentConfig& cfg, const std::string& task) {
  EnvSpec spec = cfg.env;
  spec.task = task_from_name(task);
  return spec;
}

int cmd_gen_data(const CliOptions& opt) {
  ExperimentConfig cfg = load(opt);
  Dataset ds = generate_demos(cfg.env, cfg.data_episodes, cfg.horizon,
                              derive_seed(cfg.master_seed, {0x64617461ULL}));
  std::string out = cfg.resolve_path(cfg.data_out);
  save_dataset(out, ds, cfg.comment_block({}));
  std::printf("wrote %s (%zu pairs)\n", out.c_str(), ds.pairs.size());
  return 0;
}

int cmd_train(const CliOptions& opt) {
  ExperimentConfig cfg = load(opt);
  std::string dataset_path = require_input(cfg, cfg.train_dataset, "dataset");
  Dataset ds = load_dataset(dataset_path);

  TrainConfig tc = cfg.train;
  tc.rule = cfg.rule;
  tc.schedule = cfg.schedule;
  tc.seed = derive_seed(cfg.master_seed, {0x747261696eULL});

  ModelParams init = init_model(cfg.model_config(derive_seed(cfg.master_seed, {0x696e6974ULL})));
  TrainResult result = train(ds.pairs, tc, init);

  std::string ckpt = cfg.resolve_path(cfg.train_checkpoint_out);
  save_checkpoint(ckpt, result.params);

  std::ostringstream curve;
  curve << cfg.comment_block({dataset_path});
  curve << "step,loss\n";
  for (const auto& [step, loss] : result.loss_curve)
    curve << step << ',' << format_double(loss) << "\n";
  write_text_file(cfg.resolve_path(cfg.train_loss_curve_out), curve.str());

  double final_loss = result.loss_curve.empty() ? 0.0 : result.loss_curve.back().second;
  std::printf("wrote %s (%zu steps, final loss %g)\n", ckpt.c_str(), result.loss_curve.size(),
              final_loss);
  return 0;
}

EvalRequest eval_request(const ExperimentConfig& cfg, const CliOptions& opt) {
  EvalRequest req;
  for (const std::string& task : cfg.eval_tasks) req.tasks.push_back(task_spec(cfg, task));
  req.delays = cfg.eval_delays;
  req.episodes = cfg.eval_episodes;
  req.method_label = cfg.eval_method_label;
  req.mode = cfg.eval_mode;
  req.rule = cfg.rule;
  req.schedule = cfg.schedule;
  req.solver = cfg.solver;
  req.exec_horizon = cfg.exec_horizon;
  req.master_seed = derive_seed(cfg.master_seed, {0x6576616cULL});
  req.workers = opt.workers;
  return req;
}

void write_frontier(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  // Aggregate solve rate and mean jerk per (method, task, delay) scatter point.
  std::map<std::tuple<std::string, std::string, int>, std::pair<int, std::pair<double, double>>>
      cells;
  for (const ResultRow& r : rows) {
    auto& cell = cells[{r.method, r.task, r.delay}];
    cell.first += 1;
    cell.second.first += r.solve ? 1.0 : 0.0;
    cell.second.second += r.action_jerk;
  }
  std::ostringstream out;
  out << "method,task,delay,solve_rate,mean_jerk\n";
  for (const auto& [key, cell] : cells) {
    out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
        << format_double(cell.second.first / cell.first) << ','
        << format_double(cell.second.second / cell.first) << "\n";
  }
  write_text_file(cfg.resolve_path("frontier.csv"), out.str());
}

int cmd_eval(const CliOptions& opt) {
  ExperimentConfig cfg = load(opt);
  std::string ckpt = require_input(cfg, cfg.eval_checkpoint, "checkpoint");
  ModelParams params = load_checkpoint(ckpt);
  require(params.config.horizon == cfg.horizon, "checkpoint horizon != config horizon");

  std::vector<ResultRow> rows = evaluate(eval_request(cfg, opt), params);
  std::string out = cfg.resolve_path(cfg.eval_out);
  write_text_file(out, result_csv(rows, cfg.comment_block({ckpt})));
  if (opt.plot) write_frontier(cfg, rows);
  std::printf("wrote %s (%zu rows)\n", out.c_str(), rows.size());
  return 0;
}

int cmd_sweep(const CliOptions& opt, const std::string& axis_arg) {
  ExperimentConfig cfg = load(opt);
  std::string axis = cfg.sweep_axis;
  std::vector<int> values = cfg.sweep_values;
  if (!axis_arg.empty()) {
    // --axis NAME=V1,V2,... overrides the config sweep axis.
    auto eq = axis_arg.find('=');
    axis = axis_arg.substr(0, eq);
    values.clear();
    if (eq != std::string::npos) {
      std::istringstream ss(axis_arg.substr(eq + 1));
      std::string tok;
      while (std::getline(ss, tok, ',')) values.push_back(std::stoi(tok));
    }
    if (values.empty()) throw ConfigError("sweep axis needs values: " + axis_arg);
  }

  Dataset ds;
  ModelParams base;
  std::vector<std::string> inputs;
  if (cfg.sweep_train_per_value) {
    std::string dataset_path = require_input(cfg, cfg.train_dataset, "dataset");
    ds = load_dataset(dataset_path);
    base = init_model(cfg.model_config(derive_seed(cfg.master_seed, {0x696e6974ULL})));
    inputs.push_back(dataset_path);
  } else {
    std::string ckpt = require_input(cfg, cfg.eval_checkpoint, "checkpoint");
    base = load_checkpoint(ckpt);
    inputs.push_back(ckpt);
  }

  std::vector<ResultRow> all_rows;
  std::vector<std::string> axis_values;
  for (int value : values) {
    ExperimentConfig point = cfg;
    point.rule = cfg.rule_for_axis(axis, value);

    ModelParams params = base;
    if (cfg.sweep_train_per_value) {
      TrainConfig tc = point.train;
      tc.rule = point.rule;
      tc.schedule = point.schedule;
      tc.seed = derive_seed(point.master_seed, {0x747261696eULL});
      params = train(ds.pairs, tc, base).params;
    }
    std::vector<ResultRow> rows = evaluate(eval_request(point, opt), params);
    for (ResultRow& r : rows) {
      axis_values.push_back(std::to_string(value));
      all_rows.push_back(std::move(r));
    }
  }

  std::string out = cfg.resolve_path(cfg.sweep_out);
  write_text_file(out, result_csv(all_rows, cfg.comment_block(inputs), axis, axis_values));
  if (opt.plot) write_frontier(cfg, all_rows);
  std::printf("wrote %s (%zu rows over %zu %s values)\n", out.c_str(), all_rows.size(),
              values.size(), axis.c_str());
  return 0;
}

int cmd_bench(const CliOptions& opt) {
  ExperimentConfig cfg = load(opt);
  ModelParams params;
  std::vector<std::string> inputs;
  if (cfg.bench_checkpoint) {
    std::string ckpt = require_input(cfg, *cfg.bench_checkpoint, "checkpoint");
    params = load_checkpoint(ckpt);
    inputs.push_back(ckpt);
  } else {
    params = init_model(cfg.model_config(derive_seed(cfg.master_seed, {0x62656e6368ULL})));
  }

  std::vector<BenchResult> results = bench_compare(params, cfg.bench_batch_sizes, cfg.bench_warmup,
                                                   cfg.bench_iters, cfg.bench_delay, cfg.solver);
  std::string out = cfg.resolve_path(cfg.bench_out);
  write_text_file(out, cfg.comment_block(inputs) + bench_report(results));
  for (const BenchResult& r : results)
    std::printf("%-6s batch %-3d median %10.3f us  ratio %.3f\n", r.method.c_str(), r.batch,
                r.median_s * 1e6, r.ratio_vs_naive);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token-weighted action-prior denoising lab for chunked flow policies"};
  app.require_subcommand(1);

  CliOptions opt;
  opt.workers = default_workers();
  app.add_option("--config", opt.config_path, "experiment config (JSON)")->required();
  app.add_option("--seed", opt.seed, "override the config master seed");
  app.add_option("--out", opt.out_dir, "override the config output directory");
  app.add_option("--workers", opt.workers, "evaluation worker threads");
  app.add_flag("--plot", opt.plot, "also write frontier scatter data (solve vs jerk)");

  std::string axis_arg;
  CLI::App* gen = app.add_subcommand("gen-data", "generate expert demonstrations");
  CLI::App* train = app.add_subcommand("train", "train a checkpoint on a dataset");
  CLI::App* eval = app.add_subcommand("eval", "run the evaluation grid");
  CLI::App* sweep = app.add_subcommand("sweep", "run the eval grid across a window-rule axis");
  sweep->add_option("--axis", axis_arg, "axis override, e.g. offset_l=0,1,2,3");
  CLI::App* bench = app.add_subcommand("bench", "chunk-generation latency benchmark");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(opt);
    if (train->parsed()) return cmd_train(opt);
    if (eval->parsed()) return cmd_eval(opt);
    if (sweep->parsed()) return cmd_sweep(opt, axis_arg);
    if (bench->parsed()) return cmd_bench(opt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const MissingInputError& e) {
    std::fprintf(stderr, "missing input: %s\n", e.what());
    return 3;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "numerical divergence: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
