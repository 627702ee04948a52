#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softrtc/envs.hpp"
#include "softrtc/executor.hpp"
#include "softrtc/fm_train.hpp"

namespace softrtc {

// Resolved experiment configuration. Parsed from a JSON file; unknown keys
// are field-level errors so sweep typos cannot pass silently. Relative paths
// are resolved against the output directory.
struct ExperimentConfig {
  uint64_t master_seed = 0;
  std::string out_dir = ".";

  EnvSpec env;
  std::vector<std::string> eval_tasks;  // tasks evaluated by eval/sweep

  int horizon = 8;       // H
  int exec_horizon = 4;  // s

  std::vector<int> hidden = {64, 64};

  WindowRule rule = DelayScaled{2, 5};
  Schedule schedule = Schedule::Linear;
  SolverConfig solver;

  // gen-data
  int data_episodes = 12;
  std::string data_out = "dataset.txt";

  // train
  TrainConfig train;
  std::string train_dataset = "dataset.txt";
  std::string train_checkpoint_out = "model.ckpt";
  std::string train_loss_curve_out = "loss_curve.csv";

  // eval
  std::vector<int> eval_delays = {0, 1, 2, 3, 4};
  int eval_episodes = 32;
  ExecMode eval_mode = ExecMode::Rtc;
  std::string eval_method_label = "rtc";
  std::string eval_checkpoint = "model.ckpt";
  std::string eval_out = "results.csv";

  // sweep
  std::string sweep_axis = "offset_l";  // one of: lambda, fixed_h, offset_l
  std::vector<int> sweep_values = {0, 1, 2, 3, 4, 5, 6};
  bool sweep_train_per_value = true;
  std::string sweep_out = "sweep.csv";

  // bench
  std::vector<int> bench_batch_sizes = {1, 32};
  int bench_warmup = 20;
  int bench_iters = 200;
  int bench_delay = 2;
  std::optional<std::string> bench_checkpoint;  // absent: bench a freshly initialized model
  std::string bench_out = "bench.csv";

  void validate() const;

  ModelConfig model_config(uint64_t seed) const;
  // Window rule with one sweep-axis value substituted.
  WindowRule rule_for_axis(const std::string& axis, int value) const;

  // Canonical JSON dump of every resolved field, stable across reruns.
  std::string resolved_json() const;
  // '#'-prefixed comment block embedding the resolved config and a content
  // hash of the inputs a command consumed.
  std::string comment_block(const std::vector<std::string>& input_files) const;

  std::string resolve_path(const std::string& path) const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace softrtc
