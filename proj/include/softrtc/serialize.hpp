#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softrtc/envs.hpp"
#include "softrtc/executor.hpp"
#include "softrtc/model.hpp"

namespace softrtc {

// Shortest text form of a double that reloads to the same bits.
std::string format_double(double v);

// FNV-1a 64-bit content hash, used to stamp outputs with their input identity.
uint64_t fnv1a64(const std::string& bytes);
uint64_t hash_file(const std::string& path);

// Model checkpoint: little-endian binary dump of config + flat parameters
// with a magic tag and version. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

// Demonstration dataset: '#'-prefixed metadata header, then one
// line-delimited record per (observation, chunk) pair. Reloads bit-exactly.
// extra_header lines ('#'-prefixed, newline-terminated) are ignored on load.
void save_dataset(const std::string& path, const Dataset& dataset,
                  const std::string& extra_header = "");
Dataset load_dataset(const std::string& path);

// Rollout log: line-delimited records, one per step plus summary lines.
// Metrics recomputed after a round-trip match the in-memory log bit-exactly.
void save_rollout_log(const std::string& path, const RolloutLog& log);
RolloutLog load_rollout_log(const std::string& path);

// Result table CSV. Comment lines carry the resolved config and input hash;
// the column order is fixed. An optional axis column is prepended for sweeps.
std::string result_csv(const std::vector<ResultRow>& rows,
                       const std::string& config_comment = "",
                       const std::string& axis_name = "",
                       const std::vector<std::string>& axis_values = {});

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace softrtc
