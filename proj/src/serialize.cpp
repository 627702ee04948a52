#include "softrtc/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace softrtc {

std::string format_double(double v) {
  char buf[40];
  // 17 significant digits round-trip IEEE doubles exactly.
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t hash_file(const std::string& path) { return fnv1a64(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'R', 'T', 'C', 'C', 'K', 'P', '1'};

template <typename T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& in, size_t& off) {
  if (off + sizeof(T) > in.size()) throw std::runtime_error("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::string out;
  out.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<int32_t>(out, params.config.obs_dim);
  put<int32_t>(out, params.config.horizon);
  put<int32_t>(out, params.config.action_dim);
  put<uint64_t>(out, params.config.seed);
  put<int32_t>(out, static_cast<int32_t>(params.config.hidden.size()));
  for (int h : params.config.hidden) put<int32_t>(out, h);
  put<uint64_t>(out, params.flat.size());
  for (double v : params.flat) put<double>(out, v);
  write_text_file(path, out);
}

ModelParams load_checkpoint(const std::string& path) {
  std::string in = read_text_file(path);
  if (in.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(in.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  size_t off = sizeof(kCheckpointMagic);

  ModelParams params;
  params.config.obs_dim = take<int32_t>(in, off);
  params.config.horizon = take<int32_t>(in, off);
  params.config.action_dim = take<int32_t>(in, off);
  params.config.seed = take<uint64_t>(in, off);
  int32_t n_hidden = take<int32_t>(in, off);
  params.config.hidden.clear();
  for (int32_t i = 0; i < n_hidden; ++i) params.config.hidden.push_back(take<int32_t>(in, off));
  uint64_t count = take<uint64_t>(in, off);
  params.flat.resize(count);
  for (uint64_t i = 0; i < count; ++i) params.flat[i] = take<double>(in, off);
  params.config.validate();
  return params;
}

namespace {

void write_vec(std::ostream& out, const Vec& v) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out << ' ';
    out << format_double(v[i]);
  }
}

Vec parse_doubles(const std::string& line) {
  Vec v;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) v.push_back(std::strtod(tok.c_str(), nullptr));
  return v;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& dataset,
                  const std::string& extra_header) {
  std::ostringstream out;
  out << "# softrtc-dataset v1\n";
  out << extra_header;
  out << "# task " << dataset.task << "\n";
  out << "# episodes " << dataset.demo_episodes << "\n";
  out << "# horizon " << dataset.horizon << "\n";
  out << "# seed " << dataset.seed << "\n";
  out << "# env " << format_double(dataset.spec.dt) << ' ' << dataset.spec.episode_len << ' '
      << format_double(dataset.spec.action_bound) << ' '
      << format_double(dataset.spec.solve_threshold) << ' ' << dataset.spec.solve_tail << ' '
      << dataset.spec.horizon << ' ' << dataset.spec.switch_step << ' '
      << format_double(dataset.spec.init_jitter) << "\n";
  out << "# pairs " << dataset.pairs.size() << "\n";
  for (const auto& [obs, chunk] : dataset.pairs) {
    out << "O ";
    write_vec(out, obs);
    out << "\nA " << chunk.rows << ' ' << chunk.cols << ' ';
    write_vec(out, chunk.data);
    out << "\n";
  }
  write_text_file(path, out.str());
}

Dataset load_dataset(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "# softrtc-dataset v1")
    throw std::runtime_error("not a dataset file: " + path);

  Dataset ds;
  size_t n_pairs = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# task ", 0) == 0) {
      ds.task = line.substr(7);
      ds.spec.task = task_from_name(ds.task);
    } else if (line.rfind("# episodes ", 0) == 0) {
      ds.demo_episodes = std::stoi(line.substr(11));
    } else if (line.rfind("# horizon ", 0) == 0) {
      ds.horizon = std::stoi(line.substr(10));
    } else if (line.rfind("# seed ", 0) == 0) {
      ds.seed = std::stoull(line.substr(7));
    } else if (line.rfind("# env ", 0) == 0) {
      Vec f = parse_doubles(line.substr(6));
      if (f.size() != 8) throw std::runtime_error("bad env header in " + path);
      ds.spec.dt = f[0];
      ds.spec.episode_len = static_cast<int>(f[1]);
      ds.spec.action_bound = f[2];
      ds.spec.solve_threshold = f[3];
      ds.spec.solve_tail = static_cast<int>(f[4]);
      ds.spec.horizon = static_cast<int>(f[5]);
      ds.spec.switch_step = static_cast<int>(f[6]);
      ds.spec.init_jitter = f[7];
    } else if (line.rfind("# pairs ", 0) == 0) {
      n_pairs = std::stoul(line.substr(8));
      break;
    }
  }

  for (size_t i = 0; i < n_pairs; ++i) {
    std::string obs_line, act_line;
    if (!std::getline(in, obs_line) || !std::getline(in, act_line))
      throw std::runtime_error("dataset truncated: " + path);
    if (obs_line.rfind("O ", 0) != 0 || act_line.rfind("A ", 0) != 0)
      throw std::runtime_error("malformed dataset record in " + path);
    Vec obs = parse_doubles(obs_line.substr(2));
    Vec fields = parse_doubles(act_line.substr(2));
    int rows = static_cast<int>(fields[0]);
    int cols = static_cast<int>(fields[1]);
    ActionChunk chunk(rows, cols);
    if (fields.size() != 2 + static_cast<size_t>(rows) * cols)
      throw std::runtime_error("malformed chunk in " + path);
    std::copy(fields.begin() + 2, fields.end(), chunk.data.begin());
    ds.pairs.emplace_back(std::move(obs), std::move(chunk));
  }
  return ds;
}

void save_rollout_log(const std::string& path, const RolloutLog& log) {
  std::ostringstream out;
  out << "# softrtc-rollout v1\n";
  out << "# steps " << log.length() << "\n";
  for (int i = 0; i < log.length(); ++i) {
    out << "S " << log.provenance[i].first << ' ' << log.provenance[i].second << ' '
        << format_double(log.rewards[i]) << ' ' << format_double(log.errors[i]) << ' ';
    write_vec(out, log.actions[i]);
    out << "\n";
  }
  out << "B";
  for (int b : log.boundaries) out << ' ' << b;
  out << "\nG";
  for (double g : log.gen_seconds) out << ' ' << format_double(g);
  out << "\nR " << format_double(log.episode_return) << ' ' << (log.solved ? 1 : 0) << "\n";
  write_text_file(path, out.str());
}

RolloutLog load_rollout_log(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "# softrtc-rollout v1")
    throw std::runtime_error("not a rollout log: " + path);

  RolloutLog log;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == 'S') {
      Vec f = parse_doubles(line.substr(2));
      if (f.size() < 5) throw std::runtime_error("malformed step line in " + path);
      log.provenance.emplace_back(static_cast<int>(f[0]), static_cast<int>(f[1]));
      log.rewards.push_back(f[2]);
      log.errors.push_back(f[3]);
      log.actions.emplace_back(f.begin() + 4, f.end());
    } else if (line[0] == 'B') {
      for (double b : parse_doubles(line.substr(1))) log.boundaries.push_back(static_cast<int>(b));
    } else if (line[0] == 'G') {
      log.gen_seconds = parse_doubles(line.substr(1));
    } else if (line[0] == 'R') {
      Vec f = parse_doubles(line.substr(2));
      log.episode_return = f[0];
      log.solved = f[1] != 0.0;
    }
  }
  return log;
}

std::string result_csv(const std::vector<ResultRow>& rows, const std::string& config_comment,
                       const std::string& axis_name, const std::vector<std::string>& axis_values) {
  require(axis_name.empty() == axis_values.empty() || axis_values.size() == rows.size(),
          "result_csv: axis values must match row count");
  std::ostringstream out;
  if (!config_comment.empty()) out << config_comment;
  if (!axis_name.empty()) out << axis_name << ',';
  out << "method,task,delay,seed,return,solve,action_delta,action_jerk,boundary_jump\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const ResultRow& r = rows[i];
    if (!axis_name.empty()) out << axis_values[i] << ',';
    out << r.method << ',' << r.task << ',' << r.delay << ',' << r.seed << ','
        << format_double(r.ret) << ',' << (r.solve ? 1 : 0) << ','
        << format_double(r.action_delta) << ',' << format_double(r.action_jerk) << ','
        << format_double(r.boundary_jump) << "\n";
  }
  return out.str();
}

}  // namespace softrtc
