#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wvf/algebra.hpp"
#include "wvf/dynamics.hpp"
#include "wvf/grid.hpp"
#include "wvf/learning.hpp"
#include "wvf/table.hpp"

namespace wvf {

/// Invalid or missing configuration. The message names the field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `section.key = value` file. `#` starts a comment line.
class Config {
 public:
  static Config parse(const std::string& text,
                      std::filesystem::path base_dir = ".");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Path resolved against the config file's directory.
  std::filesystem::path get_path(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }
  /// Source text as given.
  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
  std::string text_;
};

/// `name=definition` pair. Definitions:
///   goals | hallways | cells:x,y;x,y | row:<k|bottom|top> | attr:<attribute>
///   | sup | inf
struct NamedTask {
  std::string name;
  std::string definition;
};

TaskSpec build_task(const GridWorld& grid, const NamedTask& task);

struct ExperimentConfig {
  GridKind kind = GridKind::FourRooms;
  std::filesystem::path map_path;
  NamedTask task{"goals", "goals"};
  RewardParams rewards;
  std::optional<double> penalty;

  LearnConfig learner;

  long eval_episodes = 1000;
  int eval_horizon = 200;

  std::filesystem::path output_dir = "out";
  std::vector<std::uint64_t> seeds{0};
  std::vector<std::string> stages{"learn", "eval", "render"};
  /// "learned" or "oracle": which table downstream stages consume.
  std::string source = "learned";

  int infer_radius = 2;
  std::vector<Cell> infer_probe;

  std::vector<NamedTask> zero_shot_tasks;

  std::vector<NamedTask> compose_tasks;
  std::vector<std::string> compose_exprs;
  bool compose_enumerate = false;

  std::string config_hash;

  static ExperimentConfig from(const Config& config);
  static ExperimentConfig load(const std::filesystem::path& path);
  bool has_stage(const std::string& stage) const;
};

Environment build_environment(const ExperimentConfig& config);

struct EpisodeRecord {
  long episode = 0;
  StateId start = 0;
  double episode_return = 0.0;
  int steps = 0;
  bool truncated = false;
  bool success = false;
};

struct EvalStats {
  double mean_return = 0.0;
  double stddev = 0.0;
  long episodes = 0;
  double success_rate = 0.0;
  long truncated = 0;
};

struct EvalResult {
  EvalStats stats;
  std::vector<EpisodeRecord> episodes;
};

/// Mean and population standard deviation; the mean is the in-order sum
/// divided by the count.
EvalStats summarize(const std::vector<EpisodeRecord>& episodes);

/// Rollouts from the environment's start distribution. An episode succeeds
/// when it terminates with the task's largest terminal reward.
EvalResult evaluate_policy(const Environment& env, const Policy& policy,
                           long episodes, int horizon, std::uint64_t seed);

/// One rollout per listed start state.
EvalResult evaluate_policy_from(const Environment& env, const Policy& policy,
                                std::span<const StateId> starts, int horizon);

void write_episode_csv(std::ostream& out,
                       const std::vector<EpisodeRecord>& episodes);
void write_stats_header(std::ostream& out);
void write_stats_row(std::ostream& out, const std::string& label,
                     const EvalStats& stats);

/// `#rrggbb` on a blue-white-red scale, t clamped to [0, 1].
std::string diverging_colour(double t);

/// One value per state of `grid`. Writes an SVG with one rect per cell;
/// every free cell carries `data-t` (its position on the colour scale).
void render_heatmap(std::ostream& out, const GridWorld& grid,
                    std::span<const double> state_values);

/// Per-goal value maps V̄(·, g) drawn at each goal's grid position, on one
/// shared colour scale.
void render_goal_tiled(std::ostream& out, const GridWorld& grid,
                       const WVFTable& table);

/// Arrows from each probed state to its inferred successor; incorrect
/// successors in red.
void render_transitions(std::ostream& out, const GridWorld& grid,
                        const InferredModel& model,
                        std::span<const StateId> probes);

/// Outcome of a pipeline or a single stage.
struct RunReport {
  std::vector<std::filesystem::path> files;
  std::optional<std::string> failure;
};

/// Stage failure, mapped to exit code 3 by the CLI.
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs every configured stage for every seed. Writes
/// `<out>/seed_<n>/...` and `<out>/manifest.txt`.
RunReport run_experiment(const ExperimentConfig& config);
RunReport run_experiment(const std::filesystem::path& config_path);

// Stand-alone stages. Each writes into `dir` and returns the files written.
std::vector<std::filesystem::path> stage_oracle(const ExperimentConfig& config,
                                                const Environment& env,
                                                const std::filesystem::path& dir);
std::vector<std::filesystem::path> stage_learn(const ExperimentConfig& config,
                                               const Environment& env,
                                               std::uint64_t seed,
                                               const std::filesystem::path& dir);
std::vector<std::filesystem::path> stage_eval(const ExperimentConfig& config,
                                              const Environment& env,
                                              const WVFTable& table,
                                              std::uint64_t seed,
                                              const std::filesystem::path& dir);
std::vector<std::filesystem::path> stage_render(const ExperimentConfig& config,
                                                const Environment& env,
                                                const WVFTable& table,
                                                const std::filesystem::path& dir);
std::vector<std::filesystem::path> stage_infer(const ExperimentConfig& config,
                                               const Environment& env,
                                               const WVFTable& table,
                                               const std::filesystem::path& dir);
std::vector<std::filesystem::path> stage_zero_shot(
    const ExperimentConfig& config, const Environment& env,
    const WVFTable& table, std::uint64_t seed,
    const std::filesystem::path& dir);
/// Base-task and SUP/INF tables come from the oracle when source is
/// "oracle", otherwise from learning with `seed`. `exprs` overrides the
/// configured expressions when non-empty.
std::vector<std::filesystem::path> stage_compose(
    const ExperimentConfig& config, const Environment& env,
    std::uint64_t seed, const std::filesystem::path& dir,
    const std::vector<std::string>& exprs = {});

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace wvf
