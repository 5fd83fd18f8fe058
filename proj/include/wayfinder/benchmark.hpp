#pragma once

#include "wayfinder/agent.hpp"
#include "wayfinder/metrics.hpp"
#include "wayfinder/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace wf::eval {

/// Builds the perception stack for one scene.
using InterfaceFactory = std::function<perception::InterfaceSet(std::shared_ptr<const sim::Scene>, std::uint64_t)>;

InterfaceFactory mock_factory();

struct SuiteConfig {
  std::vector<std::uint64_t> scene_seeds;
  int category_goals = 2;
  int text_goals = 1;
  int image_goals = 1;
  /// Episodes start at least this geodesic distance from the goal region
  /// when such a cell exists.
  double min_start_geodesic = 2.0;
  bool baseline = true;
  int workers = 1;
  /// Persist memories under this directory, one subdirectory per scene.
  std::string memory_dir;
  /// Load memories from `memory_dir` instead of exploring.
  bool reuse_memories = false;
  /// Where run outputs go; empty writes nothing.
  std::string out_dir;
  /// Scenes that get a trajectory plot.
  int plot_scenes = 2;
  sim::SceneConfig scene;
  agent::AgentConfig agent;

  void validate() const;
  static SuiteConfig from_json(const nlohmann::json& doc);
  static SuiteConfig load(const std::filesystem::path& path);
};

struct EpisodeSpec {
  std::uint64_t scene_seed = 0;
  int index = 0;
  std::string task;
  GoalSpec goal;
  geometry::AgentPose start;
  std::uint64_t seed = 0;
};

/// Goals and starts for one scene, derived from the scene seed alone.
std::vector<EpisodeSpec> make_episodes(const sim::Scene& scene, std::uint64_t scene_seed, const SuiteConfig& suite);

struct EpisodeRow {
  std::uint64_t scene_seed = 0;
  int episode = 0;
  std::string task;
  std::string method;
  std::string goal;
  bool success = false;
  bool solvable = true;
  double path_length = 0.0;
  double geodesic = 0.0;
  int steps = 0;
  double stop_distance = 0.0;
  int candidates_visited = 0;
  int verifications = 0;
  std::string reason;

  sim::EpisodeResult result() const;
  bool operator==(const EpisodeRow&) const = default;
};

struct SceneRecord {
  std::uint64_t seed = 0;
  double coverage = 0.0;
  std::size_t frontier_visits = 0;
  std::size_t budget = 0;
  int exploration_steps = 0;
  std::size_t landmarks = 0;
  std::size_t features = 0;
  std::string error;
  /// Memory-guided trajectories, kept for plotting only.
  std::vector<std::vector<geometry::AgentPose>> trajectories;
};

struct TaskSummary {
  std::string task;
  std::string method;
  std::size_t episodes = 0;
  double sr = 0.0;
  double spl = 0.0;
  MeanStd spl_spread;
};

struct BenchmarkReport {
  std::vector<EpisodeRow> rows;
  std::vector<SceneRecord> scenes;
  std::vector<TaskSummary> summaries;
  std::uint64_t config_hash = 0;
  double wall_clock_s = 0.0;

  std::vector<EpisodeRow> rows_for(const std::string& method) const;
  const TaskSummary* summary(const std::string& task, const std::string& method) const;
  nlohmann::json to_json() const;
};

/// Per-task and overall SR/SPL for every method present in the rows.
std::vector<TaskSummary> summarize(const std::vector<EpisodeRow>& rows);

BenchmarkReport run_benchmark(const SuiteConfig& suite, const InterfaceFactory& factory = mock_factory());

void write_csv(const std::vector<EpisodeRow>& rows, std::ostream& out);
std::vector<EpisodeRow> read_csv(std::istream& in);

/// Grouped SR/SPL bars per task and method.
void write_summary_svg(const std::vector<TaskSummary>& summaries, const std::filesystem::path& path);
/// Top-down floor plan with instances and trajectories.
void write_trajectory_svg(const sim::Scene& scene, const std::vector<std::vector<geometry::AgentPose>>& trajectories,
                          const std::filesystem::path& path);

/// report.json, episodes.csv, summary.svg and per-scene trajectory plots.
void write_report(const BenchmarkReport& report, const SuiteConfig& suite, const std::filesystem::path& dir);

}  // namespace wf::eval
