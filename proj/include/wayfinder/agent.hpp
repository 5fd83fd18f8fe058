#pragma once

#include "wayfinder/cognitive_map.hpp"
#include "wayfinder/gridworld.hpp"
#include "wayfinder/landmark_memory.hpp"
#include "wayfinder/perception.hpp"
#include "wayfinder/planner.hpp"
#include "wayfinder/prompts.hpp"
#include "wayfinder/remote_adapter.hpp"
#include "wayfinder/working_memory.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace wf::agent {

/// Every tunable of the stack in one place.
struct AgentConfig {
  cogmap::MapParams map;
  double overlap_distance = landmark::LandmarkStore::kDefaultOverlapDistance;
  double confidence_floor = landmark::LandmarkStore::kDefaultConfidenceFloor;
  std::size_t k_landmark = 3;
  memory::CognitiveRetrievalParams cognitive;
  double lambda = 0.5;
  double dedup_radius = 0.5;
  /// Pool both branches' candidates instead of falling back on empty.
  bool mix_branches = false;
  double occupancy_resolution = 0.25;
  int scan_views = 12;
  int max_forward_adjust = 3;
  /// Frontier visits allowed; 0 applies the half-the-free-cells rule.
  std::size_t exploration_budget = 0;
  bool unbounded_exploration = false;
  int exploration_step_cap = 20000;
  /// Cosine similarity at which the memoryless baseline accepts a detection
  /// as the instance it searches for.
  double baseline_match_similarity = 0.8;
  sim::SimConfig sim;
  perception::RemoteSettings remote;

  void validate() const;
  nlohmann::json to_json() const;
  static AgentConfig from_json(const nlohmann::json& doc);
  static AgentConfig load(const std::filesystem::path& path);
  /// FNV-1a over the canonical JSON form.
  std::uint64_t hash() const;
};

std::uint64_t fnv1a(std::string_view bytes);

/// Landmark store, cognitive map and occupancy grid built for one scene.
struct Memories {
  landmark::LandmarkStore landmarks;
  cogmap::CognitiveMap cognitive;
  planner::OccupancyGrid occupancy;

  static Memories empty_for(const sim::Scene& scene, const AgentConfig& config);
  void save(const std::filesystem::path& dir) const;
  static Memories load(const std::filesystem::path& dir);
  bool operator==(const Memories& o) const;
};

struct ExploreReport {
  std::size_t frontier_visits = 0;
  std::size_t budget = 0;
  int steps = 0;
  std::string termination;
  cogmap::IntegrateStats integration;
  std::size_t detections = 0;
};

/// Fraction of reachable traversable ground-truth cells that the grid marks
/// as known.
double exploration_coverage(const sim::Scene& scene, const planner::OccupancyGrid& known,
                            const geometry::AgentPose& start);

struct EqaOutcome {
  sim::EpisodeResult episode;
  std::string target;
  std::string answer;
  int score = 1;
};

class Agent {
 public:
  Agent(AgentConfig config, perception::InterfaceSet interfaces,
        perception::PromptLibrary prompts = perception::PromptLibrary::builtin());

  const AgentConfig& config() const { return config_; }

  /// Frontier exploration with a full rotation at every visited frontier.
  ExploreReport explore(sim::GridWorld& world, Memories& memories);

  /// Retrieves, ranks and visits candidates until one verifies, then stops.
  sim::EpisodeResult navigate(sim::GridWorld& world, const Memories& memories, const GoalSpec& goal);

  /// Decomposes an instruction into waypoints and navigates them in order.
  sim::EpisodeResult follow_instruction(sim::GridWorld& world, const Memories& memories,
                                        const std::string& instruction);

  /// Embodied question answering: pick a target with the reasoner, go there,
  /// answer and score against the reference.
  EqaOutcome answer_question(sim::GridWorld& world, const Memories& memories, const std::string& question,
                             const std::string& reference);

  /// Frontier search from scratch with no prior memory.
  sim::EpisodeResult search_without_memory(sim::GridWorld& world, const GoalSpec& goal);

  /// Human-readable log of the last episode (retrievals, visits, checks).
  const std::vector<std::string>& events() const { return events_; }

 private:
  struct Seek {
    bool verified = false;
    int candidates_visited = 0;
    int verifications = 0;
    std::string reason;
  };
  enum class MoveResult { Arrived, Unreachable, Aborted, OutOfSteps };

  Seek seek(sim::GridWorld& world, const Memories& memories, planner::OccupancyGrid& occ, const GoalSpec& goal);
  std::vector<memory::CandidateGoal> retrieve(const Memories& memories, const GoalSpec& goal,
                                              const geometry::AgentPose& from);
  bool verify_here(sim::GridWorld& world, planner::OccupancyGrid& occ, const GoalSpec& goal, const Vec3& target,
                   int& verifications);

  perception::Observation observe(sim::GridWorld& world, planner::OccupancyGrid& occ);
  void map_scan(const perception::Observation& obs, planner::OccupancyGrid& occ) const;
  void ingest(const perception::Observation& obs, Memories& memories, ExploreReport* report);
  /// Executes one action and refreshes the grid. Returns true on collision.
  bool act(sim::GridWorld& world, planner::OccupancyGrid& occ, planner::Action a,
           const std::function<void(const perception::Observation&)>& on_view = {});
  MoveResult move_to(sim::GridWorld& world, planner::OccupancyGrid& occ, planner::Cell target,
                     const std::function<bool()>& abort = {},
                     const std::function<void(const perception::Observation&)>& on_view = {});
  bool turn_to(sim::GridWorld& world, planner::OccupancyGrid& occ, double yaw,
               const std::function<void(const perception::Observation&)>& on_view = {});
  void rotate_scan(sim::GridWorld& world, planner::OccupancyGrid& occ,
                   const std::function<void(const perception::Observation&)>& on_view);
  /// Moves to the reachable cell nearest to `target`.
  MoveResult approach(sim::GridWorld& world, planner::OccupancyGrid& occ, const Vec3& target);
  std::optional<planner::Cell> approach_cell(const planner::OccupancyGrid& occ, planner::Cell from,
                                             const Vec3& target) const;
  Vec3 back_project(const perception::Observation& obs, const perception::Detection& det,
                    const geometry::RigidTransform& mount) const;
  void stop(sim::GridWorld& world);

  AgentConfig config_;
  perception::InterfaceSet io_;
  perception::PromptLibrary prompts_;
  std::vector<std::string> events_;
  // Forward moves that collided, keyed by exact pose, so the follower
  // can sidestep them.
  std::set<std::tuple<double, double, int>> blocked_;
};

/// Runs `navigate` on a fresh world and scores it.
sim::EpisodeResult run_episode(std::shared_ptr<const sim::Scene> scene, Agent& agent, const Memories& memories,
                               const GoalSpec& goal, const geometry::AgentPose& start, std::uint64_t seed);

}  // namespace wf::agent
