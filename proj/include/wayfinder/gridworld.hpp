#pragma once

#include "wayfinder/goal.hpp"
#include "wayfinder/perception_types.hpp"
#include "wayfinder/planner.hpp"
#include "wayfinder/scene.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace wf::sim {

using planner::Action;

struct SimConfig {
  int image_width = 64;
  int image_height = 48;
  double hfov_deg = 87.0;
  double camera_height = 1.5;
  double min_range = 0.3;
  double max_range = 8.0;
  double forward_step = 0.25;
  int headings = 12;
  int step_budget = 500;
  double success_distance = 1.0;
  double detector_base_confidence = 0.95;
  /// Confidence lost per meter of range.
  double detector_range_penalty = 0.03;
  double detector_noise = 0.03;

  geometry::CameraIntrinsics intrinsics() const;
  geometry::RigidTransform camera_mount() const;
};

/// Raycast output for one camera placement.
struct RenderedView {
  perception::Image labels;
  cogmap::DepthImage depth;
  std::vector<float> scan;
};

/// Renders a level camera at (x, y, z) facing `yaw`. Depth outside
/// [min_range, max_range] is NaN. The scan holds the horizontal distance to
/// the first wall or object in each column's vertical plane: +inf when
/// nothing lies within range, NaN when closer than the minimum range.
RenderedView render_view(const Scene& scene, double x, double y, double z, double yaw,
                         const geometry::CameraIntrinsics& k, double min_range, double max_range);

/// Bearing of image column u relative to the optical axis (left positive).
double column_bearing(const geometry::CameraIntrinsics& k, int u);

/// Close-up goal picture of an instance taken from a free viewpoint.
perception::Image render_goal_image(const Scene& scene, int instance_id, std::uint64_t noise_key = 0);

struct StepResult {
  bool collided = false;
  bool finished = false;
};

struct TraceRecord {
  int step = 0;
  geometry::AgentPose pose;
  Action action = Action::Stop;
  bool collided = false;
};

struct EpisodeResult {
  bool success = false;
  bool solvable = true;
  double path_length = 0.0;
  double geodesic = 0.0;
  int steps = 0;
  double stop_distance = 0.0;
  std::string reason;
  int candidates_visited = 0;
  int verifications = 0;
  std::vector<geometry::AgentPose> trajectory;

  bool operator==(const EpisodeResult& o) const {
    return success == o.success && solvable == o.solvable && path_length == o.path_length &&
           geodesic == o.geodesic && steps == o.steps && stop_distance == o.stop_distance && reason == o.reason &&
           candidates_visited == o.candidates_visited && verifications == o.verifications;
  }
};

/// Discrete-action episode on a scene. Headings are multiples of 360/headings
/// degrees; the pose never enters a solid fine cell.
class GridWorld {
 public:
  GridWorld(std::shared_ptr<const Scene> scene, SimConfig config, geometry::AgentPose start, std::uint64_t seed);

  const Scene& scene() const { return *scene_; }
  const std::shared_ptr<const Scene>& scene_ptr() const { return scene_; }
  const SimConfig& config() const { return config_; }
  const geometry::AgentPose& pose() const { return pose_; }
  const geometry::AgentPose& start() const { return start_; }
  int heading() const { return heading_; }
  int steps() const { return steps_; }
  double path_length() const { return path_length_; }
  bool finished() const { return finished_; }
  bool stopped() const { return stopped_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }

  perception::Observation observe() const;
  /// Throws EpisodeFinished once Stop was executed or the budget ran out.
  StepResult step(Action action);

  /// Scores the finished episode against the goal's ground-truth instances.
  EpisodeResult evaluate(const GoalSpec& goal) const;

  void write_trace_jsonl(std::ostream& out) const;

 private:
  bool blocked_segment(double x0, double y0, double x1, double y1) const;
  geometry::AgentPose pose_for(double x, double y, int heading) const;

  std::shared_ptr<const Scene> scene_;
  SimConfig config_;
  std::uint64_t seed_;
  geometry::AgentPose start_;
  geometry::AgentPose pose_;
  int heading_ = 0;
  int steps_ = 0;
  double path_length_ = 0.0;
  bool finished_ = false;
  bool stopped_ = false;
  std::vector<TraceRecord> trace_;
};

/// Heading index closest to a yaw angle.
int heading_index(double yaw, int headings);

/// Top-down render: walls black, objects colored by id, optional trajectory.
void write_ppm(const Scene& scene, const std::vector<geometry::AgentPose>& trajectory,
               const std::filesystem::path& path, int pixels_per_meter = 20);

}  // namespace wf::sim
