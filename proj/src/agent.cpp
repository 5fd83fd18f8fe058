#include "wayfinder/agent.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

namespace wf::agent {

namespace {

using planner::Action;
using planner::Cell;
using planner::CellState;
using planner::OccupancyGrid;

constexpr int kMoveStepCap = 600;
constexpr int kApproachAttempts = 6;

bool is_frontier(const OccupancyGrid& g, Cell c) {
  if (!g.is_free(c)) return false;
  const Cell nbs[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
  for (const auto& n : nbs)
    if (g.in_bounds(n) && g.at(n) == CellState::Unknown) return true;
  return false;
}

OccupancyGrid planning_copy(const OccupancyGrid& occ, Cell cur) {
  OccupancyGrid plan = occ;
  plan.set(cur, CellState::Free);
  return plan;
}

std::string fmt(const Vec3& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.2f, %.2f, %.2f)", p.x(), p.y(), p.z());
  return buf;
}

}  // namespace

Agent::Agent(AgentConfig config, perception::InterfaceSet interfaces, perception::PromptLibrary prompts)
    : config_(std::move(config)), io_(std::move(interfaces)), prompts_(std::move(prompts)) {
  config_.validate();
  io_.validate();
}

perception::Observation Agent::observe(sim::GridWorld& world, OccupancyGrid& occ) {
  auto obs = world.observe();
  map_scan(obs, occ);
  return obs;
}

void Agent::map_scan(const perception::Observation& obs, OccupancyGrid& occ) const {
  const double max_range = config_.sim.max_range;
  if (auto c = occ.cell_of(obs.pose.x, obs.pose.y); c && occ.at(*c) == CellState::Unknown) occ.set(*c, CellState::Free);
  const double step = sim::Scene::kResolution;
  for (int u = 0; u < static_cast<int>(obs.depth_scan.size()); ++u) {
    const float r = obs.depth_scan[static_cast<std::size_t>(u)];
    if (std::isnan(r)) continue;
    const bool hit = std::isfinite(r);
    const double free_len = hit ? r : max_range;
    const double bearing = obs.pose.yaw + sim::column_bearing(obs.intrinsics, u);
    const double dx = std::cos(bearing), dy = std::sin(bearing);
    for (double s = step; s < free_len - 0.01; s += step) {
      const auto c = occ.cell_of(obs.pose.x + s * dx, obs.pose.y + s * dy);
      if (!c) break;
      if (occ.at(*c) == CellState::Unknown) occ.set(*c, CellState::Free);
    }
    if (hit)
      if (const auto c = occ.cell_of(obs.pose.x + (r + 0.01) * dx, obs.pose.y + (r + 0.01) * dy))
        occ.set(*c, CellState::Occupied);
  }
}

Vec3 Agent::back_project(const perception::Observation& obs, const perception::Detection& det,
                         const geometry::RigidTransform& mount) const {
  const Vec3 pc = geometry::pixel_to_camera(det.u, det.v, det.depth_at_center, obs.intrinsics);
  return geometry::camera_to_world(pc, mount, geometry::pose_to_world_transform(obs.pose, 0.0));
}

void Agent::ingest(const perception::Observation& obs, Memories& memories, ExploreReport* report) {
  const auto mount = config_.sim.camera_mount();
  for (const auto& det : io_.detector->detect(obs)) {
    if (!(det.depth_at_center > 0.0) || !std::isfinite(det.depth_at_center)) continue;
    landmark::Landmark l;
    l.category = det.category;
    l.position = back_project(obs, det, mount);
    l.confidence = det.confidence;
    l.description = det.description;
    memories.landmarks.insert(l);
    if (report) ++report->detections;
  }
  const auto patches = io_.encoder->encode(obs.rgb);
  const auto stats = memories.cognitive.integrate(patches, obs.depth, obs.pose, obs.intrinsics, mount);
  if (report) report->integration += stats;
}

bool Agent::act(sim::GridWorld& world, OccupancyGrid& occ, Action a,
                const std::function<void(const perception::Observation&)>& on_view) {
  if (world.finished()) return false;
  const auto before = world.pose();
  const auto r = world.step(a);
  if (r.collided) {
    blocked_.insert({before.x, before.y, world.heading()});
    const auto cur = occ.cell_of(before.x, before.y);
    for (double s = 0.05; s <= 0.3 + 1e-9; s += 0.05) {
      const auto c = occ.cell_of(before.x + s * std::cos(before.yaw), before.y + s * std::sin(before.yaw));
      if (c && c != cur) {
        occ.set(*c, CellState::Occupied);
        break;
      }
    }
  }
  if (!world.finished()) {
    const auto obs = observe(world, occ);
    if (on_view) on_view(obs);
  }
  return r.collided;
}

bool Agent::turn_to(sim::GridWorld& world, OccupancyGrid& occ, double yaw,
                    const std::function<void(const perception::Observation&)>& on_view) {
  const planner::MotionModel motion;
  for (int i = 0; i < config_.sim.headings && !world.finished(); ++i) {
    const double err = geometry::normalize_angle(yaw - world.pose().yaw);
    if (std::abs(err) <= motion.heading_tolerance + 1e-9) return true;
    act(world, occ, planner::turn_toward(err), on_view);
  }
  return !world.finished();
}

void Agent::rotate_scan(sim::GridWorld& world, OccupancyGrid& occ,
                        const std::function<void(const perception::Observation&)>& on_view) {
  if (world.finished()) return;
  on_view(observe(world, occ));
  for (int i = 1; i < config_.scan_views && !world.finished(); ++i) act(world, occ, Action::TurnLeft, on_view);
}

Agent::MoveResult Agent::move_to(sim::GridWorld& world, OccupancyGrid& occ, Cell target,
                                 const std::function<bool()>& abort,
                                 const std::function<void(const perception::Observation&)>& on_view) {
  const planner::MotionModel motion;
  const double step = 2.0 * geometry::kPi / config_.sim.headings;
  std::deque<Action> forced;
  for (int n = 0;; ++n) {
    if (world.finished()) return MoveResult::OutOfSteps;
    if (abort && abort()) return MoveResult::Aborted;
    const auto pose = world.pose();
    const auto [tx, ty] = occ.center(target);
    if (std::hypot(tx - pose.x, ty - pose.y) < motion.arrival_radius) return MoveResult::Arrived;
    if (n >= kMoveStepCap) return MoveResult::Unreachable;

    Action a;
    if (!forced.empty()) {
      a = forced.front();
      forced.pop_front();
    } else {
      const auto cur = occ.cell_of(pose.x, pose.y);
      if (!cur) return MoveResult::Unreachable;
      const auto plan = planning_copy(occ, *cur);
      if (!plan.is_free(target)) return MoveResult::Unreachable;
      auto path = planner::astar(plan, *cur, target, planner::CornerRule::AnyBlocked);
      if (!path) path = planner::astar(plan, *cur, target, planner::CornerRule::BothBlocked);
      if (!path) return MoveResult::Unreachable;
      a = planner::next_action(path->path, pose, plan, motion);
      if (a == Action::Stop) return MoveResult::Arrived;
      if (a == Action::Forward && blocked_.count({pose.x, pose.y, world.heading()})) {
        // Sidestep: the closest heading to the next cell that has not
        // collided from this exact pose.
        const Cell next = path->path.size() > 1 ? path->path[1] : target;
        const auto [nx, ny] = plan.center(next);
        const double bearing = std::atan2(ny - pose.y, nx - pose.x);
        int best = 0;
        double best_err = std::numeric_limits<double>::infinity();
        for (int d = -3; d <= 3; ++d) {
          if (d == 0) continue;
          const int h = ((world.heading() + d) % config_.sim.headings + config_.sim.headings) % config_.sim.headings;
          if (blocked_.count({pose.x, pose.y, h})) continue;
          const double err = std::abs(geometry::normalize_angle(bearing - h * step));
          if (err < best_err - 1e-12) {
            best_err = err;
            best = d;
          }
        }
        if (best == 0) return MoveResult::Unreachable;
        for (int i = 0; i < std::abs(best); ++i) forced.push_back(best > 0 ? Action::TurnLeft : Action::TurnRight);
        forced.push_back(Action::Forward);
        a = forced.front();
        forced.pop_front();
      }
    }
    if (act(world, occ, a, on_view)) forced.clear();
  }
}

std::optional<Cell> Agent::approach_cell(const OccupancyGrid& occ, Cell from, const Vec3& target) const {
  const auto plan = planning_copy(occ, from);
  const auto reach = planner::reachable_cells(plan, from, planner::CornerRule::AnyBlocked);
  std::optional<Cell> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < reach.size(); ++i) {
    if (!reach[i]) continue;
    const Cell c = plan.cell_at_index(i);
    const auto [cx, cy] = plan.center(c);
    const double d = std::hypot(cx - target.x(), cy - target.y());
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Agent::MoveResult Agent::approach(sim::GridWorld& world, OccupancyGrid& occ, const Vec3& target) {
  // The map keeps sharpening on the way, so the approach cell is re-picked
  // whenever the current one turns out to be blocked.
  std::optional<Cell> last;
  for (int attempt = 0; attempt < kApproachAttempts; ++attempt) {
    const auto cur = occ.cell_of(world.pose().x, world.pose().y);
    if (!cur) return MoveResult::Unreachable;
    const auto ap = approach_cell(occ, *cur, target);
    if (!ap || ap == last) return MoveResult::Unreachable;
    last = ap;
    const auto mr = move_to(world, occ, *ap);
    if (mr != MoveResult::Unreachable) return mr;
  }
  return MoveResult::Unreachable;
}

void Agent::stop(sim::GridWorld& world) {
  if (!world.finished()) world.step(Action::Stop);
}

std::vector<memory::CandidateGoal> Agent::retrieve(const Memories& memories, const GoalSpec& goal,
                                                   const geometry::AgentPose& from) {
  auto landmark_branch = [&]() -> std::vector<memory::CandidateGoal> {
    if (!goal.text || memories.landmarks.empty()) return {};
    try {
      auto c = memory::retrieve_landmark_candidates(goal, memories.landmarks, *io_.reasoner, prompts_,
                                                    config_.k_landmark);
      events_.push_back("landmark branch: " + std::to_string(c.size()) + " candidates");
      return c;
    } catch (const RetrievalUnavailable& e) {
      events_.push_back(std::string("landmark branch unavailable: ") + e.what());
      return {};
    }
  };
  auto cognitive_branch = [&]() -> std::vector<memory::CandidateGoal> {
    if (memories.cognitive.empty()) return {};
    try {
      auto c = memory::retrieve_cognitive_candidates(goal, memories.cognitive, *io_.enricher, *io_.imaginer,
                                                     *io_.encoder, config_.cognitive);
      events_.push_back("cognitive branch: " + std::to_string(c.size()) + " candidates");
      return c;
    } catch (const RetrievalUnavailable& e) {
      events_.push_back(std::string("cognitive branch unavailable: ") + e.what());
      return {};
    }
  };

  const bool landmark_first = goal.modality == GoalModality::Category || goal.modality == GoalModality::Waypoint;
  auto cands = landmark_first ? landmark_branch() : cognitive_branch();
  if (cands.empty() || config_.mix_branches) {
    auto more = landmark_first ? cognitive_branch() : landmark_branch();
    cands.insert(cands.end(), more.begin(), more.end());
  }
  if (cands.empty()) return cands;
  cands = memory::deduplicate_candidates(std::move(cands), config_.dedup_radius);
  cands = memory::rank_candidates(std::move(cands), from, config_.lambda);
  const std::size_t cap = config_.k_landmark + config_.cognitive.q;
  if (cands.size() > cap) cands.resize(cap);
  return cands;
}

bool Agent::verify_here(sim::GridWorld& world, OccupancyGrid& occ, const GoalSpec& goal, const Vec3& target,
                        int& verifications) {
  struct View {
    double yaw;
    perception::Verification v;
  };
  std::optional<View> best;
  auto check = [&](const perception::Observation& obs) {
    const auto v = io_.verifier->verify(obs, goal);
    ++verifications;
    if (v.success && (!best || (best->v.need_forward && !v.need_forward))) best = View{obs.pose.yaw, v};
    return v.success && !v.need_forward;
  };

  const auto pose = world.pose();
  turn_to(world, occ, std::atan2(target.y() - pose.y, target.x() - pose.x));
  if (world.finished()) return false;
  bool done = check(observe(world, occ));
  for (int i = 1; i < config_.scan_views && !done && !world.finished(); ++i)
    act(world, occ, Action::TurnLeft, [&](const perception::Observation& o) { done = check(o); });
  if (!best) {
    events_.push_back("verification failed near " + fmt(target));
    return false;
  }
  turn_to(world, occ, best->yaw);
  auto current = best->v;
  for (int f = 0; f < config_.max_forward_adjust && current.need_forward && !world.finished(); ++f) {
    bool seen = false;
    const bool collided = act(world, occ, Action::Forward, [&](const perception::Observation& o) {
      current = io_.verifier->verify(o, goal);
      ++verifications;
      seen = true;
    });
    if (collided || !seen || !current.success) break;
  }
  events_.push_back("verified near " + fmt(target));
  return true;
}

Agent::Seek Agent::seek(sim::GridWorld& world, const Memories& memories, OccupancyGrid& occ, const GoalSpec& goal) {
  Seek s;
  const auto cands = retrieve(memories, goal, world.pose());
  if (cands.empty()) {
    s.reason = "retrieval-empty";
    return s;
  }
  for (const auto& c : cands) {
    if (world.finished()) break;
    ++s.candidates_visited;
    events_.push_back("visiting " + std::string(memory::to_string(c.source)) + " candidate " + fmt(c.position) +
                      " p=" + std::to_string(c.p) + " H=" + std::to_string(c.priority));
    const auto mr = approach(world, occ, c.position);
    if (mr == MoveResult::OutOfSteps) break;
    if (mr != MoveResult::Arrived) {
      events_.push_back("candidate unreachable");
      continue;
    }
    if (verify_here(world, occ, goal, c.position, s.verifications)) {
      s.verified = true;
      return s;
    }
  }
  s.reason = world.finished() ? "step-budget-exhausted" : "all-candidates-failed";
  return s;
}

sim::EpisodeResult Agent::navigate(sim::GridWorld& world, const Memories& memories, const GoalSpec& goal) {
  goal.validate();
  events_.clear();
  blocked_.clear();
  OccupancyGrid occ = memories.occupancy;
  const auto s = seek(world, memories, occ, goal);
  stop(world);
  auto res = world.evaluate(goal);
  res.candidates_visited = s.candidates_visited;
  res.verifications = s.verifications;
  if (!res.success && !s.reason.empty()) res.reason = s.reason;
  return res;
}

sim::EpisodeResult Agent::follow_instruction(sim::GridWorld& world, const Memories& memories,
                                             const std::string& instruction) {
  events_.clear();
  blocked_.clear();
  std::vector<std::string> waypoints;
  try {
    perception::PromptRequest req;
    req.role = perception::roles::kInstructionDecomposition;
    req.prompt = prompts_.render(req.role, {{"text_prompt", instruction}});
    req.fields = {{"instruction", instruction}};
    waypoints = perception::parse_decomposition(io_.reasoner->complete(req));
  } catch (const Error& e) {
    events_.push_back(std::string("decomposition failed: ") + e.what());
    stop(world);
    auto res = world.evaluate(GoalSpec::waypoint(instruction));
    res.success = false;
    res.reason = "decomposition-failed";
    return res;
  }

  OccupancyGrid occ = memories.occupancy;
  int visited = 0, verifications = 0;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    events_.push_back("waypoint " + std::to_string(i + 1) + ": " + waypoints[i]);
    const auto s = seek(world, memories, occ, GoalSpec::waypoint(waypoints[i]));
    visited += s.candidates_visited;
    verifications += s.verifications;
    if (!s.verified) {
      stop(world);
      auto res = world.evaluate(GoalSpec::waypoint(waypoints.back()));
      res.success = false;
      res.reason = "waypoint-" + std::to_string(i + 1) + "-failed";
      res.candidates_visited = visited;
      res.verifications = verifications;
      return res;
    }
  }
  stop(world);
  auto res = world.evaluate(GoalSpec::waypoint(waypoints.back()));
  res.candidates_visited = visited;
  res.verifications = verifications;
  return res;
}

EqaOutcome Agent::answer_question(sim::GridWorld& world, const Memories& memories, const std::string& question,
                                  const std::string& reference) {
  events_.clear();
  blocked_.clear();
  EqaOutcome out;
  nlohmann::json categories = nlohmann::json::array();
  for (const auto& l : memories.landmarks.landmarks()) categories.push_back(l.category);
  perception::PromptRequest req;
  req.role = perception::roles::kEqaWaypoint;
  req.prompt = prompts_.render(req.role, {{"text_prompt", question}});
  req.fields = {{"question", question}, {"categories", categories}};
  try {
    out.target = io_.reasoner->complete(req);
  } catch (const RetrievalUnavailable&) {
    out.target = std::string(perception::kGoAroundSentinel);
  }

  OccupancyGrid occ = memories.occupancy;
  GoalSpec goal = GoalSpec::waypoint(out.target);
  int visited = 0, verifications = 0;
  if (out.target.find(perception::kGoAroundSentinel) == std::string::npos) {
    const auto s = seek(world, memories, occ, goal);
    visited = s.candidates_visited;
    verifications = s.verifications;
  }
  stop(world);
  out.episode = world.evaluate(goal);
  out.episode.candidates_visited = visited;
  out.episode.verifications = verifications;

  // Describe whatever landmark the agent ended up next to.
  std::string observed = "unknown";
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : memories.landmarks.landmarks()) {
    const double d = std::hypot(l.position.x() - world.pose().x, l.position.y() - world.pose().y);
    if (d < best && d <= 2.0) {
      best = d;
      observed = l.description;
    }
  }
  perception::PromptRequest ans;
  ans.role = perception::roles::kAnswer;
  ans.prompt = "Answer the question about what you see.\nQuestion: " + question;
  ans.fields = {{"question", question}, {"observed_description", observed}};
  try {
    out.answer = io_.reasoner->complete(ans);
  } catch (const RetrievalUnavailable&) {
    out.answer = "unknown";
  }
  out.score = io_.scorer->score(question, reference, out.answer);
  return out;
}

sim::EpisodeResult Agent::search_without_memory(sim::GridWorld& world, const GoalSpec& goal) {
  goal.validate();
  events_.clear();
  blocked_.clear();
  auto occ = Memories::empty_for(world.scene(), config_).occupancy;

  std::optional<cogmap::FeatureVector> goal_feat;
  if (goal.modality == GoalModality::TextInstance || goal.modality == GoalModality::ImageInstance) {
    try {
      goal_feat = memory::goal_feature(goal, *io_.enricher, *io_.imaginer, *io_.encoder, config_.cognitive);
    } catch (const RetrievalUnavailable&) {
    }
  }
  const auto mount = config_.sim.camera_mount();
  std::vector<Vec3> rejected;
  std::optional<Vec3> pending;
  auto on_view = [&](const perception::Observation& obs) {
    if (pending) return;
    const auto dets = io_.detector->detect(obs);
    std::optional<cogmap::PatchGrid> grid;
    for (const auto& det : dets) {
      bool match = false;
      if (goal_feat) {
        if (!grid) grid = io_.encoder->encode(obs.rgb);
        const int i = std::min(grid->rows - 1, static_cast<int>(det.v) / grid->stride);
        const int j = std::min(grid->cols - 1, static_cast<int>(det.u) / grid->stride);
        match = cogmap::cosine_similarity(grid->at(i, j), *goal_feat) >= config_.baseline_match_similarity;
      } else if (goal.text) {
        match = landmark::same_category(det.category, *goal.text) || det.description == *goal.text;
      }
      if (!match || !(det.depth_at_center > 0.0)) continue;
      const Vec3 p = back_project(obs, det, mount);
      if (std::any_of(rejected.begin(), rejected.end(), [&](const Vec3& r) { return (r - p).norm() < 1.0; })) continue;
      pending = p;
      return;
    }
  };

  int visited = 0, verifications = 0;
  bool verified = false;
  std::set<Cell> blacklist;
  rotate_scan(world, occ, on_view);
  while (!world.finished() && !verified) {
    if (pending) {
      const Vec3 cand = *pending;
      pending.reset();
      ++visited;
      if (approach(world, occ, cand) == MoveResult::Arrived && verify_here(world, occ, goal, cand, verifications))
        verified = true;
      else
        rejected.push_back(cand);
      continue;
    }
    auto frontiers = planner::find_frontiers(occ);
    const auto cur = occ.cell_of(world.pose().x, world.pose().y);
    if (!cur) break;
    const auto reach = planner::reachable_cells(planning_copy(occ, *cur), *cur, planner::CornerRule::AnyBlocked);
    std::erase_if(frontiers, [&](const Cell& c) { return blacklist.count(c) || !reach[occ.index(c)]; });
    const auto target = planner::nearest_cell(frontiers, *cur);
    if (!target) break;
    const auto mr = move_to(
        world, occ, *target, [&] { return pending.has_value() || !is_frontier(occ, *target); }, on_view);
    if (mr == MoveResult::OutOfSteps) break;
    if (mr == MoveResult::Unreachable) blacklist.insert(*target);
    if (mr != MoveResult::Arrived) continue;
    blacklist.insert(*target);
    if (world.finished()) break;
    on_view(observe(world, occ));
    for (int i = 1; i < config_.scan_views && !world.finished() && !pending; ++i)
      act(world, occ, Action::TurnLeft, on_view);
  }
  stop(world);
  auto res = world.evaluate(goal);
  res.candidates_visited = visited;
  res.verifications = verifications;
  if (!res.success && res.reason.empty()) res.reason = verified ? "verified-but-too-far" : "not-found";
  return res;
}

ExploreReport Agent::explore(sim::GridWorld& world, Memories& memories) {
  events_.clear();
  blocked_.clear();
  ExploreReport report;
  auto& occ = memories.occupancy;
  if (config_.unbounded_exploration) report.budget = std::numeric_limits<std::size_t>::max();
  else if (config_.exploration_budget > 0) report.budget = config_.exploration_budget;
  else report.budget = planner::exploration_budget(world.scene().traversable_grid(occ.resolution()));

  auto on_view = [&](const perception::Observation& obs) { ingest(obs, memories, &report); };
  rotate_scan(world, occ, on_view);
  std::set<Cell> blacklist;
  report.termination = "step-cap";
  while (!world.finished()) {
    if (report.frontier_visits >= report.budget) {
      report.termination = "budget";
      break;
    }
    auto frontiers = planner::find_frontiers(occ);
    const auto cur = occ.cell_of(world.pose().x, world.pose().y);
    if (!cur) break;
    const auto reach = planner::reachable_cells(planning_copy(occ, *cur), *cur, planner::CornerRule::AnyBlocked);
    std::erase_if(frontiers, [&](const Cell& c) { return blacklist.count(c) || !reach[occ.index(c)]; });
    const auto target = planner::nearest_cell(frontiers, *cur);
    if (!target) {
      report.termination = "no-frontiers";
      break;
    }
    const auto mr = move_to(world, occ, *target, [&] { return !is_frontier(occ, *target); }, on_view);
    if (mr == MoveResult::OutOfSteps) break;
    if (mr == MoveResult::Unreachable) blacklist.insert(*target);
    if (mr != MoveResult::Arrived) continue;
    rotate_scan(world, occ, on_view);
    blacklist.insert(*target);
    ++report.frontier_visits;
  }
  report.steps = world.steps();
  return report;
}

double exploration_coverage(const sim::Scene& scene, const OccupancyGrid& known, const geometry::AgentPose& start) {
  const auto truth = scene.traversable_grid(known.resolution());
  const auto cell = truth.cell_of(start.x, start.y);
  require(cell.has_value() && truth.is_free(*cell), "coverage start must be traversable");
  const auto reach = planner::reachable_cells(truth, *cell);
  std::size_t total = 0, seen = 0;
  for (std::size_t i = 0; i < reach.size(); ++i) {
    if (!reach[i]) continue;
    ++total;
    const Cell c = truth.cell_at_index(i);
    if (known.in_bounds(c) && known.at(c) != CellState::Unknown) ++seen;
  }
  return total ? static_cast<double>(seen) / total : 1.0;
}

sim::EpisodeResult run_episode(std::shared_ptr<const sim::Scene> scene, Agent& agent, const Memories& memories,
                               const GoalSpec& goal, const geometry::AgentPose& start, std::uint64_t seed) {
  sim::GridWorld world(std::move(scene), agent.config().sim, start, seed);
  return agent.navigate(world, memories, goal);
}

}  // namespace wf::agent
