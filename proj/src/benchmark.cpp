#include "wayfinder/benchmark.hpp"

#include "wayfinder/mock_perception.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <thread>

namespace wf::eval {

namespace {

using nlohmann::json;

constexpr std::uint64_t kExploreSalt = 0x6578706c6f7265ULL;
constexpr std::uint64_t kEpisodeSalt = 0x6570697364ULL;
constexpr std::uint64_t kBaselineSalt = 0x626173656c696e65ULL;

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

json scene_config_json(const sim::SceneConfig& c) {
  return {{"min_room_rows", c.min_room_rows},
          {"max_room_rows", c.max_room_rows},
          {"min_room_cols", c.min_room_cols},
          {"max_room_cols", c.max_room_cols},
          {"min_room_size", c.min_room_size},
          {"max_room_size", c.max_room_size},
          {"min_instances_per_room", c.min_instances_per_room},
          {"max_instances_per_room", c.max_instances_per_room},
          {"feature_dim", c.feature_dim}};
}

json suite_json(const SuiteConfig& s) {
  return {{"scene_seeds", s.scene_seeds},
          {"goals", {{"category", s.category_goals}, {"text_instance", s.text_goals}, {"image_instance", s.image_goals}}},
          {"min_start_geodesic", s.min_start_geodesic},
          {"baseline", s.baseline},
          {"scene", scene_config_json(s.scene)},
          {"agent", s.agent.to_json()}};
}

// Random traversable coarse-cell center, preferring starts far enough
// from the goal region.
geometry::AgentPose pick_start(const sim::Scene& scene, const planner::OccupancyGrid& grid,
                               const std::vector<planner::Cell>& free, const GoalSpec& goal, double radius,
                               double min_geodesic, std::mt19937_64& rng) {
  std::vector<Vec3> centers;
  for (const auto* inst : perception::goal_instances(scene, goal)) centers.push_back(inst->center());
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  std::uniform_int_distribution<int> heading(0, 11);
  std::optional<geometry::AgentPose> fallback;
  double fallback_len = 0.0;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const auto [x, y] = grid.center(free[pick(rng)]);
    const double yaw = heading(rng) * geometry::kPi / 6.0;
    const geometry::AgentPose pose{x, y, yaw};
    if (centers.empty()) return pose;
    const double len = sim::geodesic_to_any(scene, x, y, centers, radius);
    if (!std::isfinite(len)) continue;
    if (len >= min_geodesic) return pose;
    if (len > fallback_len) {
      fallback_len = len;
      fallback = pose;
    }
  }
  if (fallback) return *fallback;
  const auto [x, y] = grid.center(free.front());
  return {x, y, 0.0};
}

std::vector<planner::Cell> free_cells(const planner::OccupancyGrid& grid) {
  std::vector<planner::Cell> out;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.cells()[i] == planner::CellState::Free) out.push_back(grid.cell_at_index(i));
  return out;
}

EpisodeRow make_row(const EpisodeSpec& ep, const std::string& method, const sim::EpisodeResult& r) {
  EpisodeRow row;
  row.scene_seed = ep.scene_seed;
  row.episode = ep.index;
  row.task = ep.task;
  row.method = method;
  row.goal = ep.goal.label();
  row.success = r.success;
  row.solvable = r.solvable;
  row.path_length = r.path_length;
  row.geodesic = r.geodesic;
  row.steps = r.steps;
  row.stop_distance = r.stop_distance;
  row.candidates_visited = r.candidates_visited;
  row.verifications = r.verifications;
  row.reason = r.reason;
  return row;
}

EpisodeRow crash_row(const EpisodeSpec& ep, const std::string& method, const std::exception& e) {
  EpisodeRow row;
  row.scene_seed = ep.scene_seed;
  row.episode = ep.index;
  row.task = ep.task;
  row.method = method;
  row.goal = ep.goal.label();
  row.success = false;
  row.reason = std::string("error: ") + e.what();
  return row;
}

json record_json(const SceneRecord& r) {
  return {{"seed", r.seed},
          {"coverage", r.coverage},
          {"frontier_visits", r.frontier_visits},
          {"budget", r.budget},
          {"exploration_steps", r.exploration_steps},
          {"landmarks", r.landmarks},
          {"features", r.features}};
}

struct SceneOutcome {
  SceneRecord record;
  std::vector<EpisodeRow> rows;
};

SceneOutcome run_scene(std::uint64_t seed, const SuiteConfig& suite, const InterfaceFactory& factory) {
  SceneOutcome out;
  out.record.seed = seed;
  try {
    auto scene = std::make_shared<const sim::Scene>(sim::generate_scene(seed, suite.scene));
    agent::Agent agent(suite.agent, factory(scene, seed));
    const std::filesystem::path dir =
        suite.memory_dir.empty() ? std::filesystem::path{} : std::filesystem::path(suite.memory_dir) / ("scene_" + std::to_string(seed));

    agent::Memories memories = agent::Memories::empty_for(*scene, suite.agent);
    if (suite.reuse_memories) {
      memories = agent::Memories::load(dir);
      std::ifstream in(dir / "explore.json");
      if (!in) throw ConfigError("missing exploration record in " + dir.string());
      const json j = json::parse(in);
      out.record.coverage = j.at("coverage").get<double>();
      out.record.frontier_visits = j.at("frontier_visits").get<std::size_t>();
      out.record.budget = j.at("budget").get<std::size_t>();
      out.record.exploration_steps = j.at("exploration_steps").get<int>();
    } else {
      std::mt19937_64 rng(perception::hash_words({seed, kExploreSalt}));
      const auto grid = scene->traversable_grid(suite.agent.occupancy_resolution);
      const auto cells = free_cells(grid);
      require(!cells.empty(), "scene has no traversable cell");
      const auto [x, y] = grid.center(cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng)]);
      const geometry::AgentPose start{x, y, 0.0};
      auto cfg = suite.agent.sim;
      cfg.step_budget = suite.agent.exploration_step_cap;
      sim::GridWorld world(scene, cfg, start, perception::hash_words({seed, kExploreSalt, 1}));
      const auto rep = agent.explore(world, memories);
      out.record.coverage = agent::exploration_coverage(*scene, memories.occupancy, start);
      out.record.frontier_visits = rep.frontier_visits;
      out.record.budget = rep.budget;
      out.record.exploration_steps = rep.steps;
    }
    out.record.landmarks = memories.landmarks.size();
    out.record.features = memories.cognitive.feature_count();
    if (!suite.memory_dir.empty() && !suite.reuse_memories) {
      memories.save(dir);
      std::ofstream(dir / "explore.json") << record_json(out.record).dump(2) << '\n';
    }

    for (const auto& ep : make_episodes(*scene, seed, suite)) {
      try {
        sim::GridWorld world(scene, suite.agent.sim, ep.start, ep.seed);
        const auto r = agent.navigate(world, memories, ep.goal);
        out.rows.push_back(make_row(ep, "memory", r));
        out.record.trajectories.push_back(r.trajectory);
      } catch (const std::exception& e) {
        out.rows.push_back(crash_row(ep, "memory", e));
      }
      if (!suite.baseline) continue;
      try {
        sim::GridWorld world(scene, suite.agent.sim, ep.start, perception::hash_words({ep.seed, kBaselineSalt}));
        out.rows.push_back(make_row(ep, "baseline", agent.search_without_memory(world, ep.goal)));
      } catch (const std::exception& e) {
        out.rows.push_back(crash_row(ep, "baseline", e));
      }
    }
  } catch (const std::exception& e) {
    out.record.error = e.what();
  }
  return out;
}

}  // namespace

InterfaceFactory mock_factory() {
  return [](std::shared_ptr<const sim::Scene> scene, std::uint64_t seed) {
    return perception::make_mock_interfaces(std::move(scene), seed);
  };
}

void SuiteConfig::validate() const {
  if (scene_seeds.empty()) throw ConfigError("suite lists no scene seeds");
  if (category_goals < 0 || text_goals < 0 || image_goals < 0) throw ConfigError("goal counts must be non-negative");
  if (category_goals + text_goals + image_goals == 0) throw ConfigError("suite has no goals per scene");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (reuse_memories && memory_dir.empty()) throw ConfigError("reuse_memories needs memory_dir");
  if (min_start_geodesic < 0.0) throw ConfigError("min_start_geodesic must be non-negative");
  agent.validate();
}

SuiteConfig SuiteConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("suite must be a JSON object");
  SuiteConfig s;
  if (doc.contains("scene_seeds")) read(doc, "scene_seeds", s.scene_seeds);
  if (doc.contains("scenes")) {
    std::uint64_t first = 1, count = 0;
    read(doc["scenes"], "first", first);
    read(doc["scenes"], "count", count);
    for (std::uint64_t i = 0; i < count; ++i) s.scene_seeds.push_back(first + i);
  }
  if (doc.contains("goals")) {
    read(doc["goals"], "category", s.category_goals);
    read(doc["goals"], "text_instance", s.text_goals);
    read(doc["goals"], "image_instance", s.image_goals);
  }
  read(doc, "min_start_geodesic", s.min_start_geodesic);
  read(doc, "baseline", s.baseline);
  read(doc, "workers", s.workers);
  read(doc, "memory_dir", s.memory_dir);
  read(doc, "reuse_memories", s.reuse_memories);
  read(doc, "out_dir", s.out_dir);
  read(doc, "plot_scenes", s.plot_scenes);
  if (doc.contains("scene")) {
    const auto& c = doc["scene"];
    read(c, "min_room_rows", s.scene.min_room_rows);
    read(c, "max_room_rows", s.scene.max_room_rows);
    read(c, "min_room_cols", s.scene.min_room_cols);
    read(c, "max_room_cols", s.scene.max_room_cols);
    read(c, "min_room_size", s.scene.min_room_size);
    read(c, "max_room_size", s.scene.max_room_size);
    read(c, "min_instances_per_room", s.scene.min_instances_per_room);
    read(c, "max_instances_per_room", s.scene.max_instances_per_room);
    read(c, "feature_dim", s.scene.feature_dim);
  }
  if (doc.contains("agent")) s.agent = agent::AgentConfig::from_json(doc["agent"]);
  s.validate();
  return s;
}

SuiteConfig SuiteConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open suite " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("malformed suite " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

std::vector<EpisodeSpec> make_episodes(const sim::Scene& scene, std::uint64_t scene_seed, const SuiteConfig& suite) {
  std::mt19937_64 rng(perception::hash_words({scene_seed, kEpisodeSalt}));
  const auto grid = scene.traversable_grid(suite.agent.occupancy_resolution);
  const auto cells = free_cells(grid);
  require(!cells.empty(), "scene has no traversable cell");
  std::vector<EpisodeSpec> out;
  auto add = [&](std::string task, GoalSpec goal) {
    EpisodeSpec ep;
    ep.scene_seed = scene_seed;
    ep.index = static_cast<int>(out.size());
    ep.task = std::move(task);
    ep.start = pick_start(scene, grid, cells, goal, suite.agent.sim.success_distance, suite.min_start_geodesic, rng);
    ep.goal = std::move(goal);
    ep.seed = perception::hash_words({scene_seed, kEpisodeSalt, static_cast<std::uint64_t>(ep.index)});
    out.push_back(std::move(ep));
  };

  auto cats = scene.categories();
  std::shuffle(cats.begin(), cats.end(), rng);
  for (int i = 0; i < suite.category_goals && !cats.empty(); ++i)
    add("category", GoalSpec::category(cats[static_cast<std::size_t>(i) % cats.size()]));

  const auto& instances = scene.instances();
  if (instances.empty()) return out;
  std::vector<std::size_t> order(instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t next = 0;
  for (int i = 0; i < suite.text_goals; ++i)
    add("text_instance", GoalSpec::text_instance(instances[order[next++ % order.size()]].description));
  for (int i = 0; i < suite.image_goals; ++i) {
    const auto& inst = instances[order[next++ % order.size()]];
    add("image_instance",
        GoalSpec::image_instance(sim::render_goal_image(scene, inst.id, perception::hash_words({scene_seed, 0x696d67ULL,
                                                                                                static_cast<std::uint64_t>(inst.id)}))));
  }
  return out;
}

sim::EpisodeResult EpisodeRow::result() const {
  sim::EpisodeResult r;
  r.success = success;
  r.solvable = solvable;
  r.path_length = path_length;
  r.geodesic = geodesic;
  r.steps = steps;
  r.stop_distance = stop_distance;
  r.candidates_visited = candidates_visited;
  r.verifications = verifications;
  r.reason = reason;
  return r;
}

std::vector<EpisodeRow> BenchmarkReport::rows_for(const std::string& method) const {
  std::vector<EpisodeRow> out;
  for (const auto& r : rows)
    if (r.method == method) out.push_back(r);
  return out;
}

const TaskSummary* BenchmarkReport::summary(const std::string& task, const std::string& method) const {
  for (const auto& s : summaries)
    if (s.task == task && s.method == method) return &s;
  return nullptr;
}

std::vector<TaskSummary> summarize(const std::vector<EpisodeRow>& rows) {
  std::vector<std::string> methods, tasks;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
  }
  tasks.push_back("all");
  std::vector<TaskSummary> out;
  for (const auto& m : methods) {
    for (const auto& t : tasks) {
      std::vector<sim::EpisodeResult> results;
      std::vector<double> terms;
      for (const auto& r : rows) {
        if (r.method != m || (t != "all" && r.task != t)) continue;
        results.push_back(r.result());
        terms.push_back(spl_term(results.back()));
      }
      if (results.empty()) continue;
      out.push_back({t, m, results.size(), success_rate(results), spl(results), mean_std(terms)});
    }
  }
  return out;
}

json BenchmarkReport::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows)
    rows_j.push_back({{"scene_seed", r.scene_seed},
                      {"episode", r.episode},
                      {"task", r.task},
                      {"method", r.method},
                      {"goal", r.goal},
                      {"success", r.success},
                      {"solvable", r.solvable},
                      {"path_length", r.path_length},
                      {"geodesic", std::isfinite(r.geodesic) ? json(r.geodesic) : json(nullptr)},
                      {"steps", r.steps},
                      {"stop_distance", std::isfinite(r.stop_distance) ? json(r.stop_distance) : json(nullptr)},
                      {"candidates_visited", r.candidates_visited},
                      {"verifications", r.verifications},
                      {"reason", r.reason}});
  json sums = json::array();
  for (const auto& s : summaries)
    sums.push_back({{"task", s.task},
                    {"method", s.method},
                    {"episodes", s.episodes},
                    {"sr", s.sr},
                    {"spl", s.spl},
                    {"spl_std", s.spl_spread.stddev}});
  json scenes_j = json::array();
  for (const auto& s : scenes) {
    auto j = record_json(s);
    if (!s.error.empty()) j["error"] = s.error;
    scenes_j.push_back(j);
  }
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  return {{"config_hash", hash}, {"wall_clock_s", wall_clock_s}, {"summaries", sums}, {"scenes", scenes_j},
          {"episodes", rows_j}};
}

BenchmarkReport run_benchmark(const SuiteConfig& suite, const InterfaceFactory& factory) {
  suite.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<SceneOutcome> outcomes(suite.scene_seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < outcomes.size(); i = next++)
      outcomes[i] = run_scene(suite.scene_seeds[i], suite, factory);
  };
  const int n = std::max(1, std::min<int>(suite.workers, static_cast<int>(outcomes.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BenchmarkReport report;
  for (auto& o : outcomes) {
    report.rows.insert(report.rows.end(), o.rows.begin(), o.rows.end());
    report.scenes.push_back(std::move(o.record));
  }
  report.summaries = summarize(report.rows);
  report.config_hash = agent::fnv1a(suite_json(suite).dump());
  report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!suite.out_dir.empty()) write_report(report, suite, suite.out_dir);
  return report;
}

}  // namespace wf::eval
