#include "wayfinder/agent.hpp"
#include "wayfinder/benchmark.hpp"
#include "wayfinder/mock_perception.hpp"
#include "wayfinder/remote_adapter.hpp"
#include "wayfinder/scene.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace wf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTaskFailure = 1;
constexpr int kExitConfigError = 2;

struct Common {
  std::uint64_t seed = 1;
  std::string config;
  bool remote = false;
  int workers = 0;
};

agent::AgentConfig load_config(const Common& c) {
  return c.config.empty() ? agent::AgentConfig{} : agent::AgentConfig::load(c.config);
}

// A scene argument is either a scene JSON file or a bare generator seed.
std::shared_ptr<const sim::Scene> load_scene(const std::string& arg) {
  if (fs::exists(arg)) return std::make_shared<const sim::Scene>(sim::Scene::load(arg));
  std::size_t used = 0;
  std::uint64_t seed = 0;
  try {
    seed = std::stoull(arg, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != arg.size() || arg.empty()) throw ConfigError("scene '" + arg + "' is neither a file nor a seed");
  return std::make_shared<const sim::Scene>(sim::generate_scene(seed));
}

perception::InterfaceSet make_interfaces(std::shared_ptr<const sim::Scene> scene, const Common& c,
                                         const agent::AgentConfig& cfg) {
  auto base = perception::make_mock_interfaces(scene, c.seed);
  if (!c.remote) return base;
  auto settings = perception::RemoteSettings::from_env(cfg.remote);
  settings.validate();
  return perception::make_remote_interfaces(std::move(base), settings, perception::PromptLibrary::builtin());
}

geometry::AgentPose random_start(const sim::Scene& scene, double resolution, std::uint64_t seed) {
  const auto grid = scene.traversable_grid(resolution);
  std::vector<planner::Cell> free;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.cells()[i] == planner::CellState::Free) free.push_back(grid.cell_at_index(i));
  if (free.empty()) throw ConfigError("scene has no traversable cell");
  std::mt19937_64 rng(seed);
  const auto [x, y] = grid.center(free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)]);
  return {x, y, 0.0};
}

geometry::AgentPose parse_start(const std::string& text) {
  double x = 0, y = 0, yaw_deg = 0;
  char extra = 0;
  const int n = std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &x, &y, &yaw_deg, &extra);
  if (n != 2 && n != 3) throw ConfigError("start must be x,y[,yaw_deg]");
  return {x, y, yaw_deg * geometry::kPi / 180.0};
}

// category:<name> | text:<description> | image:<instance id>
GoalSpec parse_goal(const std::string& spec, const sim::Scene& scene) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("goal must look like kind:value");
  const std::string kind = spec.substr(0, colon), value = spec.substr(colon + 1);
  if (value.empty()) throw ConfigError("goal value is empty");
  if (kind == "category") return GoalSpec::category(value);
  if (kind == "text") return GoalSpec::text_instance(value);
  if (kind == "waypoint") return GoalSpec::waypoint(value);
  if (kind == "image") {
    int id = -1;
    try {
      id = std::stoi(value);
    } catch (const std::exception&) {
      throw ConfigError("image goal needs an instance id");
    }
    if (!scene.instance(id)) throw ConfigError("no instance " + value + " in scene");
    return GoalSpec::image_instance(sim::render_goal_image(scene, id));
  }
  throw ConfigError("unknown goal kind '" + kind + "'");
}

void print_result(const sim::EpisodeResult& r) {
  nlohmann::json j = {{"success", r.success},
                      {"solvable", r.solvable},
                      {"path_length", r.path_length},
                      {"geodesic", std::isfinite(r.geodesic) ? nlohmann::json(r.geodesic) : nlohmann::json(nullptr)},
                      {"steps", r.steps},
                      {"stop_distance", std::isfinite(r.stop_distance) ? nlohmann::json(r.stop_distance)
                                                                       : nlohmann::json(nullptr)},
                      {"candidates_visited", r.candidates_visited},
                      {"verifications", r.verifications},
                      {"reason", r.reason}};
  std::cout << j.dump(2) << '\n';
}

int cmd_generate(std::uint64_t seed, const std::string& out, const std::string& ppm) {
  const auto scene = sim::generate_scene(seed);
  scene.save(out);
  if (!ppm.empty()) sim::write_ppm(scene, {}, ppm);
  std::cout << "scene " << seed << ": " << scene.width_m() << " x " << scene.height_m() << " m, "
            << scene.instances().size() << " instances\n";
  return kExitOk;
}

int cmd_explore(const std::string& scene_arg, const std::string& out, const std::string& start_arg, const Common& c) {
  const auto cfg = load_config(c);
  const auto scene = load_scene(scene_arg);
  const auto start = start_arg.empty() ? random_start(*scene, cfg.occupancy_resolution, c.seed) : parse_start(start_arg);
  agent::Agent agent(cfg, make_interfaces(scene, c, cfg));
  auto memories = agent::Memories::empty_for(*scene, cfg);
  auto sim_cfg = cfg.sim;
  sim_cfg.step_budget = cfg.exploration_step_cap;
  sim::GridWorld world(scene, sim_cfg, start, c.seed);
  const auto report = agent.explore(world, memories);
  memories.save(out);
  const double coverage = agent::exploration_coverage(*scene, memories.occupancy, start);
  std::cout << "frontier visits " << report.frontier_visits << " / budget " << report.budget << ", steps "
            << report.steps << ", termination " << report.termination << "\n"
            << "landmarks " << memories.landmarks.size() << ", features " << memories.cognitive.feature_count()
            << ", coverage " << coverage << "\n";
  return kExitOk;
}

int cmd_navigate(const std::string& scene_arg, const std::string& mem, const std::string& goal_arg,
                 const std::string& instruction, const std::string& start_arg, const std::string& trace,
                 const Common& c) {
  const auto cfg = load_config(c);
  const auto scene = load_scene(scene_arg);
  if (goal_arg.empty() == instruction.empty()) throw ConfigError("give exactly one of --goal or --instruction");
  const auto memories = agent::Memories::load(mem);
  const auto start = start_arg.empty() ? random_start(*scene, cfg.occupancy_resolution, c.seed + 1) : parse_start(start_arg);
  agent::Agent agent(cfg, make_interfaces(scene, c, cfg));
  sim::GridWorld world(scene, cfg.sim, start, c.seed);
  const auto result = instruction.empty() ? agent.navigate(world, memories, parse_goal(goal_arg, *scene))
                                          : agent.follow_instruction(world, memories, instruction);
  for (const auto& e : agent.events()) std::cerr << e << '\n';
  if (!trace.empty()) {
    std::ofstream out(trace);
    world.write_trace_jsonl(out);
  }
  print_result(result);
  return result.success ? kExitOk : kExitTaskFailure;
}

int cmd_bench(const std::string& suite_path, const std::string& out, const Common& c) {
  auto suite = eval::SuiteConfig::load(suite_path);
  if (c.workers > 0) suite.workers = c.workers;
  if (!out.empty()) suite.out_dir = out;
  if (!c.config.empty()) suite.agent = load_config(c);
  eval::InterfaceFactory factory = eval::mock_factory();
  if (c.remote) {
    Common rc = c;
    factory = [rc, cfg = suite.agent](std::shared_ptr<const sim::Scene> scene, std::uint64_t seed) {
      Common local = rc;
      local.seed = seed;
      return make_interfaces(std::move(scene), local, cfg);
    };
  }
  const auto report = eval::run_benchmark(suite, factory);
  std::printf("%-16s %-10s %8s %8s %8s\n", "task", "method", "episodes", "SR", "SPL");
  for (const auto& s : report.summaries)
    std::printf("%-16s %-10s %8zu %8.3f %8.3f\n", s.task.c_str(), s.method.c_str(), s.episodes, s.sr, s.spl);
  std::printf("config %016llx, %.1f s\n", static_cast<unsigned long long>(report.config_hash), report.wall_clock_s);
  for (const auto& s : report.scenes)
    if (!s.error.empty()) std::fprintf(stderr, "scene %llu failed: %s\n", static_cast<unsigned long long>(s.seed), s.error.c_str());
  return kExitOk;
}

int cmd_inspect(const std::string& mem, const std::string& out) {
  const auto memories = agent::Memories::load(mem);
  std::cout << memories.landmarks.to_json().dump(2) << '\n';
  if (out.empty()) return kExitOk;
  fs::create_directories(out);
  {
    std::ofstream f(fs::path(out) / "landmarks.json");
    f << memories.landmarks.to_json().dump(2) << '\n';
  }
  {
    std::ofstream f(fs::path(out) / "voxels.csv");
    memories.cognitive.write_occupancy_csv(f);
  }
  planner::write_pgm(memories.occupancy, fs::path(out) / "occupancy.pgm");
  std::cerr << memories.cognitive.voxel_count() << " voxels, " << memories.cognitive.feature_count()
            << " features written to " << out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-guided object-goal navigation in procedural homes"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Random seed");
    sub->add_option("--config", common.config, "Agent configuration JSON");
    auto* mock = sub->add_flag("--mock", "Use the simulated perception stack (default)");
    sub->add_flag("--remote", common.remote, "Use an OpenAI-compatible endpoint")->excludes(mock);
    sub->add_option("--workers", common.workers, "Parallel scenes for bench");
  };

  std::uint64_t gen_seed = 1;
  std::string gen_out, gen_ppm;
  auto* gen = app.add_subcommand("generate-scene", "Write a procedural scene as JSON");
  gen->add_option("seed", gen_seed, "Generator seed")->required();
  gen->add_option("--out", gen_out, "Scene JSON path")->required();
  gen->add_option("--ppm", gen_ppm, "Optional top-down PPM");

  std::string scene_arg, out_dir, start_arg;
  auto* explore = app.add_subcommand("explore", "Explore a scene and persist its memories");
  explore->add_option("scene", scene_arg, "Scene JSON or generator seed")->required();
  explore->add_option("--out", out_dir, "Memory directory")->required();
  explore->add_option("--start", start_arg, "x,y[,yaw_deg]");
  add_common(explore);

  std::string mem_dir, goal_arg, instruction, trace;
  auto* nav = app.add_subcommand("navigate", "Navigate to a goal using stored memories");
  nav->add_option("scene", scene_arg, "Scene JSON or generator seed")->required();
  nav->add_option("--mem", mem_dir, "Memory directory")->required();
  nav->add_option("--goal", goal_arg, "category:<name> | text:<description> | image:<instance id>");
  nav->add_option("--instruction", instruction, "Multi-step instruction");
  nav->add_option("--start", start_arg, "x,y[,yaw_deg]");
  nav->add_option("--trace", trace, "Write the trajectory as JSONL");
  add_common(nav);

  std::string suite_path, bench_out;
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  bench->add_option("suite", suite_path, "Suite JSON")->required();
  bench->add_option("--out", bench_out, "Report directory");
  add_common(bench);

  std::string inspect_out;
  auto* inspect = app.add_subcommand("inspect", "Dump stored memories");
  inspect->add_option("memdir", mem_dir, "Memory directory")->required();
  inspect->add_option("--out", inspect_out, "Write landmarks.json, voxels.csv and occupancy.pgm here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*gen) return cmd_generate(gen_seed, gen_out, gen_ppm);
    if (*explore) return cmd_explore(scene_arg, out_dir, start_arg, common);
    if (*nav) return cmd_navigate(scene_arg, mem_dir, goal_arg, instruction, start_arg, trace, common);
    if (*bench) return cmd_bench(suite_path, bench_out, common);
    if (*inspect) return cmd_inspect(mem_dir, inspect_out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const RetrievalUnavailable& e) {
    std::cerr << "retrieval unavailable: " << e.what() << '\n';
    return kExitTaskFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTaskFailure;
  }
  return kExitOk;
}
