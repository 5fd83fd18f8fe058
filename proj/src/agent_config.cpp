#include "wayfinder/agent.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace wf::agent {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void AgentConfig::validate() const {
  try {
    map.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  need(overlap_distance > 0.0, "overlap_distance must be positive");
  need(confidence_floor >= 0.0 && confidence_floor <= 1.0, "confidence_floor must lie in [0, 1]");
  need(cognitive.images >= 1, "cognitive.images must be at least 1");
  need(cognitive.alpha >= 0.0, "cognitive.alpha must be non-negative");
  need(cognitive.topk_voxels >= 1, "cognitive.topk_voxels must be at least 1");
  need(cognitive.eps >= 0 && cognitive.min_pts >= 1, "invalid clustering parameters");
  need(cognitive.cluster_score_ratio >= 0.0 && cognitive.cluster_score_ratio <= 1.0,
       "cognitive.cluster_score_ratio must lie in [0, 1]");
  need(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  need(dedup_radius >= 0.0, "dedup_radius must be non-negative");
  need(occupancy_resolution > 0.0, "occupancy_resolution must be positive");
  need(scan_views >= 1, "scan_views must be at least 1");
  need(max_forward_adjust >= 0, "max_forward_adjust must be non-negative");
  need(exploration_step_cap >= 1, "exploration_step_cap must be positive");
  need(baseline_match_similarity >= -1.0 && baseline_match_similarity <= 1.0,
       "baseline_match_similarity must lie in [-1, 1]");
  need(sim.image_width > 0 && sim.image_height > 0, "image size must be positive");
  need(sim.hfov_deg > 0.0 && sim.hfov_deg < 180.0, "hfov_deg must lie in (0, 180)");
  need(sim.min_range > 0.0 && sim.max_range > sim.min_range, "invalid depth range");
  need(sim.forward_step > 0.0, "forward_step must be positive");
  need(sim.headings >= 4, "headings must be at least 4");
  need(sim.step_budget >= 1, "step_budget must be positive");
  need(sim.success_distance > 0.0, "success_distance must be positive");
  need(remote.max_attempts >= 1 && remote.timeout_s > 0.0 && remote.backoff_ms >= 0, "invalid remote settings");
}

json AgentConfig::to_json() const {
  return {
      {"map",
       {{"delta", map.grid.delta}, {"g", map.grid.g}, {"buffer_capacity", map.buffer_capacity},
        {"tau", map.tau}, {"hop", map.hop}}},
      {"landmarks", {{"overlap_distance", overlap_distance}, {"confidence_floor", confidence_floor}}},
      {"k_landmark", k_landmark},
      {"cognitive",
       {{"q", cognitive.q},
        {"images", cognitive.images},
        {"alpha", cognitive.alpha},
        {"topk_voxels", cognitive.topk_voxels},
        {"eps", cognitive.eps},
        {"min_pts", cognitive.min_pts},
        {"cluster_score_ratio", cognitive.cluster_score_ratio}}},
      {"lambda", lambda},
      {"dedup_radius", dedup_radius},
      {"mix_branches", mix_branches},
      {"occupancy_resolution", occupancy_resolution},
      {"scan_views", scan_views},
      {"max_forward_adjust", max_forward_adjust},
      {"exploration",
       {{"budget", exploration_budget}, {"unbounded", unbounded_exploration}, {"step_cap", exploration_step_cap}}},
      {"baseline_match_similarity", baseline_match_similarity},
      {"sim",
       {{"image_width", sim.image_width},
        {"image_height", sim.image_height},
        {"hfov_deg", sim.hfov_deg},
        {"camera_height", sim.camera_height},
        {"min_range", sim.min_range},
        {"max_range", sim.max_range},
        {"forward_step", sim.forward_step},
        {"headings", sim.headings},
        {"step_budget", sim.step_budget},
        {"success_distance", sim.success_distance},
        {"detector_base_confidence", sim.detector_base_confidence},
        {"detector_range_penalty", sim.detector_range_penalty},
        {"detector_noise", sim.detector_noise}}},
      {"remote",
       {{"base_url", remote.base_url},
        {"chat_model", remote.chat_model},
        {"image_model", remote.image_model},
        {"timeout_s", remote.timeout_s},
        {"max_attempts", remote.max_attempts},
        {"backoff_ms", remote.backoff_ms},
        {"transcript_path", remote.transcript_path}}},
  };
}

AgentConfig AgentConfig::from_json(const json& doc) {
  AgentConfig c;
  check_keys(doc,
             {"map", "landmarks", "k_landmark", "cognitive", "lambda", "dedup_radius", "mix_branches",
              "occupancy_resolution", "scan_views", "max_forward_adjust", "exploration", "baseline_match_similarity",
              "sim", "remote"},
             "config");
  if (doc.contains("map")) {
    const auto& m = doc["map"];
    check_keys(m, {"delta", "g", "buffer_capacity", "tau", "hop"}, "map");
    read(m, "delta", c.map.grid.delta);
    read(m, "g", c.map.grid.g);
    read(m, "buffer_capacity", c.map.buffer_capacity);
    read(m, "tau", c.map.tau);
    read(m, "hop", c.map.hop);
  }
  if (doc.contains("landmarks")) {
    const auto& l = doc["landmarks"];
    check_keys(l, {"overlap_distance", "confidence_floor"}, "landmarks");
    read(l, "overlap_distance", c.overlap_distance);
    read(l, "confidence_floor", c.confidence_floor);
  }
  read(doc, "k_landmark", c.k_landmark);
  if (doc.contains("cognitive")) {
    const auto& g = doc["cognitive"];
    check_keys(g, {"q", "images", "alpha", "topk_voxels", "eps", "min_pts", "cluster_score_ratio"}, "cognitive");
    read(g, "q", c.cognitive.q);
    read(g, "images", c.cognitive.images);
    read(g, "alpha", c.cognitive.alpha);
    read(g, "topk_voxels", c.cognitive.topk_voxels);
    read(g, "eps", c.cognitive.eps);
    read(g, "min_pts", c.cognitive.min_pts);
    read(g, "cluster_score_ratio", c.cognitive.cluster_score_ratio);
  }
  read(doc, "lambda", c.lambda);
  read(doc, "dedup_radius", c.dedup_radius);
  read(doc, "mix_branches", c.mix_branches);
  read(doc, "occupancy_resolution", c.occupancy_resolution);
  read(doc, "scan_views", c.scan_views);
  read(doc, "max_forward_adjust", c.max_forward_adjust);
  if (doc.contains("exploration")) {
    const auto& e = doc["exploration"];
    check_keys(e, {"budget", "unbounded", "step_cap"}, "exploration");
    read(e, "budget", c.exploration_budget);
    read(e, "unbounded", c.unbounded_exploration);
    read(e, "step_cap", c.exploration_step_cap);
  }
  read(doc, "baseline_match_similarity", c.baseline_match_similarity);
  if (doc.contains("sim")) {
    const auto& s = doc["sim"];
    check_keys(s,
               {"image_width", "image_height", "hfov_deg", "camera_height", "min_range", "max_range", "forward_step",
                "headings", "step_budget", "success_distance", "detector_base_confidence", "detector_range_penalty",
                "detector_noise"},
               "sim");
    read(s, "image_width", c.sim.image_width);
    read(s, "image_height", c.sim.image_height);
    read(s, "hfov_deg", c.sim.hfov_deg);
    read(s, "camera_height", c.sim.camera_height);
    read(s, "min_range", c.sim.min_range);
    read(s, "max_range", c.sim.max_range);
    read(s, "forward_step", c.sim.forward_step);
    read(s, "headings", c.sim.headings);
    read(s, "step_budget", c.sim.step_budget);
    read(s, "success_distance", c.sim.success_distance);
    read(s, "detector_base_confidence", c.sim.detector_base_confidence);
    read(s, "detector_range_penalty", c.sim.detector_range_penalty);
    read(s, "detector_noise", c.sim.detector_noise);
  }
  if (doc.contains("remote")) {
    const auto& r = doc["remote"];
    check_keys(r, {"base_url", "chat_model", "image_model", "timeout_s", "max_attempts", "backoff_ms",
                   "transcript_path"},
               "remote");
    read(r, "base_url", c.remote.base_url);
    read(r, "chat_model", c.remote.chat_model);
    read(r, "image_model", c.remote.image_model);
    read(r, "timeout_s", c.remote.timeout_s);
    read(r, "max_attempts", c.remote.max_attempts);
    read(r, "backoff_ms", c.remote.backoff_ms);
    read(r, "transcript_path", c.remote.transcript_path);
  }
  c.validate();
  return c;
}

AgentConfig AgentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

std::uint64_t AgentConfig::hash() const { return fnv1a(to_json().dump()); }

Memories Memories::empty_for(const sim::Scene& scene, const AgentConfig& config) {
  const double res = config.occupancy_resolution;
  const int w = static_cast<int>(std::ceil(scene.width_m() / res - 1e-9));
  const int h = static_cast<int>(std::ceil(scene.height_m() / res - 1e-9));
  return Memories{landmark::LandmarkStore(config.overlap_distance, config.confidence_floor),
                  cogmap::CognitiveMap(config.map),
                  planner::OccupancyGrid(w, h, res, 0.0, 0.0, planner::CellState::Unknown)};
}

void Memories::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  landmarks.save(dir / "landmarks.json");
  cognitive.save(dir / "cogmap.bscm");
  planner::write_pgm(occupancy, dir / "occupancy.pgm");
}

Memories Memories::load(const std::filesystem::path& dir) {
  return Memories{landmark::LandmarkStore::load(dir / "landmarks.json"),
                  cogmap::CognitiveMap::load(dir / "cogmap.bscm"), planner::read_pgm(dir / "occupancy.pgm")};
}

bool Memories::operator==(const Memories& o) const {
  return landmarks.landmarks() == o.landmarks.landmarks() &&
         landmarks.overlap_distance() == o.landmarks.overlap_distance() &&
         landmarks.confidence_floor() == o.landmarks.confidence_floor() && cognitive == o.cognitive &&
         occupancy == o.occupancy;
}

}  // namespace wf::agent
