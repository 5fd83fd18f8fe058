#include "wayfinder/gridworld.hpp"

#include "wayfinder/mock_perception.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>

namespace wf::sim {

namespace {

constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();
constexpr float kInf = std::numeric_limits<float>::infinity();

struct Span {
  double r_in;
  double r_out;
  const Instance* inst;
};

// Horizontal distance along unit direction (dx, dy) to the first wall cell.
double march_walls(const Scene& scene, double x, double y, double dx, double dy) {
  const double res = Scene::kResolution;
  int ix = scene.fine_x(x), iy = scene.fine_y(y);
  if (scene.wall(ix, iy)) return 0.0;
  const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  const double inf = std::numeric_limits<double>::infinity();
  const double tdx = dx != 0.0 ? res / std::abs(dx) : inf;
  const double tdy = dy != 0.0 ? res / std::abs(dy) : inf;
  double tx = dx != 0.0 ? ((dx > 0 ? (ix + 1) * res : ix * res) - x) / dx : inf;
  double ty = dy != 0.0 ? ((dy > 0 ? (iy + 1) * res : iy * res) - y) / dy : inf;
  for (;;) {
    double t;
    if (tx < ty) {
      t = tx;
      tx += tdx;
      ix += sx;
    } else {
      t = ty;
      ty += tdy;
      iy += sy;
    }
    if (scene.wall(ix, iy)) return t;
  }
}

std::vector<Span> disc_spans(const Scene& scene, double x, double y, double dx, double dy, double limit) {
  std::vector<Span> out;
  for (const auto& inst : scene.instances()) {
    const double cx = inst.x - x, cy = inst.y - y;
    const double b = cx * dx + cy * dy;
    const double c2 = cx * cx + cy * cy - inst.radius * inst.radius;
    const double disc = b * b - c2;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    const double r_in = b - sq, r_out = b + sq;
    if (r_in <= 0.0 || r_in >= limit) continue;
    out.push_back({r_in, r_out, &inst});
  }
  std::sort(out.begin(), out.end(), [](const Span& a, const Span& b) { return a.r_in < b.r_in; });
  return out;
}

geometry::CameraIntrinsics square_intrinsics(int size, double hfov) {
  return geometry::CameraIntrinsics::from_fov(size, size, hfov);
}

}  // namespace

geometry::CameraIntrinsics SimConfig::intrinsics() const {
  return geometry::CameraIntrinsics::from_fov(image_width, image_height, hfov_deg * geometry::kPi / 180.0);
}

geometry::RigidTransform SimConfig::camera_mount() const { return geometry::forward_camera_mount(camera_height); }

double column_bearing(const geometry::CameraIntrinsics& k, int u) { return -std::atan((u - k.cx) / k.fx); }

RenderedView render_view(const Scene& scene, double x, double y, double z, double yaw,
                         const geometry::CameraIntrinsics& k, double min_range, double max_range) {
  k.validate();
  RenderedView out;
  out.labels.width = out.depth.width = k.width;
  out.labels.height = out.depth.height = k.height;
  out.labels.labels.assign(static_cast<std::size_t>(k.width) * k.height, 0);
  out.depth.values.assign(out.labels.labels.size(), kNaN);
  out.scan.assign(static_cast<std::size_t>(k.width), kInf);

  const double fx = std::cos(yaw), fy = std::sin(yaw);
  const double rx = std::sin(yaw), ry = -std::cos(yaw);
  const double ceiling = Scene::kWallHeight;
  for (int u = 0; u < k.width; ++u) {
    const double a = (u - k.cx) / k.fx;
    const double Dx = fx + a * rx, Dy = fy + a * ry;
    const double h = std::hypot(Dx, Dy);
    const double dx = Dx / h, dy = Dy / h;
    const double r_wall = march_walls(scene, x, y, dx, dy);
    const auto spans = disc_spans(scene, x, y, dx, dy, r_wall);

    const double first = spans.empty() ? r_wall : std::min(r_wall, spans.front().r_in);
    out.scan[u] = first > max_range ? kInf : first < min_range ? kNaN : static_cast<float>(first);

    for (int v = 0; v < k.height; ++v) {
      const double s = -(v - k.cy) / k.fy;  // height gained per unit of depth
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t label = 0;
      auto offer = [&](double t, std::uint32_t id) {
        if (t > 0.0 && t < best) {
          best = t;
          label = id;
        }
      };
      const double tw = r_wall / h;
      const double zw = z + s * tw;
      if (zw >= 0.0 && zw <= ceiling) offer(tw, 0);
      // Floor hits are nudged into the room so they never round below z = 0.
      if (s < 0.0) offer(z / -s * (1.0 - 1e-9), 0);
      if (s > 0.0) offer((ceiling - z) / s, 0);
      for (const auto& sp : spans) {
        const double tin = sp.r_in / h;
        if (tin >= best) break;
        const double zin = z + s * tin;
        const std::uint32_t id = static_cast<std::uint32_t>(sp.inst->id);
        if (zin >= 0.0 && zin <= sp.inst->height) {
          offer(tin, id);
          continue;
        }
        if (s < 0.0 && z > sp.inst->height) {
          const double ttop = (z - sp.inst->height) / -s;
          const double rtop = ttop * h;
          if (rtop >= sp.r_in && rtop <= sp.r_out) offer(ttop, id);
        }
      }
      const std::size_t i = static_cast<std::size_t>(v) * k.width + u;
      out.labels.labels[i] = label;
      if (best >= min_range && best <= max_range) out.depth.values[i] = static_cast<float>(best);
    }
  }
  return out;
}

perception::Image render_goal_image(const Scene& scene, int instance_id, std::uint64_t noise_key) {
  const Instance* inst = scene.instance(instance_id);
  if (!inst) throw ContractViolation("unknown instance id " + std::to_string(instance_id));
  constexpr int kSize = 224;
  const double z = std::clamp(inst->height / 2.0, 0.3, 2.2);
  const double distances[] = {1.2, 1.5, 1.0, 2.0};
  for (double d : distances) {
    for (int j = 0; j < 12; ++j) {
      const int k = static_cast<int>((noise_key + j) % 12);
      const double theta = k * geometry::kPi / 6.0;
      const double x = inst->x + d * std::cos(theta), y = inst->y + d * std::sin(theta);
      bool clear = true;
      for (double ox = -0.1; ox <= 0.1 + 1e-9 && clear; ox += 0.05)
        for (double oy = -0.1; oy <= 0.1 + 1e-9 && clear; oy += 0.05) clear = !scene.solid_at(x + ox, y + oy);
      if (!clear) continue;
      // The smaller of the object's width and height spans about 85% of
      // the frame; the other dimension may overflow it.
      const double half_extent = std::min(inst->radius, inst->height / 2.0);
      const double hfov = 2.0 * std::atan((half_extent / 0.85) / (d - inst->radius));
      const auto K = square_intrinsics(kSize, hfov);
      auto view = render_view(scene, x, y, z, theta + geometry::kPi, K, 0.0, 100.0);
      if (view.labels.label_at(kSize / 2, kSize / 2) != static_cast<std::uint32_t>(instance_id)) continue;
      view.labels.noise_key = perception::hash_words({noise_key, static_cast<std::uint64_t>(instance_id), 0x60a1ULL});
      view.labels.source_instance = instance_id;
      return view.labels;
    }
  }
  throw ContractViolation("no clear viewpoint for instance " + std::to_string(instance_id));
}

int heading_index(double yaw, int headings) {
  const double step = 2.0 * geometry::kPi / headings;
  int k = static_cast<int>(std::lround(yaw / step)) % headings;
  return k < 0 ? k + headings : k;
}

GridWorld::GridWorld(std::shared_ptr<const Scene> scene, SimConfig config, geometry::AgentPose start,
                     std::uint64_t seed)
    : scene_(std::move(scene)), config_(config), seed_(seed) {
  require(scene_ != nullptr, "world needs a scene");
  require(config_.headings > 0 && config_.step_budget > 0, "invalid simulator configuration");
  heading_ = heading_index(start.yaw, config_.headings);
  start_ = pose_ = pose_for(start.x, start.y, heading_);
  require(!scene_->solid_at(start.x, start.y), "start pose must lie on free space");
  trace_.push_back({0, pose_, Action::Stop, false});
}

geometry::AgentPose GridWorld::pose_for(double x, double y, int heading) const {
  return geometry::AgentPose(x, y, heading * 2.0 * geometry::kPi / config_.headings);
}

bool GridWorld::blocked_segment(double x0, double y0, double x1, double y1) const {
  const double len = std::hypot(x1 - x0, y1 - y0);
  const int n = std::max(1, static_cast<int>(std::ceil(len / (Scene::kResolution / 4.0))));
  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    if (scene_->solid_at(x0 + t * (x1 - x0), y0 + t * (y1 - y0))) return true;
  }
  return false;
}

perception::Observation GridWorld::observe() const {
  perception::Observation obs;
  obs.pose = pose_;
  obs.intrinsics = config_.intrinsics();
  auto view = render_view(*scene_, pose_.x, pose_.y, config_.camera_height, pose_.yaw, obs.intrinsics,
                          config_.min_range, config_.max_range);
  const std::uint64_t key = perception::hash_words(
      {seed_, std::bit_cast<std::uint64_t>(pose_.x), std::bit_cast<std::uint64_t>(pose_.y),
       static_cast<std::uint64_t>(heading_)});
  view.labels.noise_key = key;
  obs.rgb = std::move(view.labels);
  obs.depth = std::move(view.depth);
  obs.depth_scan = std::move(view.scan);

  const auto t_world_cam = geometry::pose_to_world_transform(pose_, 0.0) * config_.camera_mount();
  const Eigen::Matrix3d rt = t_world_cam.rotation().transpose();
  const Vec3 origin = t_world_cam.translation();
  for (const auto& inst : scene_->instances()) {
    const Vec3 pc = rt * (inst.center() - origin);
    if (pc.z() <= 0.0) continue;
    const auto [uf, vf] = geometry::camera_to_pixel(pc, obs.intrinsics);
    const long u = std::lround(uf), v = std::lround(vf);
    if (u < 0 || v < 0 || u >= obs.intrinsics.width || v >= obs.intrinsics.height) continue;
    if (obs.rgb.label_at(static_cast<int>(u), static_cast<int>(v)) != static_cast<std::uint32_t>(inst.id)) continue;
    const float d = obs.depth.at(static_cast<int>(u), static_cast<int>(v));
    if (!std::isfinite(d)) continue;
    std::mt19937_64 rng(perception::hash_words({key, static_cast<std::uint64_t>(inst.id), 0xde7ULL}));
    const double noise = std::uniform_real_distribution<double>(-1.0, 1.0)(rng) * config_.detector_noise;
    const double range = std::hypot(inst.x - pose_.x, inst.y - pose_.y);
    perception::Detection det;
    det.category = inst.category;
    det.u = static_cast<double>(u);
    det.v = static_cast<double>(v);
    det.depth_at_center = d;
    det.confidence = std::clamp(config_.detector_base_confidence - config_.detector_range_penalty * range + noise, 0.0, 1.0);
    det.description = inst.description;
    det.instance_id = inst.id;
    obs.detections.push_back(std::move(det));
  }
  return obs;
}

StepResult GridWorld::step(Action action) {
  if (finished_) throw EpisodeFinished("episode already finished");
  StepResult r;
  switch (action) {
    case Action::Forward: {
      const double nx = pose_.x + config_.forward_step * std::cos(pose_.yaw);
      const double ny = pose_.y + config_.forward_step * std::sin(pose_.yaw);
      if (blocked_segment(pose_.x, pose_.y, nx, ny)) {
        r.collided = true;
      } else {
        path_length_ += std::hypot(nx - pose_.x, ny - pose_.y);
        pose_ = pose_for(nx, ny, heading_);
      }
      break;
    }
    case Action::TurnLeft:
      heading_ = (heading_ + 1) % config_.headings;
      pose_ = pose_for(pose_.x, pose_.y, heading_);
      break;
    case Action::TurnRight:
      heading_ = (heading_ + config_.headings - 1) % config_.headings;
      pose_ = pose_for(pose_.x, pose_.y, heading_);
      break;
    case Action::Stop:
      stopped_ = finished_ = true;
      break;
  }
  ++steps_;
  if (steps_ >= config_.step_budget) finished_ = true;
  trace_.push_back({steps_, pose_, action, r.collided});
  r.finished = finished_;
  return r;
}

EpisodeResult GridWorld::evaluate(const GoalSpec& goal) const {
  EpisodeResult res;
  const auto valid = perception::goal_instances(*scene_, goal);
  std::vector<Vec3> centers;
  for (const auto* inst : valid) centers.push_back(inst->center());
  res.geodesic = centers.empty() ? kUnreachable
                                 : geodesic_to_any(*scene_, start_.x, start_.y, centers, config_.success_distance);
  res.solvable = std::isfinite(res.geodesic);
  res.path_length = path_length_;
  res.steps = steps_;
  res.stop_distance = std::numeric_limits<double>::infinity();
  for (const auto& c : centers) res.stop_distance = std::min(res.stop_distance, std::hypot(c.x() - pose_.x, c.y() - pose_.y));
  res.success = stopped_ && res.solvable && res.stop_distance <= config_.success_distance;
  if (!stopped_) res.reason = "step-budget-exhausted";
  for (const auto& t : trace_) res.trajectory.push_back(t.pose);
  return res;
}

void GridWorld::write_trace_jsonl(std::ostream& out) const {
  for (const auto& t : trace_) {
    nlohmann::json j = {{"step", t.step},
                        {"x", t.pose.x},
                        {"y", t.pose.y},
                        {"yaw", t.pose.yaw},
                        {"action", t.step == 0 ? "start" : std::string(planner::to_string(t.action))},
                        {"collided", t.collided}};
    out << j.dump() << '\n';
  }
}

void write_ppm(const Scene& scene, const std::vector<geometry::AgentPose>& trajectory,
               const std::filesystem::path& path, int ppm) {
  require(ppm > 0, "pixels per meter must be positive");
  const int w = static_cast<int>(std::ceil(scene.width_m() * ppm));
  const int h = static_cast<int>(std::ceil(scene.height_m() * ppm));
  std::vector<std::uint8_t> img(static_cast<std::size_t>(w) * h * 3, 255);
  auto put = [&](int px, int py, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (px < 0 || py < 0 || px >= w || py >= h) return;
    const std::size_t i = (static_cast<std::size_t>(py) * w + px) * 3;
    img[i] = r;
    img[i + 1] = g;
    img[i + 2] = b;
  };
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const double x = (px + 0.5) / ppm, y = scene.height_m() - (py + 0.5) / ppm;
      const int cx = scene.fine_x(x), cy = scene.fine_y(y);
      if (scene.wall(cx, cy)) put(px, py, 0, 0, 0);
      else if (scene.solid(cx, cy)) {
        for (const auto& inst : scene.instances()) {
          if (std::hypot(inst.x - x, inst.y - y) <= inst.radius + Scene::kResolution) {
            const std::uint64_t c = perception::hash_words({static_cast<std::uint64_t>(inst.id)});
            put(px, py, 64 + (c & 0x7f), 64 + ((c >> 8) & 0x7f), 64 + ((c >> 16) & 0x7f));
            break;
          }
        }
      }
    }
  }
  for (const auto& p : trajectory) {
    const int px = static_cast<int>(p.x * ppm), py = static_cast<int>((scene.height_m() - p.y) * ppm);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) put(px + dx, py + dy, 220, 20, 20);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
}

}  // namespace wf::sim
