#include "wayfinder/cognitive_map.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>

namespace wf::cogmap {

namespace {

constexpr std::array<char, 4> kMagic = {'B', 'S', 'C', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ParseError("BSCM: truncated file");
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(bytes[i]) << (8 * i);
  return static_cast<T>(u);
}

void put_f32(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
float get_f32(std::istream& in) { return std::bit_cast<float>(get_le<std::uint32_t>(in)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

double chebyshev(const VoxelIndex& a, const VoxelIndex& b) {
  return std::max({std::abs(a.vx - b.vx), std::abs(a.vy - b.vy), std::abs(a.vz - b.vz)});
}

}  // namespace

FeatureVector::FeatureVector(std::vector<float> values) : values_(std::move(values)) {
  double sq = 0.0;
  for (float v : values_) {
    if (!std::isfinite(v)) throw ContractViolation("feature vector has non-finite entries");
    sq += static_cast<double>(v) * static_cast<double>(v);
  }
  norm_ = std::sqrt(sq);
  if (!(norm_ > 0.0)) throw ContractViolation("feature vector must have non-zero norm");
}

double dot(const FeatureVector& a, const FeatureVector& b) {
  if (a.dim() != b.dim()) throw ContractViolation("feature dimension mismatch");
  const auto av = a.values();
  const auto bv = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += static_cast<double>(av[i]) * static_cast<double>(bv[i]);
  return s;
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  return dot(a, b) / (a.norm() * b.norm());
}

double cosine_distance(const FeatureVector& a, const FeatureVector& b) {
  return std::clamp(1.0 - cosine_similarity(a, b), 0.0, 1.0);
}

void MapParams::validate() const {
  grid.validate();
  if (buffer_capacity == 0) throw ContractViolation("buffer capacity must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ContractViolation("surprise threshold must lie in [0, 1]");
  if (hop < 0) throw ContractViolation("neighborhood hop must be non-negative");
}

CognitiveMap::CognitiveMap(MapParams params, std::size_t feature_dim)
    : params_(params), dim_(feature_dim) {
  params_.validate();
}

CognitiveMap::CognitiveMap(const CognitiveMap& other) {
  std::shared_lock lock(other.mutex_);
  params_ = other.params_;
  dim_ = other.dim_;
  next_tick_ = other.next_tick_;
  feature_count_ = other.feature_count_;
  cells_ = other.cells_;
}

CognitiveMap& CognitiveMap::operator=(const CognitiveMap& other) {
  if (this == &other) return *this;
  std::unique_lock mine(mutex_, std::defer_lock);
  std::shared_lock theirs(other.mutex_, std::defer_lock);
  std::lock(mine, theirs);
  params_ = other.params_;
  dim_ = other.dim_;
  next_tick_ = other.next_tick_;
  feature_count_ = other.feature_count_;
  cells_ = other.cells_;
  return *this;
}

std::size_t CognitiveMap::feature_dim() const {
  std::shared_lock lock(mutex_);
  return dim_;
}

std::size_t CognitiveMap::voxel_count() const {
  std::shared_lock lock(mutex_);
  return cells_.size();
}

std::size_t CognitiveMap::feature_count() const {
  std::shared_lock lock(mutex_);
  return feature_count_;
}

void CognitiveMap::check_dim(const FeatureVector& f) {
  if (f.dim() == 0) throw ContractViolation("empty feature vector");
  if (dim_ == 0) dim_ = f.dim();
  if (f.dim() != dim_) throw ContractViolation("feature dimension does not match the map");
}

double CognitiveMap::surprise(const FeatureVector& f, const VoxelIndex& v) const {
  std::shared_lock lock(mutex_);
  return surprise_locked(f, v);
}

double CognitiveMap::surprise_locked(const FeatureVector& f, const VoxelIndex& v) const {
  const int n = params_.hop;
  double total = 0.0;
  std::size_t count = 0;
  for (int dx = -n; dx <= n; ++dx) {
    for (int dy = -n; dy <= n; ++dy) {
      for (int dz = -n; dz <= n; ++dz) {
        const auto it = cells_.find({v.vx + dx, v.vy + dy, v.vz + dz});
        if (it == cells_.end()) continue;
        for (const auto& b : it->second) {
          total += cosine_distance(f, b.feature);
          ++count;
        }
      }
    }
  }
  // Nothing to compare against: a first observation is maximally novel.
  if (count == 0) return 1.0;
  return total / static_cast<double>(count);
}

InsertOutcome CognitiveMap::insert(const VoxelIndex& v, const FeatureVector& f) {
  if (!geometry::in_grid(v, params_.grid)) throw OutOfBounds("voxel index outside grid");
  std::unique_lock lock(mutex_);
  check_dim(f);
  return insert_locked(v, f);
}

InsertOutcome CognitiveMap::insert_locked(const VoxelIndex& v, const FeatureVector& f) {
  InsertOutcome outcome;
  outcome.surprise = surprise_locked(f, v);
  if (!(outcome.surprise > params_.tau)) return outcome;

  auto& cell = cells_[v];
  if (cell.size() >= params_.buffer_capacity) {
    auto victim = std::min_element(cell.begin(), cell.end(), [](const auto& a, const auto& b) {
      if (a.surprise_at_insert != b.surprise_at_insert) return a.surprise_at_insert < b.surprise_at_insert;
      return a.tick < b.tick;
    });
    outcome.evicted = std::move(*victim);
    cell.erase(victim);
    --feature_count_;
  }
  cell.push_back({f, outcome.surprise, next_tick_++});
  ++feature_count_;
  outcome.inserted = true;
  return outcome;
}

IntegrateStats CognitiveMap::integrate(const PatchGrid& patches, const DepthImage& depth,
                                       const geometry::AgentPose& pose,
                                       const geometry::CameraIntrinsics& k,
                                       const geometry::RigidTransform& t_base_cam, double z_base) {
  require(patches.stride > 0, "patch stride must be positive");
  require(patches.features.size() == static_cast<std::size_t>(patches.rows * patches.cols),
          "patch grid size mismatch");
  require(depth.values.size() == static_cast<std::size_t>(depth.width * depth.height),
          "depth image size mismatch");

  const auto t_world_base = geometry::pose_to_world_transform(pose, z_base);
  IntegrateStats stats;
  std::unique_lock lock(mutex_);
  for (int i = 0; i < patches.rows; ++i) {
    for (int j = 0; j < patches.cols; ++j) {
      const auto [uc, vc] = geometry::patch_center(i, j, patches.stride);
      const int u = static_cast<int>(std::lround(uc));
      const int vpx = static_cast<int>(std::lround(vc));
      if (u < 0 || vpx < 0 || u >= depth.width || vpx >= depth.height || !k.contains(u, vpx)) {
        ++stats.rejected;
        continue;
      }
      const double d = depth.at(u, vpx);
      if (!std::isfinite(d) || d <= 0.0) {
        ++stats.rejected;
        continue;
      }
      const Vec3 pc = geometry::pixel_to_camera(u, vpx, d, k);
      const Vec3 pw = geometry::camera_to_world(pc, t_base_cam, t_world_base);
      VoxelIndex v;
      try {
        v = geometry::world_to_voxel(pw, params_.grid);
      } catch (const OutOfBounds&) {
        ++stats.rejected;
        continue;
      }
      const auto& f = patches.at(i, j);
      check_dim(f);
      auto outcome = insert_locked(v, f);
      if (outcome.inserted) {
        ++stats.inserted;
        if (outcome.evicted) ++stats.evicted;
      } else {
        ++stats.gated;
      }
    }
  }
  return stats;
}

std::vector<VoxelMatch> CognitiveMap::query_topk(const FeatureVector& q, std::size_t k) const {
  require(k >= 1, "query_topk requires k >= 1");
  std::shared_lock lock(mutex_);
  if (dim_ != 0 && q.dim() != dim_) throw ContractViolation("query dimension does not match the map");
  std::vector<VoxelMatch> scored;
  scored.reserve(cells_.size());
  for (const auto& [voxel, buffer] : cells_) {
    if (buffer.empty()) continue;
    double best = -2.0;
    for (const auto& b : buffer) best = std::max(best, cosine_similarity(q, b.feature));
    scored.push_back({voxel, best});
  }
  auto better = [](const VoxelMatch& a, const VoxelMatch& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.voxel < b.voxel;
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
  scored.resize(keep);
  return scored;
}

std::vector<BufferedFeature> CognitiveMap::buffer(const VoxelIndex& v) const {
  std::shared_lock lock(mutex_);
  const auto it = cells_.find(v);
  return it == cells_.end() ? std::vector<BufferedFeature>{} : it->second;
}

std::vector<VoxelIndex> CognitiveMap::voxels() const {
  std::shared_lock lock(mutex_);
  std::vector<VoxelIndex> out;
  out.reserve(cells_.size());
  for (const auto& [voxel, buffer] : cells_)
    if (!buffer.empty()) out.push_back(voxel);
  std::sort(out.begin(), out.end());
  return out;
}

void CognitiveMap::write_binary(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kFormatVersion);
  put_f64(out, params_.grid.delta);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params_.grid.g));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params_.buffer_capacity));
  put_f64(out, params_.tau);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params_.hop));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  put_le<std::uint64_t>(out, next_tick_);

  std::vector<VoxelIndex> order;
  order.reserve(cells_.size());
  for (const auto& [voxel, buffer] : cells_)
    if (!buffer.empty()) order.push_back(voxel);
  std::sort(order.begin(), order.end());
  put_le<std::uint64_t>(out, order.size());
  for (const auto& voxel : order) {
    const auto& buffer = cells_.at(voxel);
    put_le<std::int32_t>(out, voxel.vx);
    put_le<std::int32_t>(out, voxel.vy);
    put_le<std::int32_t>(out, voxel.vz);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(buffer.size()));
    for (const auto& b : buffer) {
      for (float x : b.feature.values()) put_f32(out, x);
      put_f64(out, b.surprise_at_insert);
      put_le<std::uint64_t>(out, b.tick);
    }
  }
  if (!out) throw Error("BSCM: write failed");
}

CognitiveMap CognitiveMap::read_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ParseError("BSCM: bad magic");
  if (get_le<std::uint32_t>(in) != kFormatVersion) throw ParseError("BSCM: unsupported version");
  MapParams params;
  params.grid.delta = get_f64(in);
  params.grid.g = static_cast<int>(get_le<std::uint32_t>(in));
  params.buffer_capacity = get_le<std::uint32_t>(in);
  params.tau = get_f64(in);
  params.hop = static_cast<int>(get_le<std::uint32_t>(in));
  const std::size_t dim = get_le<std::uint32_t>(in);
  CognitiveMap map;
  try {
    map = CognitiveMap(params, dim);
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("BSCM: ") + e.what());
  }
  map.next_tick_ = get_le<std::uint64_t>(in);
  const std::uint64_t cell_count = get_le<std::uint64_t>(in);
  for (std::uint64_t c = 0; c < cell_count; ++c) {
    VoxelIndex v;
    v.vx = get_le<std::int32_t>(in);
    v.vy = get_le<std::int32_t>(in);
    v.vz = get_le<std::int32_t>(in);
    if (!geometry::in_grid(v, params.grid)) throw ParseError("BSCM: voxel outside grid");
    const std::uint32_t count = get_le<std::uint32_t>(in);
    if (count == 0 || count > params.buffer_capacity) throw ParseError("BSCM: buffer count out of range");
    auto& cell = map.cells_[v];
    for (std::uint32_t b = 0; b < count; ++b) {
      std::vector<float> values(dim);
      for (auto& x : values) x = get_f32(in);
      BufferedFeature bf;
      try {
        bf.feature = FeatureVector(std::move(values));
      } catch (const ContractViolation& e) {
        throw ParseError(std::string("BSCM: ") + e.what());
      }
      bf.surprise_at_insert = get_f64(in);
      bf.tick = get_le<std::uint64_t>(in);
      cell.push_back(std::move(bf));
      ++map.feature_count_;
    }
  }
  return map;
}

void CognitiveMap::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_binary(out);
}

CognitiveMap CognitiveMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return read_binary(in);
}

void CognitiveMap::write_occupancy_csv(std::ostream& out) const {
  out << "vx,vy,vz,count,max_tick\n";
  for (const auto& v : voxels()) {
    std::shared_lock lock(mutex_);
    const auto& buffer = cells_.at(v);
    std::uint64_t max_tick = 0;
    for (const auto& b : buffer) max_tick = std::max(max_tick, b.tick);
    out << v.vx << ',' << v.vy << ',' << v.vz << ',' << buffer.size() << ',' << max_tick << '\n';
  }
}

bool CognitiveMap::operator==(const CognitiveMap& other) const {
  if (this == &other) return true;
  std::shared_lock a(mutex_, std::defer_lock);
  std::shared_lock b(other.mutex_, std::defer_lock);
  std::lock(a, b);
  if (!(params_ == other.params_) || dim_ != other.dim_ || next_tick_ != other.next_tick_ ||
      feature_count_ != other.feature_count_)
    return false;
  auto populated = [](const Cells& cells) {
    std::size_t n = 0;
    for (const auto& [v, buf] : cells) n += !buf.empty();
    return n;
  };
  if (populated(cells_) != populated(other.cells_)) return false;
  for (const auto& [voxel, buffer] : cells_) {
    if (buffer.empty()) continue;
    const auto it = other.cells_.find(voxel);
    if (it == other.cells_.end() || it->second != buffer) return false;
  }
  return true;
}

std::vector<ClusterCenter> cluster_matches(std::span<const VoxelMatch> matches, int eps,
                                           std::size_t min_pts, const GridParams& gp) {
  require(eps > 0, "cluster eps must be positive");
  require(min_pts >= 1, "cluster min_pts must be at least 1");
  const std::size_t n = matches.size();
  if (n == 0) return {};

  auto neighbors = [&](std::size_t p) {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < n; ++q)
      if (chebyshev(matches[p].voxel, matches[q].voxel) <= eps) out.push_back(q);
    return out;
  };

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(n, kUnvisited);
  int clusters = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (label[p] != kUnvisited) continue;
    auto seeds = neighbors(p);
    if (seeds.size() < min_pts) {
      label[p] = kNoise;
      continue;
    }
    const int id = clusters++;
    label[p] = id;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const std::size_t q = seeds[s];
      if (label[q] == kNoise) label[q] = id;
      if (label[q] != kUnvisited) continue;
      label[q] = id;
      auto more = neighbors(q);
      if (more.size() >= min_pts) seeds.insert(seeds.end(), more.begin(), more.end());
    }
  }

  std::vector<ClusterCenter> out(static_cast<std::size_t>(clusters));
  std::vector<Eigen::Vector3d> weighted(static_cast<std::size_t>(clusters), Eigen::Vector3d::Zero());
  std::vector<double> weights(static_cast<std::size_t>(clusters), 0.0);
  std::vector<Eigen::Vector3d> plain(static_cast<std::size_t>(clusters), Eigen::Vector3d::Zero());
  for (auto& c : out) c.score = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n; ++p) {
    if (label[p] < 0) continue;
    const auto c = static_cast<std::size_t>(label[p]);
    const Eigen::Vector3d center(matches[p].voxel.vx + 0.5, matches[p].voxel.vy + 0.5,
                                 matches[p].voxel.vz + 0.5);
    const double w = std::max(matches[p].similarity, 0.0);
    weighted[c] += w * center;
    weights[c] += w;
    plain[c] += center;
    out[c].score = std::max(out[c].score, matches[p].similarity);
    ++out[c].members;
  }
  const double half = gp.g / 2.0;
  for (std::size_t c = 0; c < out.size(); ++c) {
    // Members with non-positive similarity carry no weight; an all-negative
    // cluster falls back to its unweighted centroid.
    const Eigen::Vector3d vox = weights[c] > 0.0 ? Eigen::Vector3d(weighted[c] / weights[c])
                                                 : Eigen::Vector3d(plain[c] / static_cast<double>(out[c].members));
    out[c].position = Vec3((vox.x() - half) * gp.delta, (vox.y() - half) * gp.delta, vox.z() * gp.delta);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ClusterCenter& a, const ClusterCenter& b) { return a.score > b.score; });
  return out;
}

}  // namespace wf::cogmap
