#pragma once

#include "wayfinder/common.hpp"

#include <Eigen/Geometry>

#include <compare>
#include <cstdint>
#include <functional>
#include <utility>

namespace wf::geometry {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Symmetric pinhole camera with the principal point at the image center.
  static CameraIntrinsics from_fov(int width, int height, double horizontal_fov_rad);

  void validate() const;
  bool contains(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u < width && v < height;
  }
};

/// Planar agent pose: position in meters, yaw counterclockwise from +x.
struct AgentPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  AgentPose() = default;
  AgentPose(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(normalize_angle(yaw_)) {}

  bool operator==(const AgentPose&) const = default;
};

/// Homogeneous 4x4 rigid transform. Construction checks the bottom row and
/// orthonormality of the rotation block.
class RigidTransform {
 public:
  RigidTransform() : m_(Eigen::Matrix4d::Identity()) {}
  explicit RigidTransform(const Eigen::Matrix4d& m);

  static RigidTransform from_parts(const Eigen::Matrix3d& rotation, const Vec3& translation);

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return m_.topRightCorner<3, 1>(); }

  Vec3 apply(const Vec3& p) const { return rotation() * p + translation(); }
  RigidTransform operator*(const RigidTransform& rhs) const;

 private:
  Eigen::Matrix4d m_;
};

struct GridParams {
  double delta = 0.1;
  int g = 1000;

  void validate() const;
  bool operator==(const GridParams&) const = default;
};

struct VoxelIndex {
  int vx = 0;
  int vy = 0;
  int vz = 0;

  auto operator<=>(const VoxelIndex&) const = default;
};

struct VoxelIndexHash {
  std::size_t operator()(const VoxelIndex& v) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(v.vx);
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(v.vy);
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(v.vz);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// Inverse perspective projection of pixel (u, v) at optical-axis depth.
Vec3 pixel_to_camera(double u, double v, double depth, const CameraIntrinsics& k);

/// Forward projection; the inverse of pixel_to_camera for points with z > 0.
std::pair<double, double> camera_to_pixel(const Vec3& pc, const CameraIntrinsics& k);

RigidTransform pose_to_world_transform(const AgentPose& pose, double z_base);

Vec3 camera_to_world(const Vec3& pc, const RigidTransform& t_base_cam,
                     const RigidTransform& t_world_base);

bool in_grid(const VoxelIndex& v, const GridParams& gp);
VoxelIndex world_to_voxel(const Vec3& pw, const GridParams& gp);
Vec3 voxel_to_world(const VoxelIndex& v, const GridParams& gp);

/// Center pixel (u, v) of patch row i, column j for stride s.
std::pair<double, double> patch_center(int i, int j, int stride);

/// Forward-looking camera mounted `height` meters above the base origin,
/// pitched by `pitch` radians (negative looks down). Optical axis along base
/// +x, image x to the right (base -y), image y down.
RigidTransform forward_camera_mount(double height, double pitch = 0.0);

}  // namespace wf::geometry
