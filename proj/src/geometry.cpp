#include "wayfinder/geometry.hpp"

#include <cmath>
#include <string>

namespace wf::geometry {

double normalize_angle(double radians) {
  double a = std::fmod(radians, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

CameraIntrinsics CameraIntrinsics::from_fov(int width, int height, double horizontal_fov_rad) {
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  k.fx = (width / 2.0) / std::tan(horizontal_fov_rad / 2.0);
  k.fy = k.fx;
  k.cx = (width - 1) / 2.0;
  k.cy = (height - 1) / 2.0;
  k.validate();
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ContractViolation("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ContractViolation("image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw ContractViolation("principal point outside image");
}

RigidTransform::RigidTransform(const Eigen::Matrix4d& m) : m_(m) {
  const Eigen::RowVector4d bottom(0.0, 0.0, 0.0, 1.0);
  if ((m_.bottomRows<1>() - bottom).cwiseAbs().maxCoeff() != 0.0)
    throw ContractViolation("rigid transform bottom row must be [0 0 0 1]");
  const Eigen::Matrix3d r = m_.topLeftCorner<3, 3>();
  if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw ContractViolation("rotation block is not orthonormal");
  if (!m_.allFinite()) throw ContractViolation("rigid transform has non-finite entries");
}

RigidTransform RigidTransform::from_parts(const Eigen::Matrix3d& rotation, const Vec3& translation) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return RigidTransform(m);
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return RigidTransform(m_ * rhs.m_);
}

void GridParams::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ContractViolation("voxel size must be positive");
  if (g <= 0 || g % 2 != 0) throw ContractViolation("grid dimension must be positive and even");
}

Vec3 pixel_to_camera(double u, double v, double depth, const CameraIntrinsics& k) {
  if (!std::isfinite(depth) || depth <= 0.0)
    throw InvalidDepth("depth must be finite and positive, got " + std::to_string(depth));
  if (!k.contains(u, v)) throw OutOfBounds("pixel outside image bounds");
  return {depth * (u - k.cx) / k.fx, depth * (v - k.cy) / k.fy, depth};
}

std::pair<double, double> camera_to_pixel(const Vec3& pc, const CameraIntrinsics& k) {
  return {pc.x() * k.fx / pc.z() + k.cx, pc.y() * k.fy / pc.z() + k.cy};
}

RigidTransform pose_to_world_transform(const AgentPose& pose, double z_base) {
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  Eigen::Matrix4d m;
  m << c, -s, 0.0, pose.x,
       s, c, 0.0, pose.y,
       0.0, 0.0, 1.0, z_base,
       0.0, 0.0, 0.0, 1.0;
  return RigidTransform(m);
}

Vec3 camera_to_world(const Vec3& pc, const RigidTransform& t_base_cam,
                     const RigidTransform& t_world_base) {
  const Eigen::Vector4d h(pc.x(), pc.y(), pc.z(), 1.0);
  const Eigen::Vector4d w = t_world_base.matrix() * (t_base_cam.matrix() * h);
  return w.head<3>();
}

bool in_grid(const VoxelIndex& v, const GridParams& gp) {
  return v.vx >= 0 && v.vy >= 0 && v.vz >= 0 && v.vx < gp.g && v.vy < gp.g;
}

VoxelIndex world_to_voxel(const Vec3& pw, const GridParams& gp) {
  const double fx = std::floor(pw.x() / gp.delta + gp.g / 2.0);
  const double fy = std::floor(pw.y() / gp.delta + gp.g / 2.0);
  const double fz = std::floor(pw.z() / gp.delta);
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(fz) || fx < 0.0 || fy < 0.0 ||
      fz < 0.0 || fx >= gp.g || fy >= gp.g || fz > 2.0e9)
    throw OutOfBounds("world point outside voxel grid");
  return {static_cast<int>(fx), static_cast<int>(fy), static_cast<int>(fz)};
}

Vec3 voxel_to_world(const VoxelIndex& v, const GridParams& gp) {
  if (!in_grid(v, gp)) throw OutOfBounds("voxel index outside grid");
  const double half = gp.g / 2.0;
  return {(v.vx - half + 0.5) * gp.delta, (v.vy - half + 0.5) * gp.delta, (v.vz + 0.5) * gp.delta};
}

std::pair<double, double> patch_center(int i, int j, int stride) {
  require(i >= 0 && j >= 0, "patch indices must be non-negative");
  require(stride > 0, "patch stride must be positive");
  return {j * stride + stride / 2.0, i * stride + stride / 2.0};
}

RigidTransform forward_camera_mount(double height, double pitch) {
  Eigen::Matrix3d optical_to_base;
  optical_to_base << 0.0, 0.0, 1.0,
                     -1.0, 0.0, 0.0,
                     0.0, -1.0, 0.0;
  const Eigen::Matrix3d tilt = Eigen::AngleAxisd(-pitch, Eigen::Vector3d::UnitY()).toRotationMatrix();
  return RigidTransform::from_parts(tilt * optical_to_base, Vec3(0.0, 0.0, height));
}

}  // namespace wf::geometry
