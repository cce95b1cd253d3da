#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <string>

namespace sattrack {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Pinhole intrinsics in pixels. Pixel (u, v) samples the image point with
/// integer coordinates (u, v); there is no half-pixel offset.
struct CameraModel {
  double fx = 500.0, fy = 500.0;
  double cx = 256.0, cy = 256.0;
  int width = 512, height = 512;

  void validate() const;

  Eigen::Vector2d project(const Eigen::Vector3d& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
  /// Camera-frame direction through pixel (u, v), with z = 1.
  Eigen::Vector3d ray(double u, double v) const { return {(u - cx) / fx, (v - cy) / fy, 1.0}; }
  bool contains(double u, double v) const { return u >= 0 && v >= 0 && u <= width - 1 && v <= height - 1; }
};

/// Rigid model-to-camera transform: p_cam = R(orientation) * p_model + location.
class Pose {
 public:
  Pose() = default;
  /// Renormalises the quaternion; throws ArgumentError on non-finite input.
  Pose(const Eigen::Vector3d& location, const Eigen::Quaterniond& orientation);

  const Eigen::Vector3d& location() const noexcept { return location_; }
  const Eigen::Quaterniond& orientation() const noexcept { return orientation_; }
  Eigen::Matrix3d rotation() const { return orientation_.toRotationMatrix(); }

  Eigen::Vector3d apply(const Eigen::Vector3d& model_point) const {
    return orientation_ * model_point + location_;
  }
  Eigen::Vector3d inverse_apply(const Eigen::Vector3d& camera_point) const {
    return orientation_.conjugate() * (camera_point - location_);
  }

  /// Left-multiplied twist update (omega, nu):
  /// q <- normalize(exp(omega) * q), t <- t + nu.
  Pose updated(const Vector6d& twist) const;

 private:
  Eigen::Vector3d location_ = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation_ = Eigen::Quaterniond::Identity();
};

/// Unit quaternion for the rotation vector `omega` (axis * angle, radians).
Eigen::Quaterniond exp_rotation(const Eigen::Vector3d& omega);

/// Rotation of `degrees` about `axis` (normalised internally).
Eigen::Quaterniond axis_angle_degrees(const Eigen::Vector3d& axis, double degrees);

/// ||t_a - t_b|| in meters.
double location_error(const Pose& estimate, const Pose& truth);
/// Geodesic angle 2 acos(|<q_a, q_b>|) in degrees; insensitive to the sign of q.
double orientation_error_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);
double orientation_error_deg(const Pose& estimate, const Pose& truth);

/// "tx,ty,tz,qw,qx,qy,qz"
Pose parse_pose(const std::string& text);
std::string format_pose(const Pose& pose);

}  // namespace sattrack
