#include "sattrack/geometry.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <vector>

#include "sattrack/errors.hpp"

namespace sattrack {

void CameraModel::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw ArgumentError("focal lengths must be positive");
  if (width < 1 || height < 1) throw ArgumentError("camera image size must be positive");
  if (!(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height))
    throw ArgumentError("principal point lies outside the image");
}

Pose::Pose(const Eigen::Vector3d& location, const Eigen::Quaterniond& orientation)
    : location_(location), orientation_(orientation) {
  if (!location.allFinite() || !orientation.coeffs().allFinite())
    throw ArgumentError("pose must be finite");
  const double n = orientation_.norm();
  if (!(n > 0.0)) throw ArgumentError("pose quaternion has zero norm");
  orientation_.coeffs() /= n;
}

Pose Pose::updated(const Vector6d& twist) const {
  const Eigen::Quaterniond dq = exp_rotation(twist.head<3>());
  return Pose(location_ + twist.tail<3>(), dq * orientation_);
}

Eigen::Quaterniond exp_rotation(const Eigen::Vector3d& omega) {
  const double angle = omega.norm();
  if (angle < 1e-12) {
    // second-order expansion keeps the update smooth near zero
    Eigen::Quaterniond q(1.0, 0.5 * omega.x(), 0.5 * omega.y(), 0.5 * omega.z());
    return q.normalized();
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, omega / angle));
}

Eigen::Quaterniond axis_angle_degrees(const Eigen::Vector3d& axis, double degrees) {
  if (!(axis.norm() > 0.0)) throw ArgumentError("rotation axis must be non-zero");
  return Eigen::Quaterniond(Eigen::AngleAxisd(degrees * M_PI / 180.0, axis.normalized()));
}

double location_error(const Pose& estimate, const Pose& truth) {
  return (estimate.location() - truth.location()).norm();
}

double orientation_error_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  // 2 acos(|<a, b>|), evaluated via atan2 to stay accurate near zero
  const Eigen::Quaterniond d = a.normalized().conjugate() * b.normalized();
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w())) * 180.0 / M_PI;
}

double orientation_error_deg(const Pose& estimate, const Pose& truth) {
  return orientation_error_deg(estimate.orientation(), truth.orientation());
}

Pose parse_pose(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("invalid pose component '" + item + "'");
    }
  }
  if (v.size() != 7) throw ArgumentError("pose needs 7 comma-separated values tx,ty,tz,qw,qx,qy,qz");
  return Pose({v[0], v[1], v[2]}, Eigen::Quaterniond(v[3], v[4], v[5], v[6]));
}

std::string format_pose(const Pose& pose) {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto& t = pose.location();
  const auto& q = pose.orientation();
  os << t.x() << ',' << t.y() << ',' << t.z() << ',' << q.w() << ',' << q.x() << ',' << q.y() << ',' << q.z();
  return os.str();
}

}  // namespace sattrack
