#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sattrack/geometry.hpp"
#include "sattrack/image.hpp"
#include "sattrack/mesh.hpp"
#include "sattrack/scheduler.hpp"

namespace sattrack {

/// Euclidean camera-to-surface distance in meters; background is +inf.
using DepthMap = GrayImageF;
/// Index of the visible triangle per pixel, -1 for background.
using TriangleIdMap = Image<std::int32_t, 1>;

inline constexpr double kNearPlane = 0.01;

struct ProjectedVertex {
  Eigen::Vector3d camera;  ///< camera-frame point
  Eigen::Vector2d pixel;   ///< only meaningful when !behind_near
  bool behind_near = false;
};

std::vector<ProjectedVertex> transform_and_project(const TriangleMesh& mesh, const Pose& pose,
                                                   const CameraModel& cam);

struct RenderResult {
  DepthMap depth;
  TriangleIdMap triangle;
};

/// Rasterises `mesh` into stripes run as scheduler tasks (`schedule.n_tasks`
/// stripes, clamped to the image height; 0 means one stripe per worker).
/// Output does not depend on the stripe count, mode or worker count.
RenderResult render_scene(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam,
                          const TaskSet& schedule = {}, std::vector<TaskTrace>* trace = nullptr);

DepthMap render_depth(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam);
DepthMap render_depth_scheduled(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam,
                                const TaskSet& schedule);

/// Per-stripe work estimate (covered bounding-box pixels of the binned
/// triangles plus one unit per row) for feeding `simulate_schedule`.
std::vector<double> stripe_costs(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam,
                                 int n_stripes);

}  // namespace sattrack
