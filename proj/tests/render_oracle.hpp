#pragma once

// Independent per-pixel ray caster used to check the rasteriser.

#include <cmath>
#include <limits>
#include <random>

#include "sattrack/geometry.hpp"
#include "sattrack/mesh.hpp"
#include "sattrack/render.hpp"
#include "test_util.hpp"

namespace sattrack::testing {

/// Moller-Trumbore; returns the ray parameter or NaN.
inline double ray_triangle(const Eigen::Vector3d& orig, const Eigen::Vector3d& dir, const Eigen::Vector3d& v0,
                           const Eigen::Vector3d& v1, const Eigen::Vector3d& v2) {
  const Eigen::Vector3d e1 = v1 - v0, e2 = v2 - v0;
  const Eigen::Vector3d p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return std::nan("");
  const double inv = 1.0 / det;
  const Eigen::Vector3d s = orig - v0;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nan("");
  const Eigen::Vector3d q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nan("");
  const double t = e2.dot(q) * inv;
  return t > 0.0 ? t : std::nan("");
}

struct RayHit {
  double distance = std::numeric_limits<double>::infinity();
  int triangle = -1;
};

/// Nearest hit through pixel (u, v) with camera-frame z >= z_min.
inline RayHit raycast_pixel(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam, int u, int v,
                            double z_min = 0.01) {
  const Eigen::Vector3d dir((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
  RayHit best;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const double s = ray_triangle(Eigen::Vector3d::Zero(), dir, pose.apply(mesh.vertices[t[0]]),
                                  pose.apply(mesh.vertices[t[1]]), pose.apply(mesh.vertices[t[2]]));
    if (std::isnan(s) || s * dir.z() < z_min) continue;
    const double d = s * dir.norm();
    if (d < best.distance) best = {d, static_cast<int>(i)};
  }
  return best;
}

/// Triangle soup around the model origin.
inline TriangleMesh random_mesh(std::mt19937& rng, int n_triangles, double extent = 3.0, double size = 1.5) {
  TriangleMesh mesh;
  for (int i = 0; i < n_triangles; ++i) {
    const Eigen::Vector3d c(uniform_real(rng, -extent, extent), uniform_real(rng, -extent, extent),
                            uniform_real(rng, -extent, extent));
    for (int k = 0; k < 3; ++k)
      mesh.vertices.push_back(c + Eigen::Vector3d(uniform_real(rng, -size, size), uniform_real(rng, -size, size),
                                                  uniform_real(rng, -size, size)));
    mesh.triangles.push_back({3 * i, 3 * i + 1, 3 * i + 2});
  }
  return mesh;
}

inline Eigen::Quaterniond random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> n;
  return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
}

/// Distance from `p` to segment ab.
inline double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (a + t * d - p).norm();
}

// Pixel distance to the nearest projected triangle edge, edges clipped to z >= near.
inline double nearest_projected_edge(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam, int u, int v) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles)
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d p = pose.apply(mesh.vertices[t[i]]), q = pose.apply(mesh.vertices[t[(i + 1) % 3]]);
      if (p.z() < kNearPlane && q.z() < kNearPlane) continue;
      if (p.z() < kNearPlane) std::swap(p, q);
      if (q.z() < kNearPlane) q = p + (kNearPlane - p.z()) / (q.z() - p.z()) * (q - p);
      best = std::min(best, segment_distance({u, v}, cam.project(p), cam.project(q)));
    }
  return best;
}

struct OracleComparison {
  int common = 0, disagreements = 0, off_boundary = 0;
  double max_rel = 0;
};

/// Rasteriser against per-pixel ray casting; coverage disagreements further
/// than 1 px from every projected edge count as off_boundary.
inline OracleComparison compare_to_raycast(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam) {
  const DepthMap depth = render_depth(mesh, pose, cam);
  OracleComparison c;
  for (int v = 0; v < cam.height; ++v)
    for (int u = 0; u < cam.width; ++u) {
      const RayHit hit = raycast_pixel(mesh, pose, cam, u, v);
      const bool raster = std::isfinite(depth(u, v)), ray = std::isfinite(hit.distance);
      if (raster && ray) {
        ++c.common;
        c.max_rel = std::max(c.max_rel, std::abs(depth(u, v) - hit.distance) / hit.distance);
      } else if (raster != ray) {
        ++c.disagreements;
        if (nearest_projected_edge(mesh, pose, cam, u, v) > 1.0) ++c.off_boundary;
      }
    }
  return c;
}

}  // namespace sattrack::testing
