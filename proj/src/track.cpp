#include "sattrack/track.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "sattrack/errors.hpp"

namespace sattrack {

void TrackParams::validate() const {
  match.validate();
  refine.validate();
  if (outer_iterations < 1) throw ArgumentError("outer_iterations must be at least 1");
  if (n_stripes < 1 || n_workers < 1) throw ArgumentError("stripe and worker counts must be positive");
}

GrayImageF depth_for_edges(const DepthMap& depth) {
  float lo = std::numeric_limits<float>::infinity(), hi = -lo;
  for (int y = 0; y < depth.height(); ++y)
    for (float v : depth.row(y))
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  GrayImageF out(depth.width(), depth.height());
  if (!(lo <= hi)) return out;  // nothing rendered
  const float background = hi + std::max(1.0f, hi - lo);
  for (int y = 0; y < depth.height(); ++y) {
    auto src = depth.row(y);
    auto dst = out.row(y);
    for (std::size_t x = 0; x < src.size(); ++x) dst[x] = std::isfinite(src[x]) ? src[x] : background;
  }
  return out;
}

namespace {

class Stopwatch {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

TrackReport track_frame(const Pose& prev_pose, const GrayImageF& image, const TriangleMesh& mesh,
                        const CameraModel& cam, const TrackParams& params) {
  params.validate();
  cam.validate();
  if (image.width() != cam.width || image.height() != cam.height)
    throw ArgumentError("frame size does not match the camera");

  TrackReport rep;
  rep.pose = prev_pose;
  const int n_stripes = std::min(params.n_stripes, cam.height);
  const TaskSet stripe_tasks{0, params.stripe_mode, params.n_workers};
  const TaskSet render_tasks{static_cast<std::size_t>(n_stripes), params.render_mode, params.n_workers};
  const int edge_halo = blur_radius(std::max(params.image_canny.sigma, params.depth_canny.sigma)) + 1;

  Stopwatch clock;
  const EdgeMap image_edges =
      canny_striped(image, params.image_canny, decompose_stripes(cam.height, n_stripes, edge_halo), stripe_tasks);
  rep.timings.edge_ms += clock.lap_ms();

  Pose pose = prev_pose;
  for (int round = 0; round < params.outer_iterations; ++round) {
    const DepthMap depth = render_depth_scheduled(mesh, pose, cam, render_tasks);
    rep.timings.render_ms += clock.lap_ms();

    const EdgeMap depth_edges = canny_striped(depth_for_edges(depth), params.depth_canny,
                                              decompose_stripes(cam.height, n_stripes, edge_halo), stripe_tasks);
    rep.timings.depth_edge_ms += clock.lap_ms();

    const auto corrs = match_striped(depth_edges, image_edges, params.match,
                                     decompose_stripes(cam.height, n_stripes, params.match.radius), &depth,
                                     stripe_tasks);
    rep.timings.match_ms += clock.lap_ms();
    rep.correspondences = corrs.size();
    if (corrs.size() < params.min_correspondences) {
      rep.lost = true;
      rep.lost_reason = "too few correspondences (" + std::to_string(corrs.size()) + ")";
      break;
    }

    RefineReport refine;
    try {
      pose = refine_pose(pose, corrs, cam, params.refine, &refine);
    } catch (const DegenerateGeometryError& e) {
      rep.lost = true;
      rep.lost_reason = e.what();
      rep.timings.refine_ms += clock.lap_ms();
      break;
    }
    rep.timings.refine_ms += clock.lap_ms();
    rep.iterations += refine.iterations;
    rep.inlier_fraction = refine.inlier_fraction;
    rep.converged = refine.converged;
    if (refine.converged && refine.iterations == 1) break;  // already at the fixed point
  }
  if (!rep.lost) rep.pose = pose;
  return rep;
}

}  // namespace sattrack
