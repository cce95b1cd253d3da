#pragma once

#include <string>

#include "sattrack/edge.hpp"
#include "sattrack/geometry.hpp"
#include "sattrack/match.hpp"
#include "sattrack/mesh.hpp"
#include "sattrack/refine.hpp"
#include "sattrack/render.hpp"
#include "sattrack/scheduler.hpp"

namespace sattrack {

struct TrackParams {
  CannyParams image_canny;                 ///< on the camera frame
  CannyParams depth_canny;                 ///< on the rendered depth map; same blur keeps thin parts aligned
  MatchParams match;
  RefineConfig refine = RefineConfig::huber();
  int outer_iterations = 3;                ///< render-match-refine rounds
  std::size_t min_correspondences = 50;
  int n_stripes = 16;
  int n_workers = 1;
  ScheduleMode render_mode = ScheduleMode::Dynamic;  ///< content-dependent cost
  ScheduleMode stripe_mode = ScheduleMode::Static;   ///< edge detection and matching
  void validate() const;
};

struct StageTimings {
  double edge_ms = 0, render_ms = 0, depth_edge_ms = 0, match_ms = 0, refine_ms = 0;
  double total_ms() const { return edge_ms + render_ms + depth_edge_ms + match_ms + refine_ms; }
};

struct TrackReport {
  Pose pose;                    ///< refined, or the previous pose when lost
  std::size_t correspondences = 0;  ///< in the last round
  double inlier_fraction = 0;
  int iterations = 0;           ///< IRLS iterations over all rounds
  bool converged = false;
  bool lost = false;
  std::string lost_reason;
  StageTimings timings;
};

/// Converts a depth map into something an edge detector can digest:
/// background becomes max + max(1, max - min) of the finite depths.
GrayImageF depth_for_edges(const DepthMap& depth);

/// Edges of the camera frame, then `outer_iterations` rounds of depth render
/// at the current pose, depth edges, perpendicular matching and robust
/// refinement. Loss of track is reported, not thrown.
TrackReport track_frame(const Pose& prev_pose, const GrayImageF& image, const TriangleMesh& mesh,
                        const CameraModel& cam, const TrackParams& params = {});

}  // namespace sattrack
