#pragma once

#include <iosfwd>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "sattrack/edge.hpp"
#include "sattrack/render.hpp"
#include "sattrack/scheduler.hpp"
#include "sattrack/stripes.hpp"

namespace sattrack {

struct Correspondence {
  Eigen::Vector2i model_px;  ///< depth-edge pixel
  Eigen::Vector2i image_px;  ///< matched intensity-edge pixel
  Eigen::Vector2d normal;    ///< unit depth-edge gradient direction
  double depth = 0;          ///< meters at model_px, NaN when unknown
  double residual = 0;       ///< dot(image_px - model_px, normal)
};

struct CorrespondenceSet {
  std::vector<Correspondence> items;  ///< ordered by model_px in raster order
  int frame = -1;

  std::size_t size() const noexcept { return items.size(); }
  bool empty() const noexcept { return items.empty(); }
};

struct MatchParams {
  int radius = 8;                                 ///< pixels along the normal
  double max_angle = 30.0 * std::numbers::pi / 180;  ///< radians, orientations compared modulo pi
  void validate() const;
};

/// Pixel offsets visited along `normal` in the positive direction, nearest
/// first: one step per pixel on the major axis, rounded on the minor one,
/// stopping once the projection onto the normal exceeds `radius`.
std::vector<Eigen::Vector2i> normal_ray(const Eigen::Vector2d& normal, int radius);

/// Orientation difference folded modulo pi into [0, pi/2].
double orientation_distance(double a, double b);

/// For every depth-edge pixel, walks its normal ray both ways and keeps the
/// nearest intensity edge passing the angle gate (the negative side wins
/// ties). `depth`, when given, supplies the smallest finite depth in the
/// pixel's 3x3 neighbourhood.
CorrespondenceSet match_perpendicular(const EdgeMap& depth_edges, const EdgeMap& intensity_edges,
                                      const MatchParams& params = {}, const DepthMap* depth = nullptr);

/// Same result as `match_perpendicular`; each stripe matches its own model
/// pixels reading intensity edges only inside its halo window, which must be
/// at least `radius` rows.
CorrespondenceSet match_striped(const EdgeMap& depth_edges, const EdgeMap& intensity_edges,
                                const MatchParams& params, const std::vector<Stripe>& stripes,
                                const DepthMap* depth = nullptr, const TaskSet& schedule = {});

/// CSV: model_x,model_y,image_x,image_y,nx,ny,depth,residual
void write_correspondences_csv(std::ostream& os, const CorrespondenceSet& set);

}  // namespace sattrack
