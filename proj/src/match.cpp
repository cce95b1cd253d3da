#include "sattrack/match.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>

#include "sattrack/errors.hpp"

namespace sattrack {

void MatchParams::validate() const {
  if (radius < 1) throw ArgumentError("match radius must be at least 1");
  if (!(max_angle >= 0.0)) throw ArgumentError("max_angle must be non-negative");
}

std::vector<Eigen::Vector2i> normal_ray(const Eigen::Vector2d& normal, int radius) {
  std::vector<Eigen::Vector2i> out;
  const bool x_major = std::abs(normal.x()) >= std::abs(normal.y());
  const double major = x_major ? normal.x() : normal.y();
  const double minor = x_major ? normal.y() : normal.x();
  const int step = major >= 0 ? 1 : -1;
  for (int k = 1;; ++k) {
    const int a = k * step;
    const int b = static_cast<int>(std::lround(k * minor / std::abs(major)));
    const Eigen::Vector2i o = x_major ? Eigen::Vector2i(a, b) : Eigen::Vector2i(b, a);
    if (std::abs(o.cast<double>().dot(normal)) > radius) break;
    out.push_back(o);
  }
  return out;
}

double orientation_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

namespace {

void check_inputs(const EdgeMap& depth_edges, const EdgeMap& intensity_edges, const MatchParams& params,
                  const DepthMap* depth) {
  params.validate();
  if (depth_edges.width() != intensity_edges.width() || depth_edges.height() != intensity_edges.height())
    throw ArgumentError("edge maps differ in size");
  if (depth && (depth->width() != depth_edges.width() || depth->height() != depth_edges.height()))
    throw ArgumentError("depth map differs in size from the edge maps");
}

double neighbourhood_depth(const DepthMap& depth, int x, int y) {
  double best = std::numeric_limits<double>::infinity();
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int sx = x + dx, sy = y + dy;
      if (sx < 0 || sy < 0 || sx >= depth.width() || sy >= depth.height()) continue;
      const float d = depth(sx, sy);
      if (std::isfinite(d) && d < best) best = d;
    }
  return std::isfinite(best) ? best : std::numeric_limits<double>::quiet_NaN();
}

// Matches the model pixels in rows [row_begin, row_end), reading intensity
// edges only from rows [read_begin, read_end).
void match_rows(const EdgeMap& depth_edges, const EdgeMap& intensity_edges, const MatchParams& params,
                const DepthMap* depth, int row_begin, int row_end, int read_begin, int read_end,
                std::vector<Correspondence>& out) {
  const int w = depth_edges.width();
  auto accepts = [&](int x, int y, float theta) {
    return x >= 0 && x < w && y >= read_begin && y < read_end && intensity_edges.is_edge(x, y) &&
           orientation_distance(intensity_edges.orientation(x, y), theta) <= params.max_angle;
  };
  for (int y = row_begin; y < row_end; ++y)
    for (int x = 0; x < w; ++x) {
      if (!depth_edges.is_edge(x, y)) continue;
      const float theta = depth_edges.orientation(x, y);
      const Eigen::Vector2d n(std::cos(theta), std::sin(theta));
      const Eigen::Vector2i m(x, y);
      std::optional<Eigen::Vector2i> hit;
      if (accepts(x, y, theta)) hit = m;
      if (!hit) {
        for (const auto& o : normal_ray(n, params.radius)) {
          if (accepts(x - o.x(), y - o.y(), theta)) {
            hit = m - o;
            break;
          }
          if (accepts(x + o.x(), y + o.y(), theta)) {
            hit = m + o;
            break;
          }
        }
      }
      if (!hit) continue;
      Correspondence c;
      c.model_px = m;
      c.image_px = *hit;
      c.normal = n;
      c.residual = (*hit - m).cast<double>().dot(n);
      c.depth = depth ? neighbourhood_depth(*depth, x, y) : std::numeric_limits<double>::quiet_NaN();
      out.push_back(c);
    }
}

}  // namespace

CorrespondenceSet match_perpendicular(const EdgeMap& depth_edges, const EdgeMap& intensity_edges,
                                      const MatchParams& params, const DepthMap* depth) {
  check_inputs(depth_edges, intensity_edges, params, depth);
  CorrespondenceSet set;
  const int h = depth_edges.height();
  match_rows(depth_edges, intensity_edges, params, depth, 0, h, 0, h, set.items);
  return set;
}

CorrespondenceSet match_striped(const EdgeMap& depth_edges, const EdgeMap& intensity_edges,
                                const MatchParams& params, const std::vector<Stripe>& stripes,
                                const DepthMap* depth, const TaskSet& schedule) {
  check_inputs(depth_edges, intensity_edges, params, depth);
  validate_stripes(stripes, depth_edges.height());
  require_halo(stripes, depth_edges.height(), params.radius);
  std::vector<std::vector<Correspondence>> parts(stripes.size());
  TaskSet set = schedule;
  set.n_tasks = stripes.size();
  run_tasks(set, [&](std::size_t s) {
    const Stripe& st = stripes[s];
    match_rows(depth_edges, intensity_edges, params, depth, st.row_begin, st.row_end, st.read_begin(),
               st.read_end(), parts[s]);
  });
  CorrespondenceSet out;
  for (auto& p : parts) out.items.insert(out.items.end(), p.begin(), p.end());
  return out;
}

void write_correspondences_csv(std::ostream& os, const CorrespondenceSet& set) {
  os << "model_x,model_y,image_x,image_y,nx,ny,depth,residual\n";
  os << std::setprecision(9);
  for (const auto& c : set.items)
    os << c.model_px.x() << ',' << c.model_px.y() << ',' << c.image_px.x() << ',' << c.image_px.y() << ','
       << c.normal.x() << ',' << c.normal.y() << ',' << c.depth << ',' << c.residual << '\n';
}

}  // namespace sattrack
