#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "sattrack/image.hpp"
#include "sattrack/scheduler.hpp"
#include "sattrack/stripes.hpp"

namespace sattrack {

/// Binary edge image with per-pixel gradient magnitude and orientation.
/// Orientation is the gradient direction folded into [0, pi).
struct EdgeMap {
  GrayImage8 edge;  ///< 1 on edge pixels, 0 elsewhere
  GrayImageF orientation;
  GrayImageF magnitude;

  int width() const noexcept { return edge.width(); }
  int height() const noexcept { return edge.height(); }
  bool is_edge(int x, int y) const noexcept { return edge(x, y) != 0; }
  std::size_t count() const;
};

struct Gradients {
  GrayImageF gx, gy, magnitude, orientation;
};

struct CannyParams {
  double sigma = 1.4;
  /// Absolute hysteresis thresholds on gradient magnitude. When unset they
  /// default to the ratios below times the image's maximum magnitude.
  std::optional<float> low, high;
  double auto_low_ratio = 0.1;
  double auto_high_ratio = 0.25;
};

/// ceil(3 sigma)
int blur_radius(double sigma);

/// Normalised discrete Gaussian of length 2 * blur_radius(sigma) + 1.
std::vector<float> gaussian_kernel(double sigma);

/// Separable Gaussian with clamp-to-edge borders.
GrayImageF gaussian_blur(const GrayImageF& img, double sigma);

/// 3x3 Sobel pair with clamp-to-edge borders. Requires at least 3x3 pixels.
Gradients sobel_gradients(const GrayImageF& img);

/// Gradient direction quantised to four bins at 45 degree boundaries; returns
/// the pixel step (dx, dy) along which non-maximum suppression compares.
std::pair<int, int> nms_direction(float orientation);

/// Blur, Sobel, non-maximum suppression, hysteresis. Magnitudes within 1% of
/// each other count as equal in suppression; the tie goes to the -(dx, dy) side.
EdgeMap canny(const GrayImageF& img, const CannyParams& params = {});

/// Same result as `canny`, bit for bit. Blur, gradients and non-maximum
/// suppression run per stripe through the scheduler (each stripe reads only
/// its rows plus halo); hysteresis runs once over the whole image. Every
/// stripe needs a halo of at least blur_radius(sigma) + 1 rows. `trace`
/// receives both striped phases' task timings when given.
EdgeMap canny_striped(const GrayImageF& img, const CannyParams& params, const std::vector<Stripe>& stripes,
                      const TaskSet& schedule = {}, std::vector<TaskTrace>* trace = nullptr);

/// Writes edges as a 255/0 PGM at `path` and the orientation plane as PFM at
/// `orientation_path`.
void write_edge_map(const EdgeMap& edges, const std::filesystem::path& path,
                    const std::filesystem::path& orientation_path);

}  // namespace sattrack
