#include "sattrack/edge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sattrack/image_io.hpp"

namespace sattrack {

std::size_t EdgeMap::count() const {
  std::size_t n = 0;
  for (int y = 0; y < edge.height(); ++y)
    for (auto v : edge.row(y)) n += v != 0;
  return n;
}

int blur_radius(double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("blur sigma must be positive");
  return static_cast<int>(std::ceil(3.0 * sigma));
}

std::vector<float> gaussian_kernel(double sigma) {
  const int r = blur_radius(sigma);
  std::vector<double> w(2 * r + 1);
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    w[k + r] = std::exp(-0.5 * k * k / (sigma * sigma));
    sum += w[k + r];
  }
  std::vector<float> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<float>(w[i] / sum);
  return out;
}

namespace {

float fold_orientation(float gx, float gy) {
  constexpr float pi = std::numbers::pi_v<float>;
  float theta = std::atan2(gy, gx);
  if (theta < 0.0f) theta += pi;
  if (theta >= pi) theta -= pi;
  return theta;
}

/// Rows `[read_begin, read_end)` of an image, addressed by absolute row index
/// with clamping to `[0, height)`. Any access that would need a row outside
/// the window is a halo violation.
class RowWindow {
 public:
  RowWindow(int width, int height, int read_begin, int read_end)
      : height_(height), begin_(read_begin), rows_(width, read_end - read_begin) {}

  std::span<float> row(int y) { return rows_.row(y - begin_); }
  std::span<const float> clamped_row(int y) const {
    const int cy = std::clamp(y, 0, height_ - 1);
    if (cy < begin_ || cy >= begin_ + rows_.height())
      throw ArgumentError("row " + std::to_string(cy) + " is outside the stripe halo");
    return rows_.row(cy - begin_);
  }
  int begin() const { return begin_; }
  int end() const { return begin_ + rows_.height(); }

 private:
  int height_;
  int begin_;
  GrayImageF rows_;
};

void horizontal_blur_row(std::span<const float> src, std::span<float> dst, const std::vector<float>& kernel) {
  const int w = static_cast<int>(src.size());
  const int r = static_cast<int>(kernel.size() / 2);
  for (int x = 0; x < w; ++x) {
    float acc = 0.0f;
    for (int k = -r; k <= r; ++k) acc += kernel[k + r] * src[std::clamp(x + k, 0, w - 1)];
    dst[x] = acc;
  }
}

/// Blurs rows [out_begin, out_end) reading only `img` rows inside the window.
RowWindow blur_window(const GrayImageF& img, const std::vector<float>& kernel, int read_begin, int read_end,
                      int out_begin, int out_end) {
  const int r = static_cast<int>(kernel.size() / 2);
  RowWindow horizontal(img.width(), img.height(), read_begin, read_end);
  for (int y = read_begin; y < read_end; ++y) horizontal_blur_row(img.row(y), horizontal.row(y), kernel);

  RowWindow blurred(img.width(), img.height(), out_begin, out_end);
  std::vector<std::span<const float>> taps(kernel.size());
  for (int y = out_begin; y < out_end; ++y) {
    for (int k = -r; k <= r; ++k) taps[k + r] = horizontal.clamped_row(y + k);
    auto dst = blurred.row(y);
    for (int x = 0; x < img.width(); ++x) {
      float acc = 0.0f;
      for (int k = 0; k <= 2 * r; ++k) acc += kernel[k] * taps[k][x];
      dst[x] = acc;
    }
  }
  return blurred;
}

/// Sobel over rows [out_begin, out_end), writing into full-size outputs.
void sobel_rows(const RowWindow& src, int width, int out_begin, int out_end, Gradients& g) {
  for (int y = out_begin; y < out_end; ++y) {
    auto up = src.clamped_row(y - 1);
    auto mid = src.clamped_row(y);
    auto down = src.clamped_row(y + 1);
    for (int x = 0; x < width; ++x) {
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, width - 1);
      const float gx = (up[xr] + 2.0f * mid[xr] + down[xr]) - (up[xl] + 2.0f * mid[xl] + down[xl]);
      const float gy = (down[xl] + 2.0f * down[x] + down[xr]) - (up[xl] + 2.0f * up[x] + up[xr]);
      g.gx(x, y) = gx;
      g.gy(x, y) = gy;
      g.magnitude(x, y) = std::hypot(gx, gy);
      g.orientation(x, y) = fold_orientation(gx, gy);
    }
  }
}

Gradients make_gradients(int w, int h) {
  return {GrayImageF(w, h), GrayImageF(w, h), GrayImageF(w, h), GrayImageF(w, h)};
}

enum : std::uint8_t { kNone = 0, kWeak = 1, kStrong = 2 };

constexpr float kNmsTie = 1e-2f;  // relative

/// Non-maximum suppression plus threshold classification of one stripe.
void suppress_rows(const GrayImageF& magnitude, const GrayImageF& orientation, float low, float high,
                   int row_begin, int row_end, GrayImage8& classes) {
  const int w = magnitude.width();
  const int h = magnitude.height();
  auto mag_at = [&](int x, int y) -> float {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0f;
    return magnitude(x, y);
  };
  for (int y = row_begin; y < row_end; ++y)
    for (int x = 0; x < w; ++x) {
      const float m = magnitude(x, y);
      std::uint8_t cls = kNone;
      if (m >= low && m > 0.0f) {
        const auto [dx, dy] = nms_direction(orientation(x, y));
        // Near-equal neighbours count as a tie, resolved toward the -(dx,dy)
        // side: a step between two pixels then lands on the same pixel no
        // matter which image (intensity or depth) it came from.
        const float prev = mag_at(x - dx, y - dy), next = mag_at(x + dx, y + dy);
        if (m - prev > kNmsTie * m && next - m <= kNmsTie * next) cls = m >= high ? kStrong : kWeak;
      }
      classes(x, y) = cls;
    }
}

void hysteresis(const GrayImage8& classes, GrayImage8& edge) {
  const int w = classes.width();
  const int h = classes.height();
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (classes(x, y) != kStrong || edge(x, y)) continue;
      edge(x, y) = 1;
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (classes(nx, ny) == kNone || edge(nx, ny)) continue;
            edge(nx, ny) = 1;
            stack.emplace_back(nx, ny);
          }
      }
    }
}

}  // namespace

std::pair<int, int> nms_direction(float orientation) {
  constexpr float pi = std::numbers::pi_v<float>;
  if (orientation < pi / 8 || orientation >= 7 * pi / 8) return {1, 0};
  if (orientation < 3 * pi / 8) return {1, 1};
  if (orientation < 5 * pi / 8) return {0, 1};
  return {-1, 1};
}

GrayImageF gaussian_blur(const GrayImageF& img, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  if (img.empty()) return img;
  auto window = blur_window(img, kernel, 0, img.height(), 0, img.height());
  GrayImageF out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    auto src = window.clamped_row(y);
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

Gradients sobel_gradients(const GrayImageF& img) {
  if (img.width() < 3 || img.height() < 3) throw ArgumentError("Sobel needs an image of at least 3x3 pixels");
  RowWindow window(img.width(), img.height(), 0, img.height());
  for (int y = 0; y < img.height(); ++y) std::copy(img.row(y).begin(), img.row(y).end(), window.row(y).begin());
  auto g = make_gradients(img.width(), img.height());
  sobel_rows(window, img.width(), 0, img.height(), g);
  return g;
}

EdgeMap canny(const GrayImageF& img, const CannyParams& params) {
  return canny_striped(img, params, decompose_stripes(std::max(img.height(), 1), 1, 0));
}

EdgeMap canny_striped(const GrayImageF& img, const CannyParams& params, const std::vector<Stripe>& stripes,
                      const TaskSet& schedule, std::vector<TaskTrace>* trace) {
  if (img.width() < 3 || img.height() < 3) throw ArgumentError("Canny needs an image of at least 3x3 pixels");
  if (params.low && params.high && !(*params.low > 0.0f && *params.low < *params.high))
    throw ArgumentError("Canny thresholds must satisfy 0 < low < high");
  if (params.low.has_value() != params.high.has_value())
    throw ArgumentError("Canny thresholds must both be set or both be automatic");
  const auto kernel = gaussian_kernel(params.sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  require_halo(stripes, img.height(), radius + 1);

  const int w = img.width();
  const int h = img.height();
  auto g = make_gradients(w, h);

  TaskSet set = schedule;
  set.n_tasks = stripes.size();
  auto phase1 = run_tasks(set, [&](std::size_t i) {
    const Stripe& s = stripes[i];
    const int blur_begin = std::max(s.row_begin - 1, 0);
    const int blur_end = std::min(s.row_end + 1, h);
    auto blurred = blur_window(img, kernel, s.read_begin(), s.read_end(), blur_begin, blur_end);
    sobel_rows(blurred, w, s.row_begin, s.row_end, g);
  });

  float low = 0.0f, high = 0.0f;
  if (params.low) {
    low = *params.low;
    high = *params.high;
  } else {
    float max_mag = 0.0f;
    for (int y = 0; y < h; ++y)
      for (float m : g.magnitude.row(y)) max_mag = std::max(max_mag, m);
    low = static_cast<float>(params.auto_low_ratio * max_mag);
    high = static_cast<float>(params.auto_high_ratio * max_mag);
  }

  if (trace) *trace = std::move(phase1);
  EdgeMap out{GrayImage8(w, h), std::move(g.orientation), std::move(g.magnitude)};
  if (!(high > 0.0f)) return out;  // flat image

  GrayImage8 classes(w, h);
  auto phase2 = run_tasks(set, [&](std::size_t i) {
    suppress_rows(out.magnitude, out.orientation, low, high, stripes[i].row_begin, stripes[i].row_end, classes);
  });
  if (trace) trace->insert(trace->end(), phase2.begin(), phase2.end());

  hysteresis(classes, out.edge);
  return out;
}

void write_edge_map(const EdgeMap& edges, const std::filesystem::path& path,
                    const std::filesystem::path& orientation_path) {
  GrayImage8 img(edges.width(), edges.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) img(x, y) = edges.is_edge(x, y) ? 255 : 0;
  write_image(img, path);
  write_image(edges.orientation, orientation_path);
}

}  // namespace sattrack
