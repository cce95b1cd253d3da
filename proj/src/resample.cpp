#include "sattrack/resample.hpp"

#include <numbers>

namespace sattrack {

const char* to_string(ResampleAlgorithm algo) {
  switch (algo) {
    case ResampleAlgorithm::Bilinear: return "bilinear";
    case ResampleAlgorithm::Bicubic: return "bicubic";
    case ResampleAlgorithm::Lanczos: return "lanczos";
  }
  return "?";
}

ResampleAlgorithm parse_resample_algorithm(const std::string& text) {
  if (text == "bilinear") return ResampleAlgorithm::Bilinear;
  if (text == "bicubic") return ResampleAlgorithm::Bicubic;
  if (text == "lanczos") return ResampleAlgorithm::Lanczos;
  throw ArgumentError("unknown resampling algorithm '" + text + "'");
}

void ResampleSpec::validate() const {
  if (!(scale > 0.0 && scale <= 1.0))
    throw ArgumentError("resampling scale must be in (0, 1], got " + std::to_string(scale));
}

int resampled_size(int in_size, double scale) {
  const auto out = static_cast<int>(std::lround(in_size * scale));
  if (out < 1)
    throw ArgumentError("resampling " + std::to_string(in_size) + " pixels by " +
                        std::to_string(scale) + " gives an empty output");
  return out;
}

double lanczos_kernel(double x, int lobes) {
  if (lobes < 1) throw ArgumentError("lanczos lobes must be >= 1");
  const double ax = std::abs(x);
  if (ax >= lobes) return 0.0;
  if (ax == 0.0) return 1.0;
  if (ax == std::floor(ax)) return 0.0;
  const double px = std::numbers::pi * x;
  return lobes * std::sin(px) * std::sin(px / lobes) / (px * px);
}

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
  return 0.0;
}

namespace {

double kernel(ResampleAlgorithm algo, double d) {
  switch (algo) {
    case ResampleAlgorithm::Bilinear: return std::max(0.0, 1.0 - std::abs(d));
    case ResampleAlgorithm::Bicubic: return cubic_kernel(d);
    case ResampleAlgorithm::Lanczos: return lanczos_kernel(d, 4);
  }
  return 0.0;
}

}  // namespace

AxisTaps make_axis_taps(int in_size, int out_size, double scale, ResampleAlgorithm algo) {
  AxisTaps taps;
  taps.region = region_of(algo);
  taps.first.resize(out_size);
  taps.weights.resize(static_cast<std::size_t>(out_size) * taps.region);
  std::vector<double> w(taps.region);
  for (int o = 0; o < out_size; ++o) {
    const double center = (o + 0.5) / scale - 0.5;
    const int first = static_cast<int>(std::floor(center)) - (taps.region / 2 - 1);
    double sum = 0.0;
    for (int k = 0; k < taps.region; ++k) {
      w[k] = kernel(algo, center - (first + k));
      sum += w[k];
    }
    taps.first[o] = first;
    for (int k = 0; k < taps.region; ++k)
      taps.weights[static_cast<std::size_t>(o) * taps.region + k] = static_cast<float>(w[k] / sum);
  }
  (void)in_size;
  return taps;
}

namespace detail {

ResamplePlan make_plan(int in_width, int in_height, const ResampleSpec& spec) {
  spec.validate();
  if (in_width < 1 || in_height < 1) throw ArgumentError("cannot resample an empty image");
  ResamplePlan plan;
  plan.spec = spec;
  plan.in_width = in_width;
  plan.in_height = in_height;
  plan.out_width = resampled_size(in_width, spec.scale);
  plan.out_height = resampled_size(in_height, spec.scale);
  plan.pad = spec.region();
  plan.horizontal = make_axis_taps(in_width, plan.out_width, spec.scale, spec.algorithm);
  plan.vertical = make_axis_taps(in_height, plan.out_height, spec.scale, spec.algorithm);
  return plan;
}

}  // namespace detail

SlidingRowBuffer::SlidingRowBuffer(int capacity, std::size_t row_elements)
    : capacity_(capacity), row_elements_(row_elements) {
  if (capacity < 1) throw ArgumentError("row buffer capacity must be >= 1");
  for (int i = 0; i < capacity; ++i) nodes_.emplace_back(row_elements);
  view_.reserve(capacity);
  refresh_view();
}

void SlidingRowBuffer::refresh_view() {
  view_.clear();
  for (const auto& node : nodes_) view_.push_back(node.data());
}

SlidingRowBuffer make_row_buffer(const ResampleSpec& spec, int in_width, int channels) {
  return SlidingRowBuffer(spec.region(), static_cast<std::size_t>(in_width + 2 * spec.region()) * channels);
}

}  // namespace sattrack
