#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstddef>
#include <limits>
#include <list>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "sattrack/image.hpp"
#include "sattrack/scheduler.hpp"
#include "sattrack/stripes.hpp"

namespace sattrack {

enum class ResampleAlgorithm { Bilinear, Bicubic, Lanczos };

const char* to_string(ResampleAlgorithm algo);
ResampleAlgorithm parse_resample_algorithm(const std::string& text);

/// Support width of each kernel, in source pixels per axis.
constexpr int region_of(ResampleAlgorithm algo) {
  switch (algo) {
    case ResampleAlgorithm::Bilinear: return 2;
    case ResampleAlgorithm::Bicubic: return 4;
    case ResampleAlgorithm::Lanczos: return 8;
  }
  return 0;
}

struct ResampleSpec {
  ResampleAlgorithm algorithm = ResampleAlgorithm::Bilinear;
  double scale = 0.5;  ///< output size = round(input size * scale), 0 < scale <= 1

  int region() const noexcept { return region_of(algorithm); }
  void validate() const;
};

/// round(in_size * scale); throws ArgumentError if the result is zero.
int resampled_size(int in_size, double scale);

/// Windowed sinc: sinc(x) * sinc(x / lobes) inside |x| < lobes, else 0.
double lanczos_kernel(double x, int lobes = 4);

/// Catmull-Rom cubic (a = -0.5).
double cubic_kernel(double x);

/// Per-axis filter taps. Output sample `o` reads source samples
/// `first[o] .. first[o] + region - 1` (unclamped indices) with weights
/// `weights[o * region + k]`, which sum to one.
struct AxisTaps {
  int region = 0;
  std::vector<int> first;
  std::vector<float> weights;

  std::span<const float> weights_of(int o) const {
    return {weights.data() + static_cast<std::size_t>(o) * region, static_cast<std::size_t>(region)};
  }
};

/// Output sample `o` is centred at source coordinate (o + 0.5) / scale - 0.5.
AxisTaps make_axis_taps(int in_size, int out_size, double scale, ResampleAlgorithm algo);

/// Fixed-capacity window of consecutive input rows held in a doubly linked
/// list of row buffers. Sliding the window forward by k < capacity rows moves
/// the k oldest nodes to the back and refills only those; surviving rows are
/// never copied.
class SlidingRowBuffer {
 public:
  SlidingRowBuffer(int capacity, std::size_t row_elements);

  int capacity() const noexcept { return capacity_; }
  /// First virtual row index currently held, INT_MIN before the first slide.
  int top_row() const noexcept { return top_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t row_elements() const noexcept { return row_elements_; }
  /// Rows filled through the loader since construction.
  std::size_t rows_loaded() const noexcept { return rows_loaded_; }

  /// Makes the window hold virtual rows [top, top + capacity). `load(row, dst)`
  /// fills `dst` with the contents of virtual row `row`.
  template <typename Loader>
  void slide_to(int top, Loader&& load) {
    const bool reuse = top_ != INT_MIN && top >= top_ && top < top_ + capacity_;
    if (!reuse) {
      int row = top;
      for (auto& node : nodes_) load(row++, std::span<float>(node));
      rows_loaded_ += static_cast<std::size_t>(capacity_);
    } else {
      const int shift = top - top_;
      for (int i = 0; i < shift; ++i) {
        nodes_.splice(nodes_.end(), nodes_, nodes_.begin());
        load(top + capacity_ - shift + i, std::span<float>(nodes_.back()));
      }
      rows_loaded_ += static_cast<std::size_t>(shift);
    }
    top_ = top;
    refresh_view();
  }

  /// Row `i` of the window, `0 <= i < capacity`.
  std::span<const float> row(int i) const noexcept { return {view_[i], row_elements_}; }

 private:
  void refresh_view();

  int capacity_;
  std::size_t row_elements_;
  int top_ = INT_MIN;
  std::size_t rows_loaded_ = 0;
  std::list<std::vector<float>> nodes_;
  std::vector<const float*> view_;
};

namespace detail {

template <typename Scalar>
Scalar store_sample(float v) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    return static_cast<Scalar>(v);
  } else {
    constexpr float hi = static_cast<float>(std::numeric_limits<Scalar>::max());
    return static_cast<Scalar>(std::clamp(std::round(v), 0.0f, hi));
  }
}

/// Precomputed taps shared by every stripe of one resampling job.
struct ResamplePlan {
  ResampleSpec spec;
  int in_width = 0, in_height = 0, out_width = 0, out_height = 0;
  int pad = 0;  ///< clamped columns added on each side of a buffered row
  AxisTaps horizontal, vertical;
};

ResamplePlan make_plan(int in_width, int in_height, const ResampleSpec& spec);

}  // namespace detail

/// Produces output rows `[stripe.row_begin, stripe.row_end)` of the resampled
/// image (stripe rows index the output image) into `out`, whose row 0
/// corresponds to `stripe.row_begin`. `buf` must have capacity == region.
template <typename Scalar, int C>
void resample_stripe_into(const Image<Scalar, C>& img, const detail::ResamplePlan& plan,
                          const Stripe& stripe, SlidingRowBuffer& buf, Image<Scalar, C>& out) {
  const int region = plan.spec.region();
  if (buf.capacity() != region)
    throw ArgumentError("row buffer capacity " + std::to_string(buf.capacity()) +
                        " does not match region " + std::to_string(region));
  const int pad = plan.pad;
  const int padded = img.width() + 2 * pad;
  if (buf.row_elements() != static_cast<std::size_t>(padded) * C)
    throw ArgumentError("row buffer width does not match the padded input row");

  auto load = [&](int virtual_row, std::span<float> dst) {
    const int y = std::clamp(virtual_row, 0, img.height() - 1);
    auto src = img.row(y);
    for (int x = -pad; x < img.width() + pad; ++x) {
      const int sx = std::clamp(x, 0, img.width() - 1);
      for (int c = 0; c < C; ++c) dst[(x + pad) * C + c] = static_cast<float>(src[sx * C + c]);
    }
  };

  std::vector<float> column_sum(static_cast<std::size_t>(padded) * C);
  for (int oy = stripe.row_begin; oy < stripe.row_end; ++oy) {
    buf.slide_to(plan.vertical.first[oy], load);
    const auto wy = plan.vertical.weights_of(oy);

    // vertical pass over whole padded rows, then horizontal taps
    std::fill(column_sum.begin(), column_sum.end(), 0.0f);
    for (int k = 0; k < region; ++k) {
      const float w = wy[k];
      const float* src = buf.row(k).data();
      float* dst = column_sum.data();
      const std::size_t n = column_sum.size();
      for (std::size_t i = 0; i < n; ++i) dst[i] += w * src[i];
    }

    auto dst = out.row(oy - stripe.row_begin);
    for (int ox = 0; ox < plan.out_width; ++ox) {
      const auto wx = plan.horizontal.weights_of(ox);
      const int base = plan.horizontal.first[ox] + pad;
      for (int c = 0; c < C; ++c) {
        float acc = 0.0f;
        for (int k = 0; k < region; ++k) acc += wx[k] * column_sum[(base + k) * C + c];
        dst[ox * C + c] = detail::store_sample<Scalar>(acc);
      }
    }
  }
}

/// Output rows of one stripe as a standalone image of height stripe.rows().
template <typename Scalar, int C>
Image<Scalar, C> resample_striped(const Image<Scalar, C>& img, const ResampleSpec& spec,
                                  const Stripe& stripe, SlidingRowBuffer& buf) {
  const auto plan = detail::make_plan(img.width(), img.height(), spec);
  if (stripe.row_begin < 0 || stripe.row_end > plan.out_height || stripe.row_begin >= stripe.row_end)
    throw ArgumentError("stripe outside the output image");
  Image<Scalar, C> out(plan.out_width, stripe.rows());
  resample_stripe_into(img, plan, stripe, buf, out);
  return out;
}

/// Whole-image resampling, optionally split into output-row stripes run
/// through the scheduler. Output is bit-identical for any stripe count,
/// worker count and schedule mode.
template <typename Scalar, int C>
Image<Scalar, C> resample(const Image<Scalar, C>& img, const ResampleSpec& spec, int n_stripes = 1,
                          const TaskSet& schedule = {}, std::vector<TaskTrace>* trace = nullptr) {
  const auto plan = detail::make_plan(img.width(), img.height(), spec);
  const auto stripes = decompose_stripes(plan.out_height, std::min(n_stripes, plan.out_height), 0);
  std::vector<Image<Scalar, C>> parts(stripes.size());
  TaskSet set = schedule;
  set.n_tasks = stripes.size();
  auto tr = run_tasks(set, [&](std::size_t i) {
    SlidingRowBuffer buf(plan.spec.region(), static_cast<std::size_t>(img.width() + 2 * plan.pad) * C);
    parts[i] = Image<Scalar, C>(plan.out_width, stripes[i].rows());
    resample_stripe_into(img, plan, stripes[i], buf, parts[i]);
  });
  if (trace) *trace = std::move(tr);
  Image<Scalar, C> out(plan.out_width, plan.out_height);
  for (std::size_t i = 0; i < stripes.size(); ++i)
    for (int y = 0; y < stripes[i].rows(); ++y) {
      auto src = parts[i].row(y);
      std::copy(src.begin(), src.end(), out.row(stripes[i].row_begin + y).begin());
    }
  return out;
}

/// Buffer sized for `spec` applied to an image of the given width.
SlidingRowBuffer make_row_buffer(const ResampleSpec& spec, int in_width, int channels);

}  // namespace sattrack
