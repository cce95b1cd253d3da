#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "sattrack/errors.hpp"

namespace sattrack {

enum class PixelFormat { Gray8, Gray16, GrayF32, RGB8 };

/// Dense row-major image. `stride` counts scalar elements per row, so a row
/// holds `width * Channels` values followed by optional padding.
template <typename Scalar, int Channels = 1>
class Image {
 public:
  using value_type = Scalar;
  static constexpr int channels = Channels;

  Image() = default;
  Image(int width, int height, Scalar fill = Scalar{})
      : Image(width, height, width * Channels, fill) {}
  Image(int width, int height, int stride, Scalar fill)
      : width_(width), height_(height), stride_(stride) {
    if (width < 0 || height < 0) throw ArgumentError("negative image dimensions");
    if (stride < width * Channels) throw ArgumentError("stride smaller than row width");
    data_.assign(static_cast<std::size_t>(stride) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int stride() const noexcept { return stride_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  Scalar& operator()(int x, int y, int c = 0) noexcept {
    return data_[static_cast<std::size_t>(y) * stride_ + x * Channels + c];
  }
  const Scalar& operator()(int x, int y, int c = 0) const noexcept {
    return data_[static_cast<std::size_t>(y) * stride_ + x * Channels + c];
  }

  std::span<Scalar> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * stride_,
            static_cast<std::size_t>(width_) * Channels};
  }
  std::span<const Scalar> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * stride_,
            static_cast<std::size_t>(width_) * Channels};
  }

  std::span<Scalar> data() noexcept { return data_; }
  std::span<const Scalar> data() const noexcept { return data_; }

  friend bool operator==(const Image& a, const Image& b) {
    if (a.width_ != b.width_ || a.height_ != b.height_) return false;
    for (int y = 0; y < a.height_; ++y) {
      auto ra = a.row(y);
      auto rb = b.row(y);
      for (std::size_t i = 0; i < ra.size(); ++i)
        if (ra[i] != rb[i]) return false;
    }
    return true;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int stride_ = 0;
  std::vector<Scalar> data_;
};

using GrayImage8 = Image<std::uint8_t, 1>;
using GrayImage16 = Image<std::uint16_t, 1>;
using GrayImageF = Image<float, 1>;
using RgbImage8 = Image<std::uint8_t, 3>;

/// Any of the supported file-backed formats.
using AnyImage = std::variant<GrayImage8, GrayImage16, GrayImageF, RgbImage8>;

template <typename Img>
constexpr PixelFormat format_of() {
  using S = typename Img::value_type;
  if constexpr (Img::channels == 3) {
    static_assert(std::is_same_v<S, std::uint8_t>);
    return PixelFormat::RGB8;
  } else if constexpr (std::is_same_v<S, std::uint8_t>) {
    return PixelFormat::Gray8;
  } else if constexpr (std::is_same_v<S, std::uint16_t>) {
    return PixelFormat::Gray16;
  } else {
    static_assert(std::is_same_v<S, float>);
    return PixelFormat::GrayF32;
  }
}

PixelFormat format_of(const AnyImage& img);
const char* to_string(PixelFormat f);

/// Rec.601 luma, rounded and clamped to [0, 255].
GrayImage8 rgb_to_grayscale(const RgbImage8& img);
/// Throws FormatError unless `img` holds RGB8.
GrayImage8 rgb_to_grayscale(const AnyImage& img);

/// Converts any supported format to single-channel float in the source's
/// value range (RGB goes through `rgb_to_grayscale` first).
GrayImageF to_float(const AnyImage& img);
GrayImageF to_float(const GrayImage8& img);

/// Rounds and clamps to [0, 255].
GrayImage8 to_gray8(const GrayImageF& img);

}  // namespace sattrack
