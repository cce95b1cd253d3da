#include "sattrack/image.hpp"

#include <algorithm>
#include <cmath>

namespace sattrack {

PixelFormat format_of(const AnyImage& img) {
  return std::visit([](const auto& im) { return format_of<std::decay_t<decltype(im)>>(); }, img);
}

const char* to_string(PixelFormat f) {
  switch (f) {
    case PixelFormat::Gray8: return "Gray8";
    case PixelFormat::Gray16: return "Gray16";
    case PixelFormat::GrayF32: return "GrayF32";
    case PixelFormat::RGB8: return "RGB8";
  }
  return "?";
}

GrayImage8 rgb_to_grayscale(const RgbImage8& img) {
  GrayImage8 out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    auto src = img.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < img.width(); ++x) {
      const double luma = 0.299 * src[3 * x] + 0.587 * src[3 * x + 1] + 0.114 * src[3 * x + 2];
      dst[x] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
    }
  }
  return out;
}

GrayImage8 rgb_to_grayscale(const AnyImage& img) {
  if (const auto* rgb = std::get_if<RgbImage8>(&img)) return rgb_to_grayscale(*rgb);
  throw FormatError(std::string("rgb_to_grayscale expects RGB8, got ") + to_string(format_of(img)));
}

GrayImageF to_float(const GrayImage8& img) {
  GrayImageF out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    auto src = img.row(y);
    auto dst = out.row(y);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

GrayImageF to_float(const AnyImage& img) {
  return std::visit(
      [](const auto& im) -> GrayImageF {
        using Img = std::decay_t<decltype(im)>;
        if constexpr (Img::channels == 3) {
          return to_float(rgb_to_grayscale(im));
        } else if constexpr (std::is_same_v<Img, GrayImageF>) {
          return im;
        } else {
          GrayImageF out(im.width(), im.height());
          for (int y = 0; y < im.height(); ++y) {
            auto src = im.row(y);
            auto dst = out.row(y);
            std::copy(src.begin(), src.end(), dst.begin());
          }
          return out;
        }
      },
      img);
}

GrayImage8 to_gray8(const GrayImageF& img) {
  GrayImage8 out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    auto src = img.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < img.width(); ++x)
      dst[x] = static_cast<std::uint8_t>(std::clamp(std::lround(src[x]), 0L, 255L));
  }
  return out;
}

}  // namespace sattrack
