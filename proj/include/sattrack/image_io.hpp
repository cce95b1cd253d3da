#pragma once

#include <filesystem>
#include <string_view>

#include "sattrack/image.hpp"

namespace sattrack {

// Binary netpbm I/O:
//   P5 maxval <= 255      <-> Gray8
//   P5 256..65535         <-> Gray16 (big-endian samples, written as 65535)
//   P6 maxval 255         <-> RGB8
//   Pf scale -1.0         <-> GrayF32 (little-endian, bottom row first)
// Writing then reading any image reproduces its pixels bit for bit.

AnyImage read_image(const std::filesystem::path& path);
AnyImage decode_image(std::string_view bytes);

void write_image(const AnyImage& img, const std::filesystem::path& path);
std::string encode_image(const AnyImage& img);

template <typename Img>
void write_image(const Img& img, const std::filesystem::path& path) {
  write_image(AnyImage{img}, path);
}

}  // namespace sattrack
