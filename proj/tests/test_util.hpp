#pragma once

#include <random>

#include "sattrack/image.hpp"

namespace sattrack::testing {

template <typename Img>
Img random_image(std::mt19937& rng, int width, int height) {
  using S = typename Img::value_type;
  Img img(width, height);
  for (int y = 0; y < height; ++y)
    for (auto& v : img.row(y)) {
      if constexpr (std::is_floating_point_v<S>) {
        v = std::uniform_real_distribution<S>(0, 1)(rng);
      } else {
        v = static_cast<S>(std::uniform_int_distribution<int>(0, std::numeric_limits<S>::max())(rng));
      }
    }
  return img;
}

inline int uniform_int(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace sattrack::testing
