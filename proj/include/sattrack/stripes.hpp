#pragma once

#include <vector>

namespace sattrack {

/// A contiguous block of image rows `[row_begin, row_end)` plus read-only
/// context rows on either side. Halos are clamped at the image borders.
struct Stripe {
  int row_begin = 0;
  int row_end = 0;
  int halo_above = 0;
  int halo_below = 0;

  int rows() const noexcept { return row_end - row_begin; }
  int read_begin() const noexcept { return row_begin - halo_above; }
  int read_end() const noexcept { return row_end + halo_below; }

  friend bool operator==(const Stripe&, const Stripe&) = default;
};

/// Splits `height` rows into `n` stripes whose heights differ by at most one;
/// the first `height % n` stripes get the extra row.
std::vector<Stripe> decompose_stripes(int height, int n, int halo);

/// Throws ArgumentError unless `stripes` are disjoint, ordered and cover
/// `[0, height)`.
void validate_stripes(const std::vector<Stripe>& stripes, int height);

/// Throws ArgumentError if any stripe has less context than `required` rows
/// on a side that is not an image border.
void require_halo(const std::vector<Stripe>& stripes, int height, int required);

}  // namespace sattrack
