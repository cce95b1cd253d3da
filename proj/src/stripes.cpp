#include "sattrack/stripes.hpp"

#include <algorithm>
#include <string>

#include "sattrack/errors.hpp"

namespace sattrack {

std::vector<Stripe> decompose_stripes(int height, int n, int halo) {
  if (n < 1) throw ArgumentError("stripe count must be >= 1");
  if (height < n)
    throw ArgumentError("cannot split " + std::to_string(height) + " rows into " +
                        std::to_string(n) + " stripes");
  if (halo < 0) throw ArgumentError("halo must be >= 0");

  std::vector<Stripe> stripes;
  stripes.reserve(n);
  const int base = height / n;
  const int extra = height % n;
  int row = 0;
  for (int i = 0; i < n; ++i) {
    Stripe s;
    s.row_begin = row;
    s.row_end = row + base + (i < extra ? 1 : 0);
    s.halo_above = std::min(halo, s.row_begin);
    s.halo_below = std::min(halo, height - s.row_end);
    row = s.row_end;
    stripes.push_back(s);
  }
  return stripes;
}

void validate_stripes(const std::vector<Stripe>& stripes, int height) {
  if (stripes.empty()) throw ArgumentError("empty stripe list");
  int expected = 0;
  for (const auto& s : stripes) {
    if (s.row_begin != expected || s.row_end <= s.row_begin)
      throw ArgumentError("stripes must be ordered, non-empty and contiguous");
    if (s.halo_above < 0 || s.halo_below < 0 || s.read_begin() < 0 || s.read_end() > height)
      throw ArgumentError("stripe halo reaches outside the image");
    expected = s.row_end;
  }
  if (expected != height) throw ArgumentError("stripes do not cover the image");
}

void require_halo(const std::vector<Stripe>& stripes, int height, int required) {
  validate_stripes(stripes, height);
  for (const auto& s : stripes) {
    if (s.halo_above < std::min(required, s.row_begin) ||
        s.halo_below < std::min(required, height - s.row_end))
      throw ArgumentError("stripe [" + std::to_string(s.row_begin) + "," +
                          std::to_string(s.row_end) + ") has halo below the required " +
                          std::to_string(required) + " rows");
  }
}

}  // namespace sattrack
