#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sattrack {

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;  ///< model frame, meters
  std::vector<std::array<int, 3>> triangles;

  /// Throws ArgumentError on out-of-range indices or triangles whose area is
  /// at most 1e-12 m^2.
  void validate() const;
  bool empty() const noexcept { return triangles.empty(); }

  double triangle_area(std::size_t i) const;
};

/// Wavefront OBJ subset: `v x y z` and triangular `f a b c` lines with 1-based
/// indices (`a/t/n` forms accepted, texture and normal indices ignored).
/// Other record types are skipped. Errors carry the line number as offset.
TriangleMesh parse_obj(std::string_view text);
TriangleMesh load_obj(const std::filesystem::path& path);
std::string format_obj(const TriangleMesh& mesh);
void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Appends an axis-aligned box centred at `center` with edge lengths `size`,
/// 12 outward-wound triangles.
void append_box(TriangleMesh& mesh, const Eigen::Vector3d& center, const Eigen::Vector3d& size);

}  // namespace sattrack
