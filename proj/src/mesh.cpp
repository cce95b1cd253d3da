#include "sattrack/mesh.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "sattrack/errors.hpp"

namespace sattrack {

double TriangleMesh::triangle_area(std::size_t i) const {
  const auto& t = triangles[i];
  const Eigen::Vector3d& a = vertices[t[0]];
  return 0.5 * (vertices[t[1]] - a).cross(vertices[t[2]] - a).norm();
}

void TriangleMesh::validate() const {
  const auto n = static_cast<int>(vertices.size());
  for (const auto& v : vertices)
    if (!v.allFinite()) throw ArgumentError("mesh has a non-finite vertex");
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    for (int idx : triangles[i])
      if (idx < 0 || idx >= n)
        throw ArgumentError("triangle " + std::to_string(i) + " references vertex " + std::to_string(idx) +
                            " of " + std::to_string(n));
    if (!(triangle_area(i) > 1e-12)) throw ArgumentError("triangle " + std::to_string(i) + " is degenerate");
  }
}

namespace {

int parse_index(const std::string& token, std::size_t line) {
  const std::string head = token.substr(0, token.find('/'));
  try {
    std::size_t used = 0;
    const int idx = std::stoi(head, &used);
    if (used != head.size() || idx < 1) throw std::invalid_argument(head);
    return idx - 1;
  } catch (const std::exception&) {
    throw ParseError("invalid face index '" + token + "' on line " + std::to_string(line), line);
  }
}

}  // namespace

TriangleMesh parse_obj(std::string_view text) {
  TriangleMesh mesh;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Eigen::Vector3d v;
      if (!(ls >> v.x() >> v.y() >> v.z()))
        throw ParseError("malformed vertex on line " + std::to_string(line_no), line_no);
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::string> tokens;
      for (std::string tok; ls >> tok;) tokens.push_back(tok);
      if (tokens.size() != 3)
        throw ParseError("face on line " + std::to_string(line_no) + " has " + std::to_string(tokens.size()) +
                             " vertices; only triangles are supported",
                         line_no);
      std::array<int, 3> tri{};
      for (int k = 0; k < 3; ++k) tri[k] = parse_index(tokens[k], line_no);
      for (int idx : tri)
        if (idx >= static_cast<int>(mesh.vertices.size()))
          throw ParseError("face on line " + std::to_string(line_no) + " references an undefined vertex", line_no);
      mesh.triangles.push_back(tri);
    }
  }
  mesh.validate();
  return mesh;
}

TriangleMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mesh " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_obj(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string format_obj(const TriangleMesh& mesh) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const auto& v : mesh.vertices) os << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  return os.str();
}

void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write mesh " + path.string());
  out << format_obj(mesh);
}

void append_box(TriangleMesh& mesh, const Eigen::Vector3d& center, const Eigen::Vector3d& size) {
  const int base = static_cast<int>(mesh.vertices.size());
  const Eigen::Vector3d h = 0.5 * size;
  for (int i = 0; i < 8; ++i)
    mesh.vertices.emplace_back(center.x() + ((i & 1) ? h.x() : -h.x()), center.y() + ((i & 2) ? h.y() : -h.y()),
                               center.z() + ((i & 4) ? h.z() : -h.z()));
  // corner index bits: x = 1, y = 2, z = 4
  const int faces[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& f : faces) {
    mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
    mesh.triangles.push_back({base + f[0], base + f[2], base + f[3]});
  }
}

}  // namespace sattrack
