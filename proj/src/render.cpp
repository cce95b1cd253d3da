#include "sattrack/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sattrack/stripes.hpp"

namespace sattrack {

std::vector<ProjectedVertex> transform_and_project(const TriangleMesh& mesh, const Pose& pose,
                                                   const CameraModel& cam) {
  std::vector<ProjectedVertex> out;
  out.reserve(mesh.vertices.size());
  const Eigen::Matrix3d R = pose.rotation();
  for (const auto& v : mesh.vertices) {
    ProjectedVertex pv;
    pv.camera = R * v + pose.location();
    pv.behind_near = pv.camera.z() <= kNearPlane;
    if (!pv.behind_near) pv.pixel = cam.project(pv.camera);
    out.push_back(pv);
  }
  return out;
}

namespace {

bool lex_less(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}
bool lex_less(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
}

double cross(const Eigen::Vector2d& d, const Eigen::Vector2d& e) { return d.x() * e.y() - d.y() * e.x(); }

// Evaluated from the lexicographically smaller endpoint so that the two
// triangles sharing an edge see exactly negated values.
double edge_function(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  if (lex_less(a, b)) return cross(b - a, p - a);
  return -cross(a - b, p - b);
}

struct ScreenTriangle {
  Eigen::Vector2d p[3];
  double inv_z[3], x_z[3], y_z[3];
  bool top_left[3];
  int id;
  int x0, x1, y0, y1;  // inclusive pixel bounds, already clipped to the image
};

Eigen::Vector3d clip_point(const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
  const Eigen::Vector3d& a = lex_less(p, q) ? p : q;
  const Eigen::Vector3d& b = lex_less(p, q) ? q : p;
  const double t = (kNearPlane - a.z()) / (b.z() - a.z());
  Eigen::Vector3d r = a + t * (b - a);
  r.z() = kNearPlane;
  return r;
}

void setup_triangle(const std::array<Eigen::Vector3d, 3>& c, int id, const CameraModel& cam,
                    std::vector<ScreenTriangle>& out) {
  ScreenTriangle t;
  t.id = id;
  for (int i = 0; i < 3; ++i) {
    t.p[i] = cam.project(c[i]);
    t.inv_z[i] = 1.0 / c[i].z();
    t.x_z[i] = c[i].x() / c[i].z();
    t.y_z[i] = c[i].y() / c[i].z();
  }
  const double area = edge_function(t.p[0], t.p[1], t.p[2]);
  if (!(std::abs(area) > 0.0) || !std::isfinite(area)) return;
  if (area < 0) {
    std::swap(t.p[1], t.p[2]);
    std::swap(t.inv_z[1], t.inv_z[2]);
    std::swap(t.x_z[1], t.x_z[2]);
    std::swap(t.y_z[1], t.y_z[2]);
  }
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d d = t.p[(i + 1) % 3] - t.p[i];
    t.top_left[i] = (d.y() == 0.0 && d.x() > 0.0) || d.y() < 0.0;
  }
  const double minx = std::min({t.p[0].x(), t.p[1].x(), t.p[2].x()});
  const double maxx = std::max({t.p[0].x(), t.p[1].x(), t.p[2].x()});
  const double miny = std::min({t.p[0].y(), t.p[1].y(), t.p[2].y()});
  const double maxy = std::max({t.p[0].y(), t.p[1].y(), t.p[2].y()});
  const double fx0 = std::max(0.0, std::ceil(minx)), fx1 = std::min(cam.width - 1.0, std::floor(maxx));
  const double fy0 = std::max(0.0, std::ceil(miny)), fy1 = std::min(cam.height - 1.0, std::floor(maxy));
  if (fx0 > fx1 || fy0 > fy1) return;
  t.x0 = static_cast<int>(fx0);
  t.x1 = static_cast<int>(fx1);
  t.y0 = static_cast<int>(fy0);
  t.y1 = static_cast<int>(fy1);
  out.push_back(t);
}

// Clips each triangle against the near plane and projects the resulting fan.
std::vector<ScreenTriangle> setup_triangles(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam) {
  const auto verts = transform_and_project(mesh, pose, cam);
  std::vector<ScreenTriangle> out;
  out.reserve(mesh.triangles.size());
  std::vector<Eigen::Vector3d> poly;
  for (std::size_t id = 0; id < mesh.triangles.size(); ++id) {
    const auto& tri = mesh.triangles[id];
    poly.clear();
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d& p = verts[tri[i]].camera;
      const Eigen::Vector3d& q = verts[tri[(i + 1) % 3]].camera;
      const bool p_in = p.z() >= kNearPlane, q_in = q.z() >= kNearPlane;
      if (p_in) poly.push_back(p);
      if (p_in != q_in) poly.push_back(clip_point(p, q));
    }
    for (std::size_t k = 1; k + 1 < poly.size(); ++k)
      setup_triangle({poly[0], poly[k], poly[k + 1]}, static_cast<int>(id), cam, out);
  }
  return out;
}

void rasterize(const ScreenTriangle& t, int row_begin, int row_end, std::vector<double>& zbuf,
               std::vector<std::int32_t>& ids, int width) {
  const int y0 = std::max(t.y0, row_begin), y1 = std::min(t.y1, row_end - 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = t.x0; x <= t.x1; ++x) {
      const Eigen::Vector2d p(x, y);
      double e[3];
      bool inside = true;
      for (int i = 0; i < 3 && inside; ++i) {
        e[i] = edge_function(t.p[i], t.p[(i + 1) % 3], p);
        inside = e[i] > 0.0 || (e[i] == 0.0 && t.top_left[i]);
      }
      if (!inside) continue;
      const double sum = e[0] + e[1] + e[2];
      // edge i is opposite vertex i + 2
      const double l0 = e[1] / sum, l1 = e[2] / sum, l2 = e[0] / sum;
      const double inv_z = l0 * t.inv_z[0] + l1 * t.inv_z[1] + l2 * t.inv_z[2];
      if (!(inv_z > 0.0)) continue;
      const double a = l0 * t.x_z[0] + l1 * t.x_z[1] + l2 * t.x_z[2];
      const double b = l0 * t.y_z[0] + l1 * t.y_z[1] + l2 * t.y_z[2];
      const double dist = std::sqrt(a * a + b * b + 1.0) / inv_z;
      const std::size_t idx = static_cast<std::size_t>(y - row_begin) * width + x;
      if (dist < zbuf[idx] || (dist == zbuf[idx] && t.id < ids[idx])) {
        zbuf[idx] = dist;
        ids[idx] = t.id;
      }
    }
  }
}

int stripe_count(const TaskSet& schedule, int height) {
  const auto n = schedule.n_tasks ? schedule.n_tasks : static_cast<std::size_t>(std::max(1, schedule.n_workers));
  return static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(height)));
}

std::vector<std::vector<int>> bin_triangles(const std::vector<ScreenTriangle>& tris,
                                            const std::vector<Stripe>& stripes) {
  std::vector<std::vector<int>> bins(stripes.size());
  for (std::size_t i = 0; i < tris.size(); ++i)
    for (std::size_t s = 0; s < stripes.size(); ++s)
      if (tris[i].y0 < stripes[s].row_end && tris[i].y1 >= stripes[s].row_begin)
        bins[s].push_back(static_cast<int>(i));
  return bins;
}

}  // namespace

RenderResult render_scene(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam,
                          const TaskSet& schedule, std::vector<TaskTrace>* trace) {
  cam.validate();
  constexpr float inf = std::numeric_limits<float>::infinity();
  RenderResult result{DepthMap(cam.width, cam.height, inf), TriangleIdMap(cam.width, cam.height, -1)};
  const auto tris = setup_triangles(mesh, pose, cam);
  const auto stripes = decompose_stripes(cam.height, stripe_count(schedule, cam.height), 0);
  const auto bins = bin_triangles(tris, stripes);

  TaskSet set = schedule;
  set.n_tasks = stripes.size();
  auto tr = run_tasks(set, [&](std::size_t s) {
    const Stripe& st = stripes[s];
    const auto n = static_cast<std::size_t>(st.rows()) * cam.width;
    std::vector<double> zbuf(n, std::numeric_limits<double>::infinity());
    std::vector<std::int32_t> ids(n, -1);
    for (int i : bins[s]) rasterize(tris[i], st.row_begin, st.row_end, zbuf, ids, cam.width);
    for (int y = st.row_begin; y < st.row_end; ++y) {
      auto drow = result.depth.row(y);
      auto irow = result.triangle.row(y);
      for (int x = 0; x < cam.width; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y - st.row_begin) * cam.width + x;
        drow[x] = static_cast<float>(zbuf[idx]);
        irow[x] = ids[idx];
      }
    }
  });
  if (trace) *trace = std::move(tr);
  return result;
}

DepthMap render_depth(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam) {
  return render_scene(mesh, pose, cam).depth;
}

DepthMap render_depth_scheduled(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam,
                                const TaskSet& schedule) {
  return render_scene(mesh, pose, cam, schedule).depth;
}

std::vector<double> stripe_costs(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam,
                                 int n_stripes) {
  cam.validate();
  const auto tris = setup_triangles(mesh, pose, cam);
  const auto stripes = decompose_stripes(cam.height, std::min(n_stripes, cam.height), 0);
  const auto bins = bin_triangles(tris, stripes);
  std::vector<double> costs(stripes.size());
  for (std::size_t s = 0; s < stripes.size(); ++s) {
    costs[s] = stripes[s].rows();
    for (int i : bins[s]) {
      const auto& t = tris[i];
      const int rows = std::min(t.y1, stripes[s].row_end - 1) - std::max(t.y0, stripes[s].row_begin) + 1;
      costs[s] += static_cast<double>(rows) * (t.x1 - t.x0 + 1);
    }
  }
  return costs;
}

}  // namespace sattrack
