#include "sattrack/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sattrack/errors.hpp"
#include "sattrack/image_io.hpp"

namespace sattrack {

namespace fs = std::filesystem;

TriangleMesh satellite_mesh() {
  TriangleMesh m;
  append_box(m, {0, 0, 0}, {2.0, 2.0, 2.5});        // bus
  for (double side : {-1.0, 1.0}) {
    append_box(m, {side * 1.15, 0, 0}, {0.3, 0.12, 0.12});   // panel arm
    append_box(m, {side * 3.3, 0, 0}, {4.0, 0.05, 1.4});     // solar panel
  }
  append_box(m, {0, 0, 1.55}, {0.15, 0.15, 0.6});   // antenna mast
  append_box(m, {0, 0, 1.9}, {1.0, 1.0, 0.1});      // antenna plate
  append_box(m, {0.6, 1.3, 0.4}, {0.5, 0.6, 0.5});  // instrument, breaks the symmetry
  return m;
}

// ---------------------------------------------------------------- config

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value' on line " + std::to_string(n), n);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError("missing key on line " + std::to_string(n), n);
    if (cfg.entries.count(key)) throw ParseError("duplicate key '" + key + "' on line " + std::to_string(n), n);
    cfg.entries[key] = {trim(t.substr(eq + 1)), n};
  }
  return cfg;
}

Config Config::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

void InitSimulatorSpec::validate() const {
  if (!(location_sigma >= 0 && orientation_sigma_deg >= 0 && latency_ms >= 0))
    throw ArgumentError("initializer sigmas and latency must be non-negative");
}

void SequenceSpec::validate() const {
  camera.validate();
  init.validate();
  if (frames < 1) throw ArgumentError("a sequence needs at least one frame");
  if (!(noise_sigma >= 0)) throw ArgumentError("noise_sigma must be non-negative");
  if (!(rotation_axis.norm() > 0)) throw ArgumentError("rotation_axis must be non-zero");
  if (!(light.norm() > 0)) throw ArgumentError("light direction must be non-zero");
}

Pose SequenceSpec::pose_at(int k) const {
  return Pose(initial_pose.location() + k * translation_per_frame,
              axis_angle_degrees(rotation_axis, k * rotation_deg_per_frame) * initial_pose.orientation());
}

namespace {

std::vector<double> parse_numbers(const std::string& key, const Config::Entry& e, std::size_t count) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const std::string t = trim(item);
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw ParseError("'" + key + "' has a non-numeric value on line " + std::to_string(e.line), e.line);
    }
  }
  if (out.size() != count)
    throw ParseError("'" + key + "' needs " + std::to_string(count) + " values on line " + std::to_string(e.line),
                     e.line);
  return out;
}

Eigen::Vector3d parse_vec3(const std::string& key, const Config::Entry& e) {
  const auto v = parse_numbers(key, e, 3);
  return {v[0], v[1], v[2]};
}

std::string join(const Eigen::Vector3d& v) {
  std::ostringstream os;
  os << std::setprecision(17) << v.x() << ',' << v.y() << ',' << v.z();
  return os.str();
}

}  // namespace

SequenceSpec parse_sequence_spec(const std::string& text, const fs::path& base) {
  const Config cfg = Config::parse(text);
  SequenceSpec s;
  for (const auto& [key, e] : cfg.entries) {
    auto number = [&] { return parse_numbers(key, e, 1)[0]; };
    if (key == "mesh") {
      s.mesh = (e.value.empty() || e.value == "builtin") ? fs::path{} : base / e.value;
    } else if (key == "camera") {
      const auto v = parse_numbers(key, e, 4);
      s.camera.fx = v[0], s.camera.fy = v[1], s.camera.cx = v[2], s.camera.cy = v[3];
    } else if (key == "size") {
      int w = 0, h = 0;
      char x = 0, extra = 0;
      if (std::sscanf(e.value.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || x != 'x')
        throw ParseError("'size' must look like 512x512 on line " + std::to_string(e.line), e.line);
      s.camera.width = w, s.camera.height = h;
    } else if (key == "initial_pose") {
      const auto v = parse_numbers(key, e, 7);
      s.initial_pose = Pose({v[0], v[1], v[2]}, Eigen::Quaterniond(v[3], v[4], v[5], v[6]));
    } else if (key == "rotation_axis") {
      s.rotation_axis = parse_vec3(key, e);
    } else if (key == "rotation_deg_per_frame") {
      s.rotation_deg_per_frame = number();
    } else if (key == "translation_per_frame") {
      s.translation_per_frame = parse_vec3(key, e);
    } else if (key == "frames") {
      s.frames = static_cast<int>(number());
    } else if (key == "noise_sigma") {
      s.noise_sigma = number();
    } else if (key == "seed") {
      s.seed = static_cast<std::uint64_t>(number());
    } else if (key == "light") {
      s.light = parse_vec3(key, e);
    } else if (key == "ambient") {
      s.ambient = number();
    } else if (key == "diffuse") {
      s.diffuse = number();
    } else if (key == "init_location_sigma") {
      s.init.location_sigma = number();
    } else if (key == "init_orientation_sigma_deg") {
      s.init.orientation_sigma_deg = number();
    } else if (key == "init_latency_ms") {
      s.init.latency_ms = number();
    } else {
      throw ParseError("unknown key '" + key + "' on line " + std::to_string(e.line), e.line);
    }
  }
  try {
    s.validate();
  } catch (const ArgumentError& err) {
    throw ParseError(std::string("invalid sequence: ") + err.what(), 0);
  }
  return s;
}

SequenceSpec load_sequence_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sequence config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_sequence_spec(ss.str(), path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string format_sequence_spec(const SequenceSpec& s) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "mesh = " << (s.mesh.empty() ? std::string("builtin") : s.mesh.string()) << '\n'
     << "camera = " << s.camera.fx << ',' << s.camera.fy << ',' << s.camera.cx << ',' << s.camera.cy << '\n'
     << "size = " << s.camera.width << 'x' << s.camera.height << '\n'
     << "initial_pose = " << format_pose(s.initial_pose) << '\n'
     << "rotation_axis = " << join(s.rotation_axis) << '\n'
     << "rotation_deg_per_frame = " << s.rotation_deg_per_frame << '\n'
     << "translation_per_frame = " << join(s.translation_per_frame) << '\n'
     << "frames = " << s.frames << '\n'
     << "noise_sigma = " << s.noise_sigma << '\n'
     << "seed = " << s.seed << '\n'
     << "light = " << join(s.light) << '\n'
     << "ambient = " << s.ambient << '\n'
     << "diffuse = " << s.diffuse << '\n'
     << "init_location_sigma = " << s.init.location_sigma << '\n'
     << "init_orientation_sigma_deg = " << s.init.orientation_sigma_deg << '\n'
     << "init_latency_ms = " << s.init.latency_ms << '\n';
  return os.str();
}

// ---------------------------------------------------------------- sequences

GrayImage8 render_frame(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam, const SequenceSpec& style,
                        std::mt19937_64& rng) {
  const RenderResult r = render_scene(mesh, pose, cam);
  const Eigen::Vector3d light = style.light.normalized();
  const Eigen::Matrix3d R = pose.rotation();
  std::vector<double> shade(mesh.triangles.size());
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const Eigen::Vector3d a = pose.apply(mesh.vertices[t[0]]);
    Eigen::Vector3d n = R * (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
    n.normalize();
    if (n.dot(a) > 0) n = -n;  // two-sided: use the face pointing at the camera
    shade[i] = style.ambient + style.diffuse * std::max(0.0, n.dot(light));
  }
  std::normal_distribution<double> noise(0.0, style.noise_sigma > 0 ? style.noise_sigma : 1.0);
  GrayImage8 out(cam.width, cam.height);
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const int id = r.triangle(x, y);
      double v = id >= 0 ? shade[id] : 0.0;
      if (style.noise_sigma > 0) v += noise(rng);
      out(x, y) = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
    }
  return out;
}

void check_frustum(const SequenceSpec& spec, const TriangleMesh& mesh) {
  for (int k = 0; k < spec.frames; ++k)
    for (const auto& pv : transform_and_project(mesh, spec.pose_at(k), spec.camera))
      if (pv.behind_near || !spec.camera.contains(pv.pixel.x(), pv.pixel.y()))
        throw DataError("frame " + std::to_string(k) + ": object leaves the camera frustum");
}

namespace {

fs::path frame_path(const fs::path& dir, int k) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%04d.pgm", k);
  return dir / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

}  // namespace

void write_ground_truth(std::ostream& os, const std::vector<Pose>& poses) {
  os << "frame,tx,ty,tz,qw,qx,qy,qz\n";
  for (std::size_t k = 0; k < poses.size(); ++k) os << k << ',' << format_pose(poses[k]) << '\n';
}

void generate_sequence(const SequenceSpec& spec, const fs::path& out_dir) {
  spec.validate();
  const TriangleMesh mesh = spec.mesh.empty() ? satellite_mesh() : load_obj(spec.mesh);
  check_frustum(spec, mesh);
  fs::create_directories(out_dir);
  std::mt19937_64 rng(spec.seed);
  std::vector<Pose> truth;
  for (int k = 0; k < spec.frames; ++k) {
    truth.push_back(spec.pose_at(k));
    write_image(render_frame(mesh, truth.back(), spec.camera, spec, rng), frame_path(out_dir, k));
  }
  auto gt = open_out(out_dir / "ground_truth.csv");
  write_ground_truth(gt, truth);
  write_obj(mesh, out_dir / "mesh.obj");
  SequenceSpec copy = spec;
  copy.mesh = "mesh.obj";
  open_out(out_dir / "sequence.cfg") << format_sequence_spec(copy);
}

std::vector<Pose> read_ground_truth(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw DataError("missing ground truth " + csv.string());
  std::string line;
  std::getline(in, line);
  if (trim(line) != "frame,tx,ty,tz,qw,qx,qy,qz") throw ParseError(csv.string() + ": unexpected header", 1);
  std::vector<Pose> poses;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos || std::stoul(line.substr(0, comma)) != poses.size())
        throw ArgumentError("frame numbers must count up from 0");
      poses.push_back(parse_pose(line.substr(comma + 1)));
    } catch (const std::exception& e) {
      throw ParseError(csv.string() + ": line " + std::to_string(n) + ": " + e.what(), n);
    }
  }
  return poses;
}

// ---------------------------------------------------------------- tracking

Pose simulate_init(const Pose& truth, const InitSimulatorSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::Vector3d t = truth.location();
  Eigen::Quaterniond q = truth.orientation();
  const Eigen::Vector3d dt(g(rng), g(rng), g(rng));
  Eigen::Vector3d axis(g(rng), g(rng), g(rng));
  const double angle = g(rng);
  if (spec.location_sigma > 0) t += spec.location_sigma * dt;
  if (spec.orientation_sigma_deg > 0 && axis.norm() > 0)
    q = axis_angle_degrees(axis, spec.orientation_sigma_deg * angle) * q;
  return Pose(t, q);
}

TrackingRun run_tracking(const fs::path& dir, const TriangleMesh& mesh, const RunOptions& options) {
  const SequenceSpec spec = load_sequence_spec(dir / "sequence.cfg");
  const auto truth = read_ground_truth(dir / "ground_truth.csv");
  if (truth.empty()) throw DataError("ground truth " + (dir / "ground_truth.csv").string() + " has no frames");

  TrackParams params = options.track;
  params.min_correspondences = options.policy.min_correspondences;
  auto initializer = options.initializer;
  if (!initializer)
    initializer = [&](int k, const Pose& t) {
      // one independent stream per frame keeps re-initialisations reproducible
      return simulate_init(t, options.init, options.seed * 1000003ULL + static_cast<std::uint64_t>(k));
    };

  TrackingRun run;
  Pose prev;
  bool need_init = true;
  int low_streak = 0;
  for (int k = 0; k < static_cast<int>(truth.size()); ++k) {
    const fs::path fp = frame_path(dir, k);
    if (!fs::exists(fp)) throw DataError("missing frame " + fp.string());
    const GrayImageF image = to_float(read_image(fp));

    FrameRecord rec;
    rec.frame = k;
    Pose start = prev;
    if (need_init) {
      start = initializer(k, truth[k]);
      rec.reinit = k > 0;
      run.summary.reinits += rec.reinit;
      run.summary.simulated_init_ms += options.init.latency_ms;
    }
    const TrackReport rep = track_frame(start, image, mesh, spec.camera, params);
    const bool low = !rep.lost && rep.inlier_fraction < options.policy.min_inlier_fraction;
    low_streak = low ? low_streak + 1 : 0;
    rec.lost = rep.lost || low_streak >= options.policy.low_inlier_frames;
    rec.estimate = rep.lost ? start : rep.pose;
    rec.correspondences = rep.correspondences;
    rec.inlier_fraction = rep.inlier_fraction;
    rec.iterations = rep.iterations;
    if (options.record_timings) rec.timings = rep.timings;
    rec.loce = location_error(rec.estimate, truth[k]);
    rec.orie = orientation_error_deg(rec.estimate, truth[k]);

    need_init = rec.lost;
    if (rec.lost) low_streak = 0;
    prev = rec.estimate;
    run.records.push_back(rec);
  }

  auto& s = run.summary;
  s.frames = static_cast<int>(run.records.size());
  for (const auto& r : run.records) {
    s.mean_loce += r.loce;
    s.mean_orie += r.orie;
    s.max_loce = std::max(s.max_loce, r.loce);
    s.lost_frames += r.lost;
  }
  s.mean_loce /= s.frames;
  s.mean_orie /= s.frames;
  return run;
}

void write_track_report(std::ostream& os, const std::vector<FrameRecord>& records) {
  os << "frame,loce,orie,n_corr,inliers,iters,edge_ms,render_ms,depth_edge_ms,match_ms,refine_ms,total_ms,lost,reinit\n";
  os << std::fixed;
  for (const auto& r : records) {
    const auto& t = r.timings;
    os << r.frame << ',' << std::setprecision(6) << r.loce << ',' << r.orie << ',' << r.correspondences << ','
       << std::setprecision(4) << r.inlier_fraction << ',' << r.iterations << ',' << std::setprecision(3) << t.edge_ms
       << ',' << t.render_ms << ',' << t.depth_edge_ms << ',' << t.match_ms << ',' << t.refine_ms << ','
       << t.total_ms() << ',' << r.lost << ',' << r.reinit << '\n';
  }
}

void write_summary(std::ostream& os, const TrackingSummary& s) {
  os << std::fixed << std::setprecision(6) << "frames = " << s.frames << '\n'
     << "mean_loce_m = " << s.mean_loce << '\n'
     << "max_loce_m = " << s.max_loce << '\n'
     << "mean_orie_deg = " << s.mean_orie << '\n'
     << "lost_frames = " << s.lost_frames << '\n'
     << "reinits = " << s.reinits << '\n'
     << "simulated_init_ms = " << std::setprecision(1) << s.simulated_init_ms << '\n';
}

}  // namespace sattrack
