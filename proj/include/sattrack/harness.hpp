#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sattrack/geometry.hpp"
#include "sattrack/image.hpp"
#include "sattrack/mesh.hpp"
#include "sattrack/track.hpp"

namespace sattrack {

/// Box-and-panels spacecraft, about 10.4 m across, centred at the origin.
TriangleMesh satellite_mesh();

/// Line-oriented `key = value` text with `#` comments. Duplicate keys and
/// lines without `=` are ParseErrors carrying the line number.
struct Config {
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  std::map<std::string, Entry> entries;

  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);
};

struct InitSimulatorSpec {
  double location_sigma = 1.15;        ///< meters per axis
  double orientation_sigma_deg = 14.57;
  double latency_ms = 373;
  void validate() const;
};

struct SequenceSpec {
  std::filesystem::path mesh;  ///< empty: built-in satellite
  CameraModel camera{600, 600, 256, 256, 512, 512};
  Pose initial_pose{{0, 0, 20}, Eigen::Quaterniond::Identity()};
  Eigen::Vector3d rotation_axis{0, 1, 0};
  double rotation_deg_per_frame = 1.0;
  Eigen::Vector3d translation_per_frame{0, 0, 0};
  int frames = 1;
  double noise_sigma = 0;
  std::uint64_t seed = 1;
  Eigen::Vector3d light{-0.4, -0.5, -0.75};  ///< camera frame, towards the light
  double ambient = 50, diffuse = 180;
  InitSimulatorSpec init;

  void validate() const;
  /// Ground-truth pose of frame k: rotation applied k times, then translation.
  Pose pose_at(int k) const;
};

/// Unknown keys are ParseErrors. Relative mesh paths resolve against `base`.
SequenceSpec parse_sequence_spec(const std::string& text, const std::filesystem::path& base = {});
SequenceSpec load_sequence_spec(const std::filesystem::path& path);
std::string format_sequence_spec(const SequenceSpec& spec);

/// Lambert-shaded render (two-sided, fixed light, background 0) plus
/// Gaussian noise drawn from `rng`, rounded and clamped to 8 bits.
GrayImage8 render_frame(const TriangleMesh& mesh, const Pose& pose, const CameraModel& cam, const SequenceSpec& style,
                        std::mt19937_64& rng);

/// Throws DataError naming the first frame whose mesh leaves the image or
/// crosses the near plane.
void check_frustum(const SequenceSpec& spec, const TriangleMesh& mesh);

/// Writes frame_NNNN.pgm, ground_truth.csv (frame,tx,ty,tz,qw,qx,qy,qz),
/// mesh.obj and a normalised sequence.cfg into `out_dir`.
void generate_sequence(const SequenceSpec& spec, const std::filesystem::path& out_dir);

std::vector<Pose> read_ground_truth(const std::filesystem::path& csv);
void write_ground_truth(std::ostream& os, const std::vector<Pose>& poses);

/// Location perturbed by isotropic Gaussian noise; orientation rotated by a
/// Gaussian angle about a uniformly random axis. Deterministic in `seed`.
Pose simulate_init(const Pose& truth, const InitSimulatorSpec& spec, std::uint64_t seed);

struct TrackingPolicy {
  std::size_t min_correspondences = 50;
  double min_inlier_fraction = 0.3;
  int low_inlier_frames = 2;  ///< consecutive frames below the fraction before re-init
};

struct RunOptions {
  TrackParams track;
  TrackingPolicy policy;
  InitSimulatorSpec init;
  std::uint64_t seed = 1;
  bool record_timings = false;  ///< wall-clock columns stay 0 otherwise, keeping reports reproducible
  /// Supplies the initial pose for frame k; defaults to `simulate_init`.
  std::function<Pose(int frame, const Pose& truth)> initializer;
};

struct FrameRecord {
  int frame = 0;
  double loce = 0, orie = 0;
  std::size_t correspondences = 0;
  double inlier_fraction = 0;
  int iterations = 0;
  StageTimings timings;
  bool lost = false;
  bool reinit = false;
  Pose estimate;
};

struct TrackingSummary {
  int frames = 0;
  double mean_loce = 0, max_loce = 0, mean_orie = 0;
  int lost_frames = 0;
  int reinits = 0;
  double simulated_init_ms = 0;
};

struct TrackingRun {
  std::vector<FrameRecord> records;
  TrackingSummary summary;
};

/// Tracks every frame in `sequence_dir` (reads sequence.cfg for the camera
/// and ground_truth.csv for metrics). Frame 0 and every re-initialisation
/// start from the initializer and are refined on the same frame.
TrackingRun run_tracking(const std::filesystem::path& sequence_dir, const TriangleMesh& mesh,
                         const RunOptions& options);

/// frame,loce,orie,n_corr,inliers,iters,edge_ms,render_ms,depth_edge_ms,match_ms,refine_ms,total_ms,lost,reinit
void write_track_report(std::ostream& os, const std::vector<FrameRecord>& records);
void write_summary(std::ostream& os, const TrackingSummary& summary);

}  // namespace sattrack
