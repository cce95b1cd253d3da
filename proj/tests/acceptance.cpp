// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

#include "edge_oracle.hpp"
#include "refine_oracle.hpp"
#include "render_oracle.hpp"
#include "resample_oracle.hpp"
#include "sattrack/edge.hpp"
#include "sattrack/harness.hpp"
#include "sattrack/pipeline.hpp"
#include "sattrack/render.hpp"
#include "sattrack/resample.hpp"
#include "sattrack/scheduler.hpp"
#include "temp_dir.hpp"

using namespace sattrack;
using namespace sattrack::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr ResampleAlgorithm kAlgos[] = {ResampleAlgorithm::Bilinear, ResampleAlgorithm::Bicubic,
                                        ResampleAlgorithm::Lanczos};

// ---------------------------------------------------------------- 1
Verdict resampling_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 rng(101);
  const double scales[] = {0.25, 0.5, 0.75};
  double worst = 0;
  int mismatched_stripes = 0, cases = 0;
  for (int i = 0; i < 200; ++i) {
    const auto img = random_image<GrayImageF>(rng, uniform_int(rng, 16, 512), uniform_int(rng, 16, 512));
    const double scale = scales[i % 3];
    for (auto algo : kAlgos) {
      const ResampleSpec spec{algo, scale};
      const auto out = resample(img, spec);
      const auto ref = dense_oracle(img, algo, scale);
      for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) worst = std::max(worst, double(std::abs(out(x, y) - ref(x, y))));
      for (int n : {1, 2, 4, 8, 16}) {
        const auto mode = n % 4 == 0 ? ScheduleMode::Dynamic : ScheduleMode::Static;
        mismatched_stripes += !(resample(img, spec, n, {0, mode, 4}) == out);
      }
      ++cases;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && mismatched_stripes == 0 && secs < 120,
          fmt("%d image/algorithm cases, max |err| %.2e (<= 1e-5), %d striped mismatches, %.1f s (< 120 s)", cases,
              worst, mismatched_stripes, secs)};
}

// ---------------------------------------------------------------- 2
Verdict sliding_buffer_economy() {
  std::mt19937 rng(202);
  int violations = 0, checked = 0;
  for (int i = 0; i < 40; ++i) {
    const auto img = random_image<GrayImageF>(rng, uniform_int(rng, 16, 512), uniform_int(rng, 16, 512));
    for (auto algo : {ResampleAlgorithm::Bicubic, ResampleAlgorithm::Lanczos}) {
      const ResampleSpec spec{algo, 0.5};
      auto buf = make_row_buffer(spec, img.width(), 1);
      const int out_h = resampled_size(img.height(), 0.5);
      resample_striped(img, spec, Stripe{0, out_h, 0, out_h}, buf);
      const std::size_t budget = static_cast<std::size_t>(img.height() + spec.region());
      violations += buf.rows_loaded() > budget;
      ++checked;
    }
  }
  return {violations == 0, fmt("%d images x {bicubic, lanczos} at scale 0.5, %d over height + region", checked / 2,
                               violations)};
}

// ---------------------------------------------------------------- 3
Verdict canny_correctness() {
  const auto t0 = Clock::now();
  std::mt19937 rng(303);
  constexpr int n = 1000;
  int uniform_fail = 0, step_fail = 0, monotone_fail = 0, stripe_fail = 0;
  const CannyParams params;
  const int halo = blur_radius(params.sigma) + 1;
  for (int i = 0; i < n; ++i) {
    // uniform
    {
      GrayImageF img(uniform_int(rng, 8, 64), uniform_int(rng, 8, 64), uniform_real(rng, -100, 300));
      CannyParams p;
      p.low = static_cast<float>(uniform_real(rng, 0.01, 1));
      p.high = *p.low * 2;
      uniform_fail += canny(img).count() != 0 || canny(img, p).count() != 0;
    }
    // step: vertical or horizontal, random position and contrast
    {
      const int w = uniform_int(rng, 16, 64), h = uniform_int(rng, 16, 64);
      const bool vertical = i % 2 == 0;
      const int c = uniform_int(rng, 4, (vertical ? w : h) - 4);
      const float lo = static_cast<float>(uniform_real(rng, 0, 100)), hi = lo + static_cast<float>(uniform_real(rng, 20, 200));
      GrayImageF img(w, h, lo);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if ((vertical ? x : y) >= c) img(x, y) = hi;
      const auto e = canny(img);
      bool ok = e.count() > 0;
      for (int y = 0; y < h && ok; ++y)
        for (int x = 0; x < w && ok; ++x)
          if (e.is_edge(x, y)) ok = std::abs((vertical ? x : y) - c + 0.5) <= 1.0;
      step_fail += !ok;
    }
    // threshold monotonicity and stripe invariance
    {
      const auto img = blobby_image(rng, uniform_int(rng, 16, 64), uniform_int(rng, 24, 80));
      const auto g = sobel_gradients(gaussian_blur(img, params.sigma));
      float max_mag = 0;
      for (int y = 0; y < g.magnitude.height(); ++y)
        for (float m : g.magnitude.row(y)) max_mag = std::max(max_mag, m);
      if (max_mag > 0) {
        CannyParams base;
        base.low = 0.05f * max_mag;
        base.high = 0.3f * max_mag;
        const auto ref = canny(img, base);
        CannyParams up_low = base, up_high = base;
        up_low.low = static_cast<float>(uniform_real(rng, 0.05, 0.3)) * max_mag;
        up_high.high = static_cast<float>(uniform_real(rng, 0.3, 1.0)) * max_mag;
        monotone_fail += !subset(canny(img, up_low), ref) || !subset(canny(img, up_high), ref);
      }
      const auto whole = canny(img, params);
      const int stripes = 1 << uniform_int(rng, 0, 4);
      const auto mode = i % 2 ? ScheduleMode::Dynamic : ScheduleMode::Static;
      const auto striped = canny_striped(img, params, decompose_stripes(img.height(), stripes, halo), {0, mode, 4});
      stripe_fail += !(striped.edge == whole.edge);
    }
  }
  const double secs = seconds_since(t0);
  const int fails = uniform_fail + step_fail + monotone_fail + stripe_fail;
  return {fails == 0 && secs < 120,
          fmt("%d images per suite; failures: uniform %d, step localisation %d, threshold monotonicity %d, "
              "stripe invariance %d; %.1f s (< 120 s)",
              n, uniform_fail, step_fail, monotone_fail, stripe_fail, secs)};
}

// ---------------------------------------------------------------- 4
Verdict rasterizer_oracle() {
  const auto t0 = Clock::now();
  const CameraModel cam{120, 120, 64, 64, 128, 128};
  std::mt19937 rng(404);
  double worst = 0;
  int off_boundary = 0, disagreements = 0, common = 0;
  for (int i = 0; i < 50; ++i) {
    const auto mesh = random_mesh(rng, uniform_int(rng, 1, 50));
    const Pose pose({uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), uniform_real(rng, 12, 20)},
                    random_rotation(rng));
    const auto c = compare_to_raycast(mesh, pose, cam);
    worst = std::max(worst, c.max_rel);
    off_boundary += c.off_boundary;
    disagreements += c.disagreements;
    common += c.common;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && off_boundary == 0 && secs < 180,
          fmt("50 meshes, %d shared pixels, max rel err %.2e (< 1e-4), %d coverage disagreements, %d outside the "
              "1 px edge band; %.1f s (< 180 s)",
              common, worst, disagreements, off_boundary, secs)};
}

// ---------------------------------------------------------------- 5, 6
const CameraModel kCam{600, 600, 256, 256, 512, 512};

Pose random_pose(std::mt19937& rng) {
  return Pose({uniform_real(rng, -2, 2), uniform_real(rng, -2, 2), uniform_real(rng, 15, 40)}, random_rotation(rng));
}

Verdict jacobian_check() {
  std::mt19937 rng(505);
  const double h = 1e-6;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Pose pose = random_pose(rng);
    Correspondence corr;
    corr.model_px = {uniform_int(rng, 0, 511), uniform_int(rng, 0, 511)};
    corr.image_px = corr.model_px + Eigen::Vector2i(uniform_int(rng, -8, 8), uniform_int(rng, -8, 8));
    const double a = uniform_real(rng, 0, std::numbers::pi);
    corr.normal = {std::cos(a), std::sin(a)};
    corr.depth = pose.location().z() + uniform_real(rng, -3, 3);
    const auto c = *make_constraint(corr, pose, kCam);
    Vector6d offset;
    for (int k = 0; k < 6; ++k) offset[k] = uniform_real(rng, -1, 1) * (k < 3 ? 0.02 : 0.2);
    const Pose at = pose.updated(offset);
    const auto rj = residual_and_jacobian(c, at, kCam);
    for (int k = 0; k < 6; ++k) {
      Vector6d e = Vector6d::Zero();
      e[k] = h;
      const double fd =
          (residual_and_jacobian(c, at.updated(e), kCam).r - residual_and_jacobian(c, at.updated(-e), kCam).r) /
          (2 * h);
      worst = std::max(worst, std::abs(fd - rj.J[k]));
    }
  }
  return {worst < 1e-4, fmt("1000 random correspondences and poses, max |J - J_fd| %.2e (< 1e-4)", worst)};
}

Verdict refinement_recovery() {
  std::mt19937 rng(606);
  constexpr int trials = 20;
  double clean_deg = 0, clean_m = 0, noisy_deg = 0, noisy_m = 0;
  int max_iters = 0;
  for (int i = 0; i < trials; ++i) {
    const Pose truth = random_pose(rng);
    const auto cs = exact_constraints(rng, truth, kCam, 300);
    RefineReport rep;
    const Pose out = refine_pose(perturbed(rng, truth, 2.0, 0.2), cs, kCam, RefineConfig::huber(), &rep);
    clean_deg = std::max(clean_deg, orientation_error_deg(out, truth));
    clean_m = std::max(clean_m, location_error(out, truth));
    max_iters = std::max(max_iters, rep.iterations);
  }
  for (int i = 0; i < trials; ++i) {
    const Pose truth = random_pose(rng);
    auto cs = exact_constraints(rng, truth, kCam, 300);
    inject_outliers(rng, cs, kCam, 0.3);
    RefineConfig cfg = RefineConfig::tukey();
    cfg.max_iterations = 30;
    const Pose out = refine_pose(perturbed(rng, truth, 2.0, 0.2), cs, kCam, cfg);
    noisy_deg = std::max(noisy_deg, orientation_error_deg(out, truth));
    noisy_m = std::max(noisy_m, location_error(out, truth));
  }
  const bool pass = clean_deg < 0.05 && clean_m < 0.005 && max_iters <= 10 && noisy_deg < 0.2 && noisy_m < 0.02;
  return {pass, fmt("2 deg + 0.2 m, %d trials each: exact -> %.4f deg / %.2f mm in <= %d iterations "
                    "(0.05 deg / 5 mm / 10); 30%% outliers with Tukey -> %.4f deg / %.2f mm (0.2 deg / 20 mm)",
                    trials, clean_deg, clean_m * 1e3, max_iters, noisy_deg, noisy_m * 1e3)};
}

// ---------------------------------------------------------------- 7, 10
struct HardRun {
  TrackingSummary summary;
  std::string report;
  double seconds = 0;
};

HardRun track_hard(const std::filesystem::path& dir) {
  const auto t0 = Clock::now();
  const auto spec = load_sequence_spec(dir / "sequence.cfg");
  RunOptions opt;
  opt.init = spec.init;
  opt.seed = spec.seed;
  opt.track.n_workers = 4;
  const auto run = run_tracking(dir, load_obj(dir / "mesh.obj"), opt);
  std::ostringstream os;
  write_track_report(os, run.records);
  write_summary(os, run.summary);
  return {run.summary, os.str(), seconds_since(t0)};
}

Verdict hard_sequence(const HardRun& r) {
  const auto& s = r.summary;
  const double lost_frac = static_cast<double>(s.lost_frames) / s.frames;
  return {s.mean_loce < 0.5 && lost_frac <= 0.05 && r.seconds < 300,
          fmt("%d frames: mean LOCE %.3f m (< 0.5), max %.3f m, mean ORIE %.2f deg, lost %d (%.1f%% <= 5%%), "
              "re-inits %d; %.1f s (< 300 s)",
              s.frames, s.mean_loce, s.max_loce, s.mean_orie, s.lost_frames, 100 * lost_frac, s.reinits, r.seconds)};
}

Verdict determinism(const std::filesystem::path& dir, const HardRun& first) {
  int identical = 1;
  for (int i = 0; i < 2; ++i) identical += track_hard(dir).report == first.report;
  return {identical == 3, fmt("%d of 3 consecutive runs (seed and 4 workers fixed) byte-identical", identical)};
}

// ---------------------------------------------------------------- 8
Verdict scheduling_dominance() {
  std::mt19937 rng(808);
  int violations = 0;
  std::string example;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> costs(static_cast<std::size_t>(uniform_int(rng, 1, 32)));
    for (auto& c : costs) c = uniform_real(rng, 0.1, 10);
    const int workers = uniform_int(rng, 1, 16);
    const double st = simulate_schedule(costs, ScheduleMode::Static, workers);
    const double dy = simulate_schedule(costs, ScheduleMode::Dynamic, workers);
    if (dy > st + 1e-9 && violations++ == 0) example = fmt("%zu tasks on %d workers: dynamic %.3f > static %.3f",
                                                           costs.size(), workers, dy, st);
  }
  const std::vector<double> minimal{1, 1, 2};
  const double min_st = simulate_schedule(minimal, ScheduleMode::Static, 2);
  const double min_dy = simulate_schedule(minimal, ScheduleMode::Dynamic, 2);

  // soft part: wall clock on a bottom-heavy scene
  const CameraModel cam{600, 600, 256, 256, 512, 512};
  std::mt19937 mrng(1);
  TriangleMesh mesh;
  for (int i = 0; i < 400; ++i) {
    const double u = uniform_real(mrng, 0, 470), v = uniform_real(mrng, 400, 490);
    const int base = static_cast<int>(mesh.vertices.size());
    for (auto [du, dv] : {std::pair{0.0, 0.0}, {40.0, 8.0}, {10.0, 20.0}})
      mesh.vertices.push_back(10 * cam.ray(u + du, v + dv));
    mesh.triangles.push_back({base, base + 1, base + 2});
  }
  const int workers = 4;
  auto time_mode = [&](ScheduleMode mode) {
    std::vector<double> t;
    for (int rep = 0; rep < 7; ++rep) {
      const auto t0 = Clock::now();
      render_scene(mesh, Pose(), cam, {16, mode, workers});
      t.push_back(seconds_since(t0));
    }
    std::nth_element(t.begin(), t.begin() + 3, t.end());
    return t[3];
  };
  const double wall_st = time_mode(ScheduleMode::Static), wall_dy = time_mode(ScheduleMode::Dynamic);
  const unsigned cores = std::thread::hardware_concurrency();
  const std::string soft =
      fmt("wall clock on bottom-heavy scene, %d workers: static %.2f ms, dynamic %.2f ms (%s)", workers,
          wall_st * 1e3, wall_dy * 1e3,
          cores < 4 ? fmt("host has %u core(s): reported, not asserted", cores).c_str()
                    : (wall_dy <= wall_st ? "dynamic >= static throughput" : "dynamic slower"));
  const bool soft_ok = cores < 4 || wall_dy <= wall_st;
  return {violations == 0 && soft_ok,
          fmt("%d of 10000 random cost vectors have dynamic > static", violations) +
              (violations ? "; first: " + example + fmt("; minimal: {1,1,2} on 2 workers -> dynamic %.0f, static %.0f",
                                                          min_dy, min_st)
                          : std::string()) +
              "; " + soft};
}

// ---------------------------------------------------------------- 9
PipelineReport simulated_pipeline(int frames, double reception_ms, const std::vector<double>& processing_ms) {
  int next = 0;
  std::function<std::optional<int>()> source = [&]() -> std::optional<int> {
    if (next == frames) return std::nullopt;
    return next++;
  };
  std::function<void(int&)> process = [&](int& k) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(processing_ms[k]));
  };
  return run_frame_pipeline(source, process, {reception_ms, 1});
}

Verdict pipeline_model() {
  std::mt19937 rng(909);
  constexpr int frames = 16;
  std::vector<double> slow(frames);
  for (auto& p : slow) p = uniform_real(rng, 218, 341);
  // steady-state periods start at frame 1
  const double mean_proc = std::accumulate(slow.begin() + 1, slow.end(), 0.0) / (frames - 1);
  const auto a = simulated_pipeline(frames, 63, slow);
  const double expect_a = 1000 / mean_proc;
  const bool ok_a = std::abs(a.fps - expect_a) <= 0.15 * expect_a;

  const auto b = simulated_pipeline(frames, 63, std::vector<double>(frames, 40.0));
  const double expect_b = 1000 / 63.0;
  const bool ok_b = std::abs(b.fps - expect_b) <= 0.15 * expect_b;
  return {ok_a && ok_b,
          fmt("reception 63 ms, processing U[218, 341] ms: %.2f FPS vs 1/processing %.2f FPS (%+.1f%%); "
              "processing 40 ms: %.2f FPS vs 1/reception %.2f FPS (%+.1f%%); tolerance 15%%",
              a.fps, expect_a, 100 * (a.fps / expect_a - 1), b.fps, expect_b, 100 * (b.fps / expect_b - 1))};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s criterion %d: %s -- %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "resampling oracle equivalence", resampling_oracle);
  report(2, "sliding-buffer row economy", sliding_buffer_economy);
  report(3, "canny correctness", canny_correctness);
  report(4, "rasterizer vs ray-cast oracle", rasterizer_oracle);
  report(5, "jacobian vs finite differences", jacobian_check);
  report(6, "refinement recovery", refinement_recovery);

  TempDir dir("hard");
  HardRun hard;
  report(7, "hard synthetic sequence tracking", [&] {
    generate_sequence(load_sequence_spec(SATTRACK_DATA_DIR "/hard.cfg"), dir.path());
    hard = track_hard(dir.path());
    return hard_sequence(hard);
  });
  report(8, "scheduling dominance", scheduling_dominance);
  report(9, "frame pipeline throughput", pipeline_model);
  report(10, "tracking determinism", [&] {
    if (hard.report.empty()) return Verdict{false, "criterion 7 produced no report"};
    return determinism(dir.path(), hard);
  });

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
