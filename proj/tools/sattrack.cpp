// sattrack command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include "CLI11.hpp"
#include "sattrack/edge.hpp"
#include "sattrack/errors.hpp"
#include "sattrack/harness.hpp"
#include "sattrack/image_io.hpp"
#include "sattrack/pipeline.hpp"
#include "sattrack/resample.hpp"
#include "sattrack/track.hpp"

using namespace sattrack;
namespace fs = std::filesystem;

namespace {

struct ScheduleOpts {
  int stripes = 16;
  int workers = default_worker_count();
  std::string mode = "dynamic";

  void add(CLI::App* app, const std::string& default_mode) {
    mode = default_mode;
    app->add_option("--stripes", stripes, "stripe count")->check(CLI::PositiveNumber);
    app->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--sched", mode, "static or dynamic")->check(CLI::IsMember({"static", "dynamic"}));
  }
  TaskSet tasks() const { return {static_cast<std::size_t>(stripes), parse_schedule_mode(mode), workers}; }
};

struct BenchOpts {
  int repeat = 10;
  std::string trace, out;

  void add(CLI::App* app) {
    app->add_option("--repeat", repeat, "timed repetitions")->check(CLI::PositiveNumber);
    app->add_option("--trace", trace, "per-task trace CSV of the last repetition");
    app->add_option("--out", out, "bench report CSV (default stdout)");
  }
};

CameraModel parse_camera(const std::string& intrinsics, const std::string& size) {
  CameraModel cam;
  char c1 = 0, c2 = 0, c3 = 0, extra = 0;
  if (std::sscanf(intrinsics.c_str(), "%lf%c%lf%c%lf%c%lf%c", &cam.fx, &c1, &cam.fy, &c2, &cam.cx, &c3, &cam.cy,
                  &extra) != 7 || c1 != ',' || c2 != ',' || c3 != ',')
    throw ArgumentError("--cam expects fx,fy,cx,cy");
  char x = 0;
  if (std::sscanf(size.c_str(), "%d%c%d%c", &cam.width, &x, &cam.height, &extra) != 3 || x != 'x')
    throw ArgumentError("--size expects WxH");
  cam.validate();
  return cam;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

void emit_bench(const BenchOpts& opts, const std::vector<double>& durations_ms, const std::vector<TaskTrace>& trace) {
  PipelineReport report;
  double t = 0;
  for (std::size_t i = 0; i < durations_ms.size(); ++i) {
    report.frames.push_back({i, t, t, t + durations_ms[i]});
    t += durations_ms[i];
  }
  summarize_periods(report);
  if (opts.out.empty()) {
    write_bench_csv(std::cout, report);
  } else {
    auto os = open_out(opts.out);
    write_bench_csv(os, report);
  }
  if (!opts.trace.empty()) {
    auto os = open_out(opts.trace);
    write_trace_csv(os, trace);
  }
}

template <typename F>
void run_bench(const BenchOpts& opts, F&& body) {
  std::vector<double> durations;
  std::vector<TaskTrace> trace;
  for (int i = 0; i < opts.repeat; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    body(trace);
    durations.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  emit_bench(opts, durations, trace);
}

fs::path default_orientation_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".orientation.pfm");
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based satellite pose tracking: resampling, edges, depth rendering, tracking"};
  app.require_subcommand(1);

  // resample
  std::string rs_in, rs_out, rs_algo = "lanczos";
  double rs_scale = 0.5;
  ScheduleOpts rs_sched;
  auto* rs = app.add_subcommand("resample", "downscale an image");
  rs->add_option("in", rs_in)->required();
  rs->add_option("out", rs_out)->required();
  rs->add_option("--algo", rs_algo)->check(CLI::IsMember({"bilinear", "bicubic", "lanczos"}));
  rs->add_option("--scale", rs_scale);
  rs_sched.add(rs, "static");

  // canny
  std::string cn_in, cn_out, cn_orient;
  CannyParams cn_params;
  std::optional<float> cn_low, cn_high;
  ScheduleOpts cn_sched;
  auto* cn = app.add_subcommand("canny", "detect edges; writes a 255/0 PGM plus an orientation PFM");
  cn->add_option("in", cn_in)->required();
  cn->add_option("out", cn_out)->required();
  cn->add_option("--sigma", cn_params.sigma);
  cn->add_option("--low", cn_low);
  cn->add_option("--high", cn_high);
  cn->add_option("--orientation", cn_orient, "orientation PFM (default <out>.orientation.pfm)");
  cn_sched.add(cn, "static");

  // render
  std::string rd_mesh, rd_pose, rd_out, rd_cam = "500,500,256,256", rd_size = "512x512";
  ScheduleOpts rd_sched;
  auto* rd = app.add_subcommand("render", "render a depth map (PFM, meters, +inf background)");
  rd->add_option("mesh", rd_mesh)->required();
  rd->add_option("pose", rd_pose, "tx,ty,tz,qw,qx,qy,qz")->required();
  rd->add_option("out", rd_out)->required();
  rd->add_option("--cam", rd_cam, "fx,fy,cx,cy");
  rd->add_option("--size", rd_size, "WxH");
  rd_sched.add(rd, "dynamic");

  // gen-seq / gen-mesh
  std::string gs_spec, gs_dir, gm_out;
  auto* gs = app.add_subcommand("gen-seq", "generate a synthetic sequence from a key = value spec");
  gs->add_option("spec", gs_spec)->required();
  gs->add_option("dir", gs_dir)->required();
  auto* gm = app.add_subcommand("gen-mesh", "write the built-in satellite mesh as OBJ");
  gm->add_option("out", gm_out)->required();

  // track
  std::string tr_dir, tr_mesh, tr_report, tr_summary, tr_loss = "huber";
  std::optional<std::uint64_t> tr_seed;
  std::optional<double> tr_init_loc, tr_init_ori;
  int tr_workers = 1, tr_outer = 3, tr_radius = 8;
  std::string tr_sched_mode = "dynamic";
  bool tr_timings = false;
  auto* tr = app.add_subcommand("track", "track a generated sequence and report per-frame errors");
  tr->add_option("dir", tr_dir)->required();
  tr->add_option("--mesh", tr_mesh, "OBJ model (default <dir>/mesh.obj)");
  tr->add_option("--report", tr_report, "per-frame CSV")->required();
  tr->add_option("--summary", tr_summary, "summary as key = value (default stdout)");
  tr->add_option("--workers", tr_workers)->check(CLI::PositiveNumber);
  tr->add_option("--sched", tr_sched_mode, "render scheduling")->check(CLI::IsMember({"static", "dynamic"}));
  tr->add_option("--seed", tr_seed, "initializer seed (default: the sequence seed)");
  tr->add_option("--init-loc-sigma", tr_init_loc, "initializer location sigma, m");
  tr->add_option("--init-ori-sigma", tr_init_ori, "initializer orientation sigma, deg");
  tr->add_option("--outer", tr_outer, "render-match-refine rounds per frame")->check(CLI::PositiveNumber);
  tr->add_option("--radius", tr_radius, "match search radius, px")->check(CLI::PositiveNumber);
  tr->add_option("--loss", tr_loss)->check(CLI::IsMember({"huber", "tukey"}));
  tr->add_flag("--timings", tr_timings, "fill the per-stage wall-clock columns (not reproducible)");

  // bench
  auto* bench = app.add_subcommand("bench", "time a stage; emits bench report and task trace CSVs");
  bench->require_subcommand(1);

  std::string br_in, br_algo = "lanczos";
  double br_scale = 0.5;
  ScheduleOpts br_sched;
  BenchOpts br_opts;
  auto* br = bench->add_subcommand("resample");
  br->add_option("in", br_in)->required();
  br->add_option("--algo", br_algo)->check(CLI::IsMember({"bilinear", "bicubic", "lanczos"}));
  br->add_option("--scale", br_scale);
  br_sched.add(br, "static");
  br_opts.add(br);

  std::string bc_in;
  double bc_sigma = 1.4;
  ScheduleOpts bc_sched;
  BenchOpts bc_opts;
  auto* bc = bench->add_subcommand("canny");
  bc->add_option("in", bc_in)->required();
  bc->add_option("--sigma", bc_sigma);
  bc_sched.add(bc, "static");
  bc_opts.add(bc);

  std::string bd_mesh, bd_pose, bd_cam = "600,600,256,256", bd_size = "512x512";
  ScheduleOpts bd_sched;
  BenchOpts bd_opts;
  auto* bd = bench->add_subcommand("render");
  bd->add_option("mesh", bd_mesh, "OBJ path or 'builtin'")->required();
  bd->add_option("pose", bd_pose, "tx,ty,tz,qw,qx,qy,qz")->required();
  bd->add_option("--cam", bd_cam, "fx,fy,cx,cy");
  bd->add_option("--size", bd_size, "WxH");
  bd_sched.add(bd, "dynamic");
  bd_opts.add(bd);

  int bp_frames = 20;
  double bp_reception = 63;
  std::vector<double> bp_processing{218, 341};
  std::uint64_t bp_seed = 1;
  std::size_t bp_depth = 1;
  std::string bp_sequence, bp_out;
  auto* bp = bench->add_subcommand("pipeline", "two-stage frame pipeline with simulated reception");
  bp->add_option("--frames", bp_frames)->check(CLI::PositiveNumber);
  bp->add_option("--reception-ms", bp_reception);
  bp->add_option("--processing-ms", bp_processing, "fixed delay, or lo,hi for uniform delays")
      ->delimiter(',')
      ->expected(1, 2);
  bp->add_option("--queue-depth", bp_depth)->check(CLI::PositiveNumber);
  bp->add_option("--seed", bp_seed);
  bp->add_option("--sequence", bp_sequence, "track this sequence instead of sleeping");
  bp->add_option("--out", bp_out, "bench report CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*rs) {
      const ResampleSpec spec{parse_resample_algorithm(rs_algo), rs_scale};
      spec.validate();
      const AnyImage img = read_image(rs_in);
      std::visit([&](const auto& im) { write_image(resample(im, spec, rs_sched.stripes, rs_sched.tasks()), rs_out); },
                 img);
    } else if (*cn) {
      if (cn_low.has_value() != cn_high.has_value()) throw ArgumentError("--low and --high go together");
      cn_params.low = cn_low;
      cn_params.high = cn_high;
      const GrayImageF img = to_float(read_image(cn_in));
      const int halo = blur_radius(cn_params.sigma) + 1;
      const auto edges = canny_striped(img, cn_params,
                                       decompose_stripes(img.height(), std::min(cn_sched.stripes, img.height()), halo),
                                       cn_sched.tasks());
      write_edge_map(edges, cn_out, cn_orient.empty() ? default_orientation_path(cn_out) : fs::path(cn_orient));
      std::cout << "edges = " << edges.count() << '\n';
    } else if (*rd) {
      const CameraModel cam = parse_camera(rd_cam, rd_size);
      const TriangleMesh mesh = rd_mesh == "builtin" ? satellite_mesh() : load_obj(rd_mesh);
      write_image(render_depth_scheduled(mesh, parse_pose(rd_pose), cam, rd_sched.tasks()), rd_out);
    } else if (*gs) {
      generate_sequence(load_sequence_spec(gs_spec), gs_dir);
    } else if (*gm) {
      write_obj(satellite_mesh(), gm_out);
    } else if (*tr) {
      const fs::path dir = tr_dir;
      const SequenceSpec spec = load_sequence_spec(dir / "sequence.cfg");
      const TriangleMesh mesh = load_obj(tr_mesh.empty() ? dir / "mesh.obj" : fs::path(tr_mesh));
      RunOptions opts;
      opts.init = spec.init;
      if (tr_init_loc) opts.init.location_sigma = *tr_init_loc;
      if (tr_init_ori) opts.init.orientation_sigma_deg = *tr_init_ori;
      opts.seed = tr_seed.value_or(spec.seed);
      opts.record_timings = tr_timings;
      opts.track.n_workers = tr_workers;
      opts.track.render_mode = parse_schedule_mode(tr_sched_mode);
      opts.track.outer_iterations = tr_outer;
      opts.track.match.radius = tr_radius;
      if (tr_loss == "tukey") opts.track.refine = RefineConfig::tukey();
      const TrackingRun run = run_tracking(dir, mesh, opts);
      {
        auto os = open_out(tr_report);
        write_track_report(os, run.records);
      }
      if (tr_summary.empty()) {
        write_summary(std::cout, run.summary);
      } else {
        auto os = open_out(tr_summary);
        write_summary(os, run.summary);
      }
    } else if (*br) {
      const ResampleSpec spec{parse_resample_algorithm(br_algo), br_scale};
      spec.validate();
      const AnyImage img = read_image(br_in);
      run_bench(br_opts, [&](std::vector<TaskTrace>& trace) {
        std::visit([&](const auto& im) { resample(im, spec, br_sched.stripes, br_sched.tasks(), &trace); }, img);
      });
    } else if (*bc) {
      CannyParams params;
      params.sigma = bc_sigma;
      const GrayImageF img = to_float(read_image(bc_in));
      const auto stripes =
          decompose_stripes(img.height(), std::min(bc_sched.stripes, img.height()), blur_radius(bc_sigma) + 1);
      run_bench(bc_opts, [&](std::vector<TaskTrace>& trace) { canny_striped(img, params, stripes, bc_sched.tasks(), &trace); });
    } else if (*bd) {
      const CameraModel cam = parse_camera(bd_cam, bd_size);
      const TriangleMesh mesh = bd_mesh == "builtin" ? satellite_mesh() : load_obj(bd_mesh);
      const Pose pose = parse_pose(bd_pose);
      run_bench(bd_opts, [&](std::vector<TaskTrace>& trace) { render_scene(mesh, pose, cam, bd_sched.tasks(), &trace); });
      const auto costs = stripe_costs(mesh, pose, cam, bd_sched.stripes);
      std::cerr << "simulated makespan: static " << simulate_schedule(costs, ScheduleMode::Static, bd_sched.workers)
                << ", dynamic " << simulate_schedule(costs, ScheduleMode::Dynamic, bd_sched.workers) << '\n';
    } else if (*bp) {
      const PipelineConfig cfg{bp_reception, bp_depth};
      PipelineReport report;
      if (bp_sequence.empty()) {
        std::mt19937_64 rng(bp_seed);
        const double lo = bp_processing.front(), hi = bp_processing.back();
        if (!(lo >= 0 && hi >= lo)) throw ArgumentError("--processing-ms expects 0 <= lo <= hi");
        int next = 0;
        report = run_frame_pipeline<double>(
            [&]() -> std::optional<double> {
              if (next++ >= bp_frames) return std::nullopt;
              return std::uniform_real_distribution<double>(lo, hi)(rng);
            },
            [](double& ms) { std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms)); }, cfg);
      } else {
        const fs::path dir = bp_sequence;
        const SequenceSpec spec = load_sequence_spec(dir / "sequence.cfg");
        const TriangleMesh mesh = load_obj(dir / "mesh.obj");
        const auto truth = read_ground_truth(dir / "ground_truth.csv");
        Pose pose = truth.front();
        int next = 0;
        const int n = std::min<int>(bp_frames, static_cast<int>(truth.size()));
        report = run_frame_pipeline<GrayImageF>(
            [&]() -> std::optional<GrayImageF> {
              if (next >= n) return std::nullopt;
              char name[32];
              std::snprintf(name, sizeof name, "frame_%04d.pgm", next++);
              return to_float(read_image(dir / name));
            },
            [&](GrayImageF& frame) {
              const auto rep = track_frame(pose, frame, mesh, spec.camera);
              if (!rep.lost) pose = rep.pose;
            },
            cfg);
      }
      if (bp_out.empty()) {
        write_bench_csv(std::cout, report);
      } else {
        auto os = open_out(bp_out);
        write_bench_csv(os, report);
      }
      if (report.error) {
        std::cerr << "error: " << *report.error << '\n';
        return 2;
      }
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const DegenerateGeometryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
