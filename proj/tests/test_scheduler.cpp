#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>
#include <vector>

#include "doctest.h"
#include "sattrack/pipeline.hpp"
#include "sattrack/scheduler.hpp"
#include "test_util.hpp"

using namespace sattrack;
using sattrack::testing::uniform_int;
using sattrack::testing::uniform_real;

namespace {

// Brute-force reference: replay greedy pull-on-finish with an explicit event
// loop instead of the running min-element used by simulate_schedule.
double event_driven_dynamic(const std::vector<double>& costs, int workers) {
  std::vector<double> finish(workers, 0.0);
  std::vector<bool> busy(workers, false);
  std::size_t next = 0;
  double now = 0.0, makespan = 0.0;
  while (next < costs.size()) {
    for (int w = 0; w < workers && next < costs.size(); ++w)
      if (!busy[w] || finish[w] <= now) {
        busy[w] = true;
        finish[w] = now + costs[next++];
        makespan = std::max(makespan, finish[w]);
      }
    double soonest = 1e300;
    for (int w = 0; w < workers; ++w) soonest = std::min(soonest, finish[w]);
    now = std::max(now, soonest);
  }
  return makespan;
}

}  // namespace

TEST_CASE("static blocks") {
  auto b = static_blocks(16, 4);
  REQUIRE(b.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(b[i].first == 4 * i);
    CHECK(b[i].second == 4 * i + 4);
  }
  auto r = static_blocks(10, 4);
  CHECK(r[0].second - r[0].first == 3);
  CHECK(r[1].second - r[1].first == 3);
  CHECK(r[2].second - r[2].first == 2);
  CHECK(r[3].second == 10);
}

TEST_CASE("run_tasks static assigns contiguous blocks") {
  auto trace = run_tasks({16, ScheduleMode::Static, 4}, [](std::size_t) {});
  REQUIRE(trace.size() == 16);
  for (std::size_t t = 0; t < 16; ++t) {
    CHECK(trace[t].task == t);
    CHECK(trace[t].worker == static_cast<int>(t / 4));
  }
}

TEST_CASE("run_tasks dynamic with one worker preserves task order") {
  std::vector<std::size_t> order;
  run_tasks({16, ScheduleMode::Dynamic, 1}, [&](std::size_t t) { order.push_back(t); });
  REQUIRE(order.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) CHECK(order[i] == i);
}

TEST_CASE("run_tasks executes every task exactly once") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 0, 200));
    const int workers = uniform_int(rng, 1, 16);
    const auto mode = trial % 2 ? ScheduleMode::Dynamic : ScheduleMode::Static;
    std::vector<std::atomic<int>> hits(n);
    run_tasks({n, mode, workers}, [&](std::size_t t) { hits[t].fetch_add(1); });
    for (auto& h : hits) REQUIRE(h.load() == 1);
  }
}

TEST_CASE("run_tasks reports the failing task") {
  for (auto mode : {ScheduleMode::Static, ScheduleMode::Dynamic}) {
    try {
      run_tasks({8, mode, 3}, [](std::size_t t) {
        if (t == 5) throw std::runtime_error("boom");
      });
      FAIL("expected TaskError");
    } catch (const TaskError& e) {
      CHECK(e.task_id() == 5);
      CHECK(std::string(e.what()).find("boom") != std::string::npos);
    }
  }
}

TEST_CASE("results identical across modes and worker counts") {
  std::vector<double> input(1000);
  for (std::size_t i = 0; i < input.size(); ++i) input[i] = std::sin(0.1 * static_cast<double>(i));
  auto run = [&](ScheduleMode mode, int workers) {
    std::vector<double> out(input.size());
    const std::size_t tasks = 37;
    run_tasks({tasks, mode, workers}, [&](std::size_t t) {
      for (std::size_t i = t; i < input.size(); i += tasks) out[i] = std::exp(input[i]) * 3.0;
    });
    return out;
  };
  const auto ref = run(ScheduleMode::Static, 1);
  for (auto mode : {ScheduleMode::Static, ScheduleMode::Dynamic})
    for (int w = 1; w <= 16; ++w) CHECK(run(mode, w) == ref);
}

TEST_CASE("simulate_schedule") {
  SUBCASE("equal costs give equal makespans") {
    std::vector<double> c(12, 2.0);
    CHECK(simulate_schedule(c, ScheduleMode::Static, 4) == simulate_schedule(c, ScheduleMode::Dynamic, 4));
  }
  SUBCASE("heavy first task") {
    std::vector<double> c{8, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    CHECK(simulate_schedule(c, ScheduleMode::Static, 2) == 12.0);
    CHECK(simulate_schedule(c, ScheduleMode::Dynamic, 2) == 9.0);
  }
  SUBCASE("nine light tasks and one heavy on two workers") {
    std::vector<double> c{1, 1, 1, 1, 1, 1, 1, 1, 1, 8};
    const double st = simulate_schedule(c, ScheduleMode::Static, 2);
    const double dy = simulate_schedule(c, ScheduleMode::Dynamic, 2);
    // heavy task last: both policies finish at 12
    CHECK(st == 12.0);
    CHECK(dy == 12.0);
    CHECK(dy <= st);
  }
  SUBCASE("more workers than tasks") {
    std::vector<double> c{3, 7, 2};
    CHECK(simulate_schedule(c, ScheduleMode::Static, 5) == 7.0);
    CHECK(simulate_schedule(c, ScheduleMode::Dynamic, 5) == 7.0);
  }
  SUBCASE("greedy order is not always better than blocks") {
    // list scheduling in task order can lose to the block partition
    std::vector<double> c{1, 1, 2};
    CHECK(simulate_schedule(c, ScheduleMode::Static, 2) == 2.0);
    CHECK(simulate_schedule(c, ScheduleMode::Dynamic, 2) == 3.0);
  }
  SUBCASE("matches event-driven replay") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<double> c(static_cast<std::size_t>(uniform_int(rng, 1, 40)));
      for (auto& v : c) v = uniform_real(rng, 0.5, 10.0);
      const int w = uniform_int(rng, 1, 8);
      REQUIRE(simulate_schedule(c, ScheduleMode::Dynamic, w) == doctest::Approx(event_driven_dynamic(c, w)));
    }
  }
  SUBCASE("list scheduling stays within Graham's bound of the block partition") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<double> c(static_cast<std::size_t>(uniform_int(rng, 1, 64)));
      double total = 0.0, biggest = 0.0;
      for (auto& v : c) {
        v = uniform_real(rng, 1.0, 10.0);
        total += v;
        biggest = std::max(biggest, v);
      }
      const int w = uniform_int(rng, 1, 16);
      const double dy = simulate_schedule(c, ScheduleMode::Dynamic, w);
      REQUIRE(dy <= total / w + biggest + 1e-9);
      REQUIRE(dy >= std::max(total / w, biggest) - 1e-9);
    }
  }
  SUBCASE("rejects non-positive costs") {
    std::vector<double> c{1, 0};
    CHECK_THROWS_AS(simulate_schedule(c, ScheduleMode::Static, 2), ArgumentError);
  }
}

TEST_CASE("trace csv") {
  std::ostringstream os;
  std::vector<TaskTrace> t{{0, 1, 5, 9}};
  write_trace_csv(os, t);
  CHECK(os.str() == "task,worker,start_us,end_us\n0,1,5,9\n");
}

TEST_CASE("bounded queue blocks the producer when full") {
  BoundedQueue<int> q(2);
  std::atomic<int> pushed{0};
  std::jthread producer([&] {
    for (int i = 0; i < 5; ++i) {
      q.push(i);
      ++pushed;
    }
    q.close();
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(30));
  CHECK(pushed.load() == 2);
  std::vector<int> got;
  while (auto v = q.pop()) got.push_back(*v);
  CHECK(got == std::vector<int>{0, 1, 2, 3, 4});
}

namespace {

PipelineReport simulated_pipeline(int frames, double reception_ms, double processing_ms) {
  int produced = 0;
  std::function<std::optional<int>()> source = [&]() -> std::optional<int> {
    if (produced == frames) return std::nullopt;
    return produced++;
  };
  std::function<void(int&)> process = [&](int&) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(processing_ms));
  };
  return run_frame_pipeline(source, process, {reception_ms, 1});
}

}  // namespace

TEST_CASE("frame pipeline overlaps reception with processing") {
  SUBCASE("processing bound") {
    auto r = simulated_pipeline(8, 10.0, 30.0);
    CHECK(r.frames.size() == 8);
    CHECK(r.mean_period_ms == doctest::Approx(30.0).epsilon(0.15));
    CHECK(!r.error);
  }
  SUBCASE("reception bound") {
    auto r = simulated_pipeline(8, 30.0, 5.0);
    CHECK(r.mean_period_ms == doctest::Approx(30.0).epsilon(0.15));
  }
  SUBCASE("zero reception equals sequential processing") {
    auto r = simulated_pipeline(6, 0.0, 20.0);
    CHECK(r.mean_period_ms == doctest::Approx(20.0).epsilon(0.15));
  }
  SUBCASE("period tracks the slower stage across delays") {
    for (auto [rec, proc] : std::vector<std::pair<double, double>>{{1, 5}, {5, 1}, {12, 40}, {60, 20}}) {
      auto r = simulated_pipeline(6, rec, proc);
      CHECK(r.mean_period_ms == doctest::Approx(std::max(rec, proc)).epsilon(0.15));
    }
  }
}

TEST_CASE("frame pipeline drains after a source failure") {
  int produced = 0;
  std::function<std::optional<int>()> source = [&]() -> std::optional<int> {
    if (produced == 3) throw std::runtime_error("camera unplugged");
    return produced++;
  };
  std::function<void(int&)> process = [](int&) {};
  auto r = run_frame_pipeline(source, process, {1.0, 2});
  CHECK(r.frames.size() == 3);
  REQUIRE(r.error.has_value());
  CHECK(r.error->find("camera unplugged") != std::string::npos);
}

TEST_CASE("bench csv") {
  PipelineReport r;
  r.frames.resize(3);
  r.mean_period_ms = 10;
  r.p50_period_ms = 9;
  r.p95_period_ms = 12;
  r.fps = 100;
  std::ostringstream os;
  write_bench_csv(os, r);
  CHECK(os.str() == "frames,mean_ms,p50,p95,fps\n3,10,9,12,100\n");
}
