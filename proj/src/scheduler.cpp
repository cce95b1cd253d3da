#include "sattrack/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "sattrack/errors.hpp"

namespace sattrack {

const char* to_string(ScheduleMode mode) {
  return mode == ScheduleMode::Static ? "static" : "dynamic";
}

ScheduleMode parse_schedule_mode(const std::string& text) {
  if (text == "static") return ScheduleMode::Static;
  if (text == "dynamic") return ScheduleMode::Dynamic;
  throw ArgumentError("unknown schedule mode '" + text + "'");
}

std::vector<std::pair<std::size_t, std::size_t>> static_blocks(std::size_t n_tasks, int n_workers) {
  if (n_workers < 1) throw ArgumentError("worker count must be >= 1");
  const auto w = static_cast<std::size_t>(n_workers);
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  blocks.reserve(w);
  std::size_t first = 0;
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t size = n_tasks / w + (i < n_tasks % w ? 1 : 0);
    blocks.emplace_back(first, first + size);
    first += size;
  }
  return blocks;
}

std::vector<TaskTrace> run_tasks(const TaskSet& set, const std::function<void(std::size_t)>& task_fn) {
  if (set.n_workers < 1) throw ArgumentError("worker count must be >= 1");
  std::vector<TaskTrace> trace(set.n_tasks);
  if (set.n_tasks == 0) return trace;

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto micros = [t0] {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0).count();
  };

  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t failed_task = 0;
  std::string failure;

  auto execute = [&](std::size_t task, int worker) {
    TaskTrace& t = trace[task];
    t.task = task;
    t.worker = worker;
    t.start_us = micros();
    try {
      task_fn(task);
    } catch (const std::exception& e) {
      std::lock_guard lock(error_mutex);
      if (!failed.exchange(true)) {
        failed_task = task;
        failure = e.what();
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!failed.exchange(true)) {
        failed_task = task;
        failure = "unknown exception";
      }
    }
    t.end_us = micros();
  };

  const int workers =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(set.n_workers), set.n_tasks));

  if (set.mode == ScheduleMode::Static) {
    const auto blocks = static_blocks(set.n_tasks, workers);
    auto worker_fn = [&](int w) {
      for (std::size_t task = blocks[w].first; task < blocks[w].second; ++task) {
        if (failed.load(std::memory_order_relaxed)) return;
        execute(task, w);
      }
    };
    if (workers == 1) {
      worker_fn(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn, w);
    }
  } else {
    std::atomic<std::size_t> cursor{0};
    auto worker_fn = [&](int w) {
      for (;;) {
        if (failed.load(std::memory_order_relaxed)) return;
        const std::size_t task = cursor.fetch_add(1, std::memory_order_relaxed);
        if (task >= set.n_tasks) return;
        execute(task, w);
      }
    };
    if (workers == 1) {
      worker_fn(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn, w);
    }
  }

  if (failed) throw TaskError(failed_task, failure);
  return trace;
}

double simulate_schedule(std::span<const double> costs, ScheduleMode mode, int n_workers) {
  if (n_workers < 1) throw ArgumentError("worker count must be >= 1");
  for (double c : costs)
    if (!(c > 0.0)) throw ArgumentError("task costs must be positive");

  if (mode == ScheduleMode::Static) {
    double makespan = 0.0;
    for (const auto& [first, last] : static_blocks(costs.size(), n_workers)) {
      double busy = 0.0;
      for (std::size_t i = first; i < last; ++i) busy += costs[i];
      makespan = std::max(makespan, busy);
    }
    return makespan;
  }

  std::vector<double> free_at(static_cast<std::size_t>(n_workers), 0.0);
  for (double c : costs) {
    auto next = std::min_element(free_at.begin(), free_at.end());
    *next += c;
  }
  return *std::max_element(free_at.begin(), free_at.end());
}

int default_worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 16u));
}

void write_trace_csv(std::ostream& os, std::span<const TaskTrace> trace) {
  os << "task,worker,start_us,end_us\n";
  for (const auto& t : trace) os << t.task << ',' << t.worker << ',' << t.start_us << ',' << t.end_us << '\n';
}

}  // namespace sattrack
