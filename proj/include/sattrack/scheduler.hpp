#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sattrack {

enum class ScheduleMode {
  Static,   ///< contiguous task blocks precomputed per worker
  Dynamic,  ///< workers pull the next task from a shared cursor when idle
};

const char* to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(const std::string& text);

struct TaskSet {
  std::size_t n_tasks = 0;
  ScheduleMode mode = ScheduleMode::Static;
  int n_workers = 1;
};

struct TaskTrace {
  std::size_t task = 0;
  int worker = 0;
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;
};

/// A task function threw; `task_id()` names the first task that failed.
class TaskError : public std::runtime_error {
 public:
  TaskError(std::size_t task, const std::string& what)
      : std::runtime_error("task " + std::to_string(task) + " failed: " + what), task_(task) {}
  std::size_t task_id() const noexcept { return task_; }

 private:
  std::size_t task_;
};

/// Worker `i` of the static schedule owns tasks `[first, second)`; the first
/// `n_tasks % n_workers` workers get one extra task.
std::vector<std::pair<std::size_t, std::size_t>> static_blocks(std::size_t n_tasks, int n_workers);

/// Runs every task exactly once. Task functions may only write outputs owned
/// by their own task. Returns one trace entry per task, ordered by task id.
/// Throws TaskError after all workers have stopped if any task threw.
std::vector<TaskTrace> run_tasks(const TaskSet& set, const std::function<void(std::size_t)>& task_fn);

/// Makespan of `costs` under the given policy. Dynamic is greedy list
/// scheduling in task order (idle worker with the lowest index takes the next
/// task); static sums each worker's contiguous block.
double simulate_schedule(std::span<const double> costs, ScheduleMode mode, int n_workers);

/// 16 workers, clamped to the host's hardware concurrency.
int default_worker_count();

/// CSV: task,worker,start_us,end_us
void write_trace_csv(std::ostream& os, std::span<const TaskTrace> trace);

}  // namespace sattrack
