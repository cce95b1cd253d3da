#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sattrack/errors.hpp"

namespace sattrack {

/// Blocking FIFO with a fixed capacity. `push` blocks while full, `pop`
/// blocks while empty and returns nullopt once closed and drained.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ArgumentError("queue capacity must be >= 1");
  }

  void push(T value) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    if (closed_) return;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T value = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return value;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
};

struct PipelineConfig {
  double reception_ms = 0.0;    ///< simulated per-frame reception time
  std::size_t queue_depth = 1;  ///< received frames buffered ahead of processing
};

struct FrameTiming {
  std::size_t frame = 0;
  double received_ms = 0.0;  ///< reception finished (relative to pipeline start)
  double started_ms = 0.0;   ///< processing started
  double done_ms = 0.0;      ///< processing finished
};

struct PipelineReport {
  std::vector<FrameTiming> frames;
  /// Steady-state statistics over completion-to-completion periods; the first
  /// frame's latency is excluded.
  double mean_period_ms = 0.0;
  double p50_period_ms = 0.0;
  double p95_period_ms = 0.0;
  double fps = 0.0;
  std::optional<std::string> error;  ///< set when the source or a stage failed
};

/// Fills in period statistics from `report.frames`.
void summarize_periods(PipelineReport& report);

/// CSV header `frames,mean_ms,p50,p95,fps` and one data row.
void write_bench_csv(std::ostream& os, const PipelineReport& report);

/// Two-role frame loop: a receiver acquires frame k+1 while the processor
/// works on frame k. The receiver spends at least `reception_ms` per frame
/// and blocks when the hand-off queue is full. The source returns nullopt at
/// end of stream; if it throws, frames already received are drained and the
/// report carries the error.
template <typename Frame>
PipelineReport run_frame_pipeline(const std::function<std::optional<Frame>()>& source,
                                  const std::function<void(Frame&)>& process,
                                  const PipelineConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  if (cfg.queue_depth < 1) throw ArgumentError("queue_depth must be >= 1");
  if (!(cfg.reception_ms >= 0.0)) throw ArgumentError("reception_ms must be >= 0");

  struct Item {
    Frame frame;
    std::size_t index;
    double received_ms;
  };

  const auto t0 = Clock::now();
  auto since_start = [t0] {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };
  const auto reception = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double, std::milli>(cfg.reception_ms));

  BoundedQueue<Item> queue(cfg.queue_depth);
  PipelineReport report;
  std::optional<std::string> receive_error;
  std::atomic<bool> stop{false};

  std::jthread receiver([&] {
    for (std::size_t k = 0; !stop.load(); ++k) {
      const auto begin = Clock::now();
      std::optional<Frame> frame;
      try {
        frame = source();
      } catch (const std::exception& e) {
        receive_error = std::string("source failed at frame ") + std::to_string(k) + ": " + e.what();
        break;
      }
      if (!frame) break;
      std::this_thread::sleep_until(begin + reception);
      queue.push(Item{std::move(*frame), k, since_start()});
    }
    queue.close();
  });

  while (auto item = queue.pop()) {
    FrameTiming timing;
    timing.frame = item->index;
    timing.received_ms = item->received_ms;
    timing.started_ms = since_start();
    try {
      process(item->frame);
    } catch (const std::exception& e) {
      report.error = "processing failed at frame " + std::to_string(item->index) + ": " + e.what();
      stop = true;
      queue.close();
      break;
    }
    timing.done_ms = since_start();
    report.frames.push_back(timing);
  }
  receiver.join();
  if (!report.error && receive_error) report.error = receive_error;
  summarize_periods(report);
  return report;
}

}  // namespace sattrack
