#include "sattrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace sattrack {

namespace {

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  return values[lo] + (values[hi] - values[lo]) * (rank - static_cast<double>(lo));
}

}  // namespace

void summarize_periods(PipelineReport& report) {
  const auto& frames = report.frames;
  std::vector<double> periods;
  for (std::size_t i = 1; i < frames.size(); ++i) periods.push_back(frames[i].done_ms - frames[i - 1].done_ms);
  if (periods.empty()) {
    // a single frame has no period; report its latency instead
    const double latency = frames.empty() ? 0.0 : frames.front().done_ms;
    report.mean_period_ms = report.p50_period_ms = report.p95_period_ms = latency;
  } else {
    double sum = 0.0;
    for (double p : periods) sum += p;
    report.mean_period_ms = sum / static_cast<double>(periods.size());
    report.p50_period_ms = percentile(periods, 0.5);
    report.p95_period_ms = percentile(periods, 0.95);
  }
  report.fps = report.mean_period_ms > 0.0 ? 1000.0 / report.mean_period_ms : 0.0;
}

void write_bench_csv(std::ostream& os, const PipelineReport& report) {
  os << "frames,mean_ms,p50,p95,fps\n";
  os << report.frames.size() << ',' << report.mean_period_ms << ',' << report.p50_period_ms << ','
     << report.p95_period_ms << ',' << report.fps << '\n';
}

}  // namespace sattrack
