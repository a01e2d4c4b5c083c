#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flexkv/engine.hpp"
#include "flexkv/workload.hpp"

namespace flexkv {

// Logical metrics are derived from the engine's virtual I/O clock so
// identical seeds reproduce identical rows regardless of wall clock.
struct MetricSample {
  std::uint64_t ops = 0;
  double throughput_ops_s = 0.0;  // ops per virtual second since last row
  double p999_us = 0.0;           // P99.9 per-op cost since last row
  int run_count = 0;
  std::uint64_t read_blocks = 0;  // cumulative
  double stall_us = 0.0;          // cumulative
  double space_amp = 0.0;
};

struct PhaseSummary {
  std::string mix;
  std::uint64_t ops = 0;
  double throughput_ops_s = 0.0;
};

struct BenchResult {
  std::string policy;
  std::vector<MetricSample> trace;
  std::vector<PhaseSummary> phases;
  double overall_throughput_ops_s = 0.0;
  double avg_latency_us = 0.0;
  double preload_virtual_us = 0.0;
  EngineMetrics final_metrics;
  std::vector<WindowLogEntry> window_log;
};

constexpr std::uint64_t kSampleInterval = 10'000;

// Preloads sequential keys, replays the workload stream, samples a trace
// row every kSampleInterval ops. When output_dir is nonempty, writes
// <policy>_trace.csv and <policy>_summary.txt there.
BenchResult run_benchmark(Env& env, EngineConfig config, const CompoundWorkload& workload,
                          std::uint64_t seed, const std::string& output_dir = "");

// Runs each config on the identical op stream. Emits a per-phase and
// overall throughput table to compare.txt when output_dir is set.
std::vector<BenchResult> compare_policies(Env& env, std::vector<EngineConfig> configs,
                                          const CompoundWorkload& workload,
                                          std::uint64_t seed,
                                          const std::string& output_dir = "");

std::string render_comparison(const std::vector<BenchResult>& results,
                              const CompoundWorkload& workload);

}  // namespace flexkv
