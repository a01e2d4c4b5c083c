#include "flexkv/cost_model.hpp"

#include <cmath>
#include <stdexcept>

namespace flexkv {

double point_cost(int run_count, const CostConstants& constants, const WorkloadMix& mix) {
  if (run_count < 0) throw std::invalid_argument("negative run count");
  return mix.point_lookups * (constants.bloom_alpha * run_count + 1.0) *
         constants.read_block_io_us;
}

double range_cost(int run_count, const CostConstants& constants, const WorkloadMix& mix) {
  if (run_count < 0) throw std::invalid_argument("negative run count");
  return mix.range_lookups * run_count * constants.read_block_io_us;
}

double update_cost(int run_count, const CostConstants& constants, const WorkloadMix& mix,
                   const ArceParams& params) {
  if (run_count < 0) throw std::invalid_argument("negative run count");
  if (mix.updates <= 0.0) return 0.0;
  double flush_io = static_cast<double>(constants.memtable_size) / constants.block_size *
                    constants.write_block_io_us;
  double stall = run_count > params.stall_threshold
                     ? mix.updates * params.stall_penalty_us
                     : 0.0;
  return flush_io + stall;
}

WindowCostBreakdown window_breakdown(int run_count, const CostConstants& constants,
                                     const WorkloadMix& mix, const ArceParams& params) {
  WindowCostBreakdown out;
  out.point_cost = point_cost(run_count, constants, mix);
  out.range_cost = range_cost(run_count, constants, mix);
  out.update_cost = update_cost(run_count, constants, mix, params);
  return out;
}

double window_cost_f(int run_count, int windows, const CostConstants& constants,
                     const WorkloadMix& mix, const ArceParams& params) {
  if (windows < 1) throw std::invalid_argument("window count must be >= 1");
  double total = 0.0;
  for (int i = 0; i < windows; ++i) {
    total += window_breakdown(run_count + i, constants, mix, params).total();
  }
  return total;
}

int elapsed_windows(std::uint64_t compaction_bytes, int run_count,
                    const CostConstants& constants, const WorkloadMix& mix,
                    const ArceParams& params) {
  if (compaction_bytes == 0) throw std::invalid_argument("compaction size must be positive");
  if (mix.empty()) {
    throw std::runtime_error("compaction never completes under idle foreground");
  }
  double target = static_cast<double>(compaction_bytes) / constants.block_size *
                  (constants.read_block_io_us + constants.write_block_io_us);
  double accrued = 0.0;
  for (int t = 1;; ++t) {
    accrued += window_breakdown(run_count + t - 1, constants, mix, params).total();
    if (accrued >= target) return t;
    // A nonempty mix accrues positive cost by the second window at the
    // latest (range cost is zero only while s+i == 0).
    if (t >= 2 && accrued <= 0.0) {
      throw std::runtime_error("compaction never completes under idle foreground");
    }
  }
}

int evolve_state(int run_count, std::optional<int> runs_reduced) {
  int next = run_count + 1 - runs_reduced.value_or(0);
  if (next < 1) throw std::invalid_argument("state evolution would empty the tree");
  return next;
}

int amdahl_adjusted_windows(int windows, double phi, int cores) {
  if (phi < 0.0 || phi > 1.0) throw std::invalid_argument("phi must lie in [0,1]");
  if (cores < 1) throw std::invalid_argument("core count must be >= 1");
  double g = 1.0 / (1.0 - phi * (1.0 - 1.0 / cores));
  int adjusted = static_cast<int>(std::ceil(windows / g));
  return adjusted < 1 ? 1 : adjusted;
}

}  // namespace flexkv
