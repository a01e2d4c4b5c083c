#pragma once

#include <optional>

#include "flexkv/types.hpp"

namespace flexkv {

// Windowed-state cost model. Every function is pure; run counts use the
// total number of sorted runs in the tree.

struct WindowCostBreakdown {
  double point_cost = 0.0;
  double range_cost = 0.0;
  double update_cost = 0.0;
  double total() const { return point_cost + range_cost + update_cost; }
};

// p * (alpha * s + 1) * Ir
double point_cost(int run_count, const CostConstants& constants, const WorkloadMix& mix);

// r * s * Ir. The length-proportional scan term does not depend on the tree
// state and is excluded from optimization.
double range_cost(int run_count, const CostConstants& constants, const WorkloadMix& mix);

// Flush I/O (F/B)*Iw charged once per window, plus the stall penalty
// u*k when the run count exceeds the threshold. Zero when the window has
// no updates (no flush occurs).
double update_cost(int run_count, const CostConstants& constants, const WorkloadMix& mix,
                   const ArceParams& params);

WindowCostBreakdown window_breakdown(int run_count, const CostConstants& constants,
                                     const WorkloadMix& mix, const ArceParams& params);

// f(s,t): cumulative foreground cost over t windows, with the run count
// growing by one per window (one flush arrival per window).
double window_cost_f(int run_count, int windows, const CostConstants& constants,
                     const WorkloadMix& mix, const ArceParams& params);

// Smallest t with f(s,t) >= (X/B)*(Ir+Iw). Throws when the foreground mix
// is idle (the compaction would never complete).
int elapsed_windows(std::uint64_t compaction_bytes, int run_count,
                    const CostConstants& constants, const WorkloadMix& mix,
                    const ArceParams& params);

// s_{i+1} = s_i + 1, minus y when a compaction reducing y runs completes.
int evolve_state(int run_count, std::optional<int> runs_reduced);

// Amdahl speedup g = 1/(1 - phi*(1 - 1/eta)); returns ceil(t/g), never
// below one window.
int amdahl_adjusted_windows(int windows, double phi, int cores);

}  // namespace flexkv
