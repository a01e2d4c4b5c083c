#pragma once

#include <chrono>
#include <optional>
#include <vector>

#include "flexkv/scorer.hpp"

namespace flexkv {

struct SearchConfig {
  int m_step = 5;
  int c_step = 2;
  std::vector<double> k_candidates = {6.0, 12.0, 24.0};
  int max_iter = 400;               // simulated decisions per tuple
  double recompute_threshold = 0.1; // d
  int worker_count = 16;
  EnumConfig enum_config;
  ScoreConfig score_config;

  void validate() const;
};

// One simulated decision; the replay oracle recomputes costs from these.
struct DecisionRecord {
  int iteration = 0;
  bool compacted = false;
  int run_count_before = 0;  // s at decision time
  int elapsed = 1;           // t (1 for a no-compaction window)
  int runs_reduced = 0;      // y
  double accrued_cost = 0.0; // f(s,t)
  std::vector<std::uint64_t> input_runs;
};

struct SimulationResult {
  double average_cost = 0.0;  // microseconds per operation
  double total_cost = 0.0;
  double total_ops = 0.0;
  // Largest s + t any scored candidate or idle window reached; every
  // stall threshold at or above this value yields this exact trajectory.
  int max_pressure = 0;
  // Below every run count the trajectory touched, all candidates and
  // windows sit in stall, so scores shift uniformly with c: the argmax is
  // unchanged and only an idle decision can flip sign, at a computable
  // threshold. Every stall threshold in [simulated c, low_pressure]
  // yields this exact trajectory.
  int low_pressure = 0;
  std::vector<DecisionRecord> trace;
};

struct SearchResult {
  ArceParams best_params;
  double best_avg_cost = 0.0;
  int tuples_evaluated = 0;
  std::chrono::microseconds wall_time{0};
};

// Runs max_iter greedy pick_best decisions on a copy of the state,
// accruing f(s,t) cost and t*(r+u+p) operations per decision. A window
// with no chosen compaction advances the state by one flush arrival.
SimulationResult simulate_policy(const TreeState& state, const WorkloadMix& mix,
                                 const CostConstants& constants, const ArceParams& params,
                                 int max_iter, const EnumConfig& enum_config,
                                 const ScoreConfig& score_config = {},
                                 bool keep_trace = false);

// Grid search over pruned (M, c, k) tuples; argmin of simulated average
// cost with deterministic tie-break (smaller M, then c, then k).
SearchResult find_best_params(const TreeState& state, const WorkloadMix& mix,
                              const CostConstants& constants, const SearchConfig& config);

// Snapshot of the quantities whose drift triggers a new search.
struct RecomputeSnapshot {
  WorkloadMix mix;
  std::uint64_t total_bytes = 0;
  int run_count = 0;
};

// True when any tracked quantity's relative change exceeds the threshold.
bool should_recompute(const RecomputeSnapshot& prev, const RecomputeSnapshot& current,
                      double threshold);

}  // namespace flexkv
