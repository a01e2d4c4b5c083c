#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flexkv/param_search.hpp"

namespace flexkv {

// Exhaustive search for the optimal action sequence on tiny instances.
// Ground truth for the empirical 2-approximation check.

struct TinyInstance {
  std::string name;
  TreeState initial;
  std::vector<WorkloadMix> schedule;  // one mix per window, W <= 5
  CostConstants constants;
  ArceParams stall;  // only c and k matter for cost accounting
};

struct SequenceStep {
  bool compacted = false;
  std::vector<std::uint64_t> input_runs;
  int output_level = 0;
  int elapsed = 1;       // windows consumed
  int runs_reduced = 0;
  double cost = 0.0;     // foreground cost accrued over those windows
};

struct OracleResult {
  double average_cost = 0.0;
  double total_cost = 0.0;
  double total_ops = 0.0;
  std::vector<SequenceStep> sequence;
  std::size_t states_explored = 0;
};

// Enumerates every window-aligned action sequence spanning the schedule
// (memoized on the canonical run multiset) and returns the minimum
// average cost with one argmin sequence. Throws when the instance exceeds
// the exhaustive-search bound.
OracleResult optimal_sequence(const TinyInstance& instance,
                              std::size_t state_budget = 200000);

struct ArceTraceResult {
  double average_cost = 0.0;
  double total_cost = 0.0;
  std::vector<SequenceStep> sequence;
};

// Greedy trace: per decision point, grid-search parameters on the current
// state and pick the highest-scoring candidate that fits the remaining
// windows. Cost accounting uses the instance's fixed stall parameters.
ArceTraceResult arce_trace(const TinyInstance& instance, const SearchConfig& config);

// (ARCE average cost) / (optimal average cost), >= 1 up to float noise.
double approximation_ratio(const OracleResult& optimal, const ArceTraceResult& arce);

// Corpus format: one instance per "instance .. end" record.
std::vector<TinyInstance> load_instances(std::istream& in);
void save_instances(std::ostream& out, const std::vector<TinyInstance>& instances);

}  // namespace flexkv
