#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flexkv {

// All I/O costs are expressed in microseconds, all sizes in bytes.
// Timestamps are global sequence numbers assigned at write time.

struct CostConstants {
  double read_block_io_us = 12.0;   // Ir: time to read one data block
  double write_block_io_us = 15.0;  // Iw: time to write one data block
  std::uint64_t block_size = 4096;  // B
  std::uint64_t memtable_size = 2 * 1024 * 1024;  // F
  std::uint64_t entry_size = 1024;                // E
  double bloom_alpha = 0.0;  // false positive rate, in [0,1]

  void validate() const;
};

// Per-window false positive rate from bits-per-key: exp(-bpk * ln(2)^2).
double bloom_fpr(double bits_per_key);

// Updates per count window, u = F/E. Throws if F is not a multiple of E.
std::uint64_t window_update_count(const CostConstants& constants);

// Operation counts observed (or expected) within one count window.
struct WorkloadMix {
  double range_lookups = 0.0;  // r
  double updates = 0.0;        // u
  double point_lookups = 0.0;  // p

  double total() const { return range_lookups + updates + point_lookups; }
  bool empty() const { return total() <= 0.0; }
};

struct SortedRun {
  std::uint64_t id = 0;
  int level = 0;
  std::uint64_t size_bytes = 0;
  std::string min_key;
  std::string max_key;
  std::uint64_t min_seq = 0;
  std::uint64_t max_seq = 0;
  std::string file;  // empty for simulation-only runs
};

// Decision-engine tuple: long-term weight M, stall threshold c (total run
// count), stall penalty rate k (microseconds added per update while stalled).
struct ArceParams {
  double long_term_weight = 0.0;  // M
  int stall_threshold = 20;       // c
  double stall_penalty_us = 6.0;  // k
};

enum class CompactionPattern { kIntraLevel = 1, kAdjacentLevel = 2, kMultiLevel = 3 };

struct CompactionCandidate {
  std::vector<std::uint64_t> input_runs;  // sorted run ids
  int output_level = 0;
  std::uint64_t input_bytes = 0;  // X
  int runs_reduced = 0;           // y = |input_runs| - 1
  CompactionPattern pattern = CompactionPattern::kIntraLevel;
};

// The multiset of sorted runs per level; the sole structural state.
class TreeState {
 public:
  TreeState() = default;
  explicit TreeState(int level_count) : levels_(level_count) {}

  int level_count() const { return static_cast<int>(levels_.size()); }
  const std::vector<SortedRun>& level(int i) const { return levels_[i]; }

  int run_count() const;
  std::uint64_t total_bytes() const;
  bool empty() const { return run_count() == 0; }

  // Appends a run to its level, growing the level list as needed.
  void add_run(SortedRun run);

  const SortedRun* find_run(std::uint64_t id) const;
  std::vector<SortedRun> collect(const std::vector<std::uint64_t>& ids) const;

  // Removes the candidate's inputs and installs the merged output run with
  // the given id. The output's key range and seq interval are the unions of
  // the inputs'. Returns the installed run.
  SortedRun apply_candidate(const CompactionCandidate& candidate,
                            std::uint64_t output_id);

  // Replaces the run set wholesale (manifest replay).
  void reset(std::vector<SortedRun> runs, int min_levels);

  std::vector<SortedRun> all_runs() const;

 private:
  std::vector<std::vector<SortedRun>> levels_;
};

// Checks the cross-level timestamp ordering (deeper levels hold strictly
// older data) and per-run field sanity. Returns the first violation found.
std::optional<std::string> validate_tree(const TreeState& state);

}  // namespace flexkv
