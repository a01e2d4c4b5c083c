#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flexkv/env.hpp"
#include "flexkv/manifest.hpp"
#include "flexkv/param_search.hpp"
#include "flexkv/scorer.hpp"
#include "flexkv/sst.hpp"
#include "flexkv/types.hpp"

namespace flexkv {

enum class PolicyKind { kArce, kLeveling, kTiering, kLazyLeveling };

std::string policy_name(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);

struct EngineConfig {
  std::string data_dir;
  PolicyKind policy = PolicyKind::kArce;
  int size_ratio = 10;  // T for the baselines
  CostConstants constants;
  double bloom_bits_per_key = 10.0;
  std::uint64_t stats_period = 1'000'000;  // ops per stats report
  ArceParams initial_params{0.0, 20, 6.0};
  SearchConfig search;
  // Baselines stall on the level-0 run count instead of an adaptive c.
  int baseline_stall_runs = 20;
  double baseline_stall_us = 6.0;
  // Metadata-only runs: no files, lookup I/O drawn from the bloom rate.
  bool simulate_payload = false;
  // Spin for the stall penalty instead of only accounting it.
  bool real_stall = false;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

// JSON config file; unknown keys rejected, absent keys keep defaults.
EngineConfig load_engine_config(const std::string& path);

struct EngineMetrics {
  std::uint64_t puts = 0;
  std::uint64_t deletes = 0;
  std::uint64_t gets = 0;
  std::uint64_t scans = 0;
  std::uint64_t ops = 0;
  std::uint64_t flushes = 0;
  std::uint64_t compactions_started = 0;
  std::uint64_t compactions_completed = 0;
  std::uint64_t data_block_reads = 0;
  std::uint64_t param_searches = 0;
  std::uint64_t stalled_puts = 0;
  double stall_time_us = 0.0;
  // Foreground I/O clock: counted block reads and flush writes priced at
  // Ir/Iw, plus stall time. Compaction progress is measured against it.
  double virtual_time_us = 0.0;
  double last_op_cost_us = 0.0;
  std::uint64_t user_bytes_written = 0;
  double search_wall_us = 0.0;  // real time spent in parameter searches
};

// One completed compaction: the window estimate made when it was
// scheduled against the flush count observed while it ran.
struct WindowLogEntry {
  std::uint64_t input_bytes = 0;
  int estimated_windows = 0;
  int actual_windows = 0;
};

class Engine {
 public:
  Engine(Env& env, EngineConfig config);
  ~Engine();

  void put(std::string_view key, std::string_view value);
  void del(std::string_view key);
  std::optional<std::string> get(std::string_view key);
  std::vector<std::pair<std::string, std::string>> scan(std::string_view start,
                                                        std::string_view end);
  std::vector<std::pair<std::string, std::string>> scan_n(std::string_view start,
                                                          std::size_t limit);

  // Seals and flushes a nonempty buffer; waits out any running compaction
  // by completing it immediately. Used on close and by tests.
  void flush();
  void close();

  const TreeState& tree() const { return tree_; }
  const EngineMetrics& metrics() const { return metrics_; }
  const std::vector<WindowLogEntry>& window_log() const { return window_log_; }
  const ArceParams& params() const { return params_; }
  const EngineConfig& config() const { return config_; }
  bool compaction_running() const { return running_.has_value(); }
  const WorkloadMix& current_mix() const { return mix_; }

  // Feeds a raw stats report directly (tests and cold-start probes); the
  // mix is rescaled so its update count equals one window's worth.
  void inject_stats(const WorkloadMix& raw);

  // The compaction the policy would schedule right now, without
  // scheduling it.
  std::optional<CompactionCandidate> peek_decision();

 private:
  struct MemEntry {
    std::string value;
    std::uint64_t seq = 0;
    bool tombstone = false;
  };
  struct RunReader {
    std::shared_ptr<SstReader> reader;
  };
  struct RunningCompaction {
    CompactionCandidate candidate;
    int estimated_windows = 0;
    int actual_windows = 0;
    double start_virtual_us = 0.0;
    double target_io_us = 0.0;
  };

  void recover();
  void write_entry(std::string_view key, std::string_view value, bool tombstone);
  void maybe_stall();
  void seal_and_flush();
  void window_boundary();
  void maybe_complete_compaction(bool force);
  void poll_compaction();
  void execute_compaction(const CompactionCandidate& candidate);
  void maybe_schedule();
  void maybe_report_stats();
  RunDescriptor descriptor_for(const SortedRun& run, std::uint64_t entries) const;
  double charge(double io_us);
  std::vector<const SortedRun*> runs_newest_first() const;
  int deepest_nonempty_level(const std::vector<std::uint64_t>& excluded) const;

  Env& env_;
  EngineConfig config_;
  std::unique_ptr<Manifest> manifest_;
  TreeState tree_;
  std::map<std::uint64_t, RunReader> readers_;
  std::shared_ptr<SstReader::Stats> read_stats_;
  std::map<std::string, MemEntry, std::less<>> memtable_;
  std::uint64_t memtable_bytes_ = 0;
  std::uint64_t next_seq_ = 1;
  std::uint64_t next_run_id_ = 1;
  ArceParams params_;
  WorkloadMix mix_;          // current window-scaled estimate
  WorkloadMix raw_counts_;   // counts since the last stats report
  std::uint64_t ops_in_period_ = 0;
  std::optional<RecomputeSnapshot> last_search_;
  std::optional<RunningCompaction> running_;
  std::vector<WindowLogEntry> window_log_;
  EngineMetrics metrics_;
  std::mt19937_64 rng_;
  bool open_ = false;
};

// Baseline compaction rules. Leveling merges a level into the next when
// its bytes exceed T^i * F; Tiering merges a level's oldest T runs when
// it reaches T; LazyLeveling is Tiering except the deepest non-empty
// level, which keeps one run.
std::optional<CompactionCandidate> baseline_trigger(PolicyKind policy, int size_ratio,
                                                    const TreeState& state,
                                                    const CostConstants& constants);

}  // namespace flexkv
