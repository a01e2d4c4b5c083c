#pragma once

#include <vector>

#include "flexkv/types.hpp"

namespace flexkv {

// Enumeration of valid compaction candidates under the unconstrained
// action space. Three patterns, each pruned to ascending-size prefixes:
//   1. intra-level:    merge a prefix of one level's runs in place
//   2. adjacent-level: merge all of level i with a prefix of level i+1
//   3. multi-level:    merge all of levels i..j (j > i+1) with a prefix
//                      of level j+1
// Every candidate strictly reduces the run count (y >= 1) and preserves
// the cross-level timestamp order when applied.

struct EnumConfig {
  int max_levels = 4;       // hard cap 8
  int max_candidates = 4096;

  void validate() const;
};

struct EnumStats {
  int truncated = 0;  // candidates dropped by the max_candidates cap
};

std::vector<CompactionCandidate> enumerate_pattern1(const TreeState& state, int level);

std::vector<CompactionCandidate> enumerate_pattern2(const TreeState& state, int level);

std::vector<CompactionCandidate> enumerate_pattern3(const TreeState& state,
                                                    int from_level, int to_level);

// Flat candidate storage meant to be reused across enumerations: all
// input-run ids live in one buffer, so the searcher's per-window
// re-enumeration stops allocating once the buffers are warm.
struct CandidateList {
  struct Entry {
    std::uint32_t offset = 0;  // into ids
    std::uint32_t count = 0;
    std::uint64_t input_bytes = 0;
    int output_level = 0;
    int runs_reduced = 0;
    CompactionPattern pattern = CompactionPattern::kIntraLevel;
  };
  std::vector<std::uint64_t> ids;
  std::vector<Entry> entries;

  const std::uint64_t* ids_of(const Entry& entry) const { return ids.data() + entry.offset; }
  CompactionCandidate materialize(const Entry& entry) const;

  // Scratch for enumeration, kept here so capacity survives between calls.
  std::vector<Entry> overflow;  // candidates past the cap, kept for dedup
  std::vector<std::pair<std::uint64_t, std::uint64_t>> scratch_runs;
  std::vector<std::uint64_t> scratch_ids;
};

// Union of patterns 1-3 across levels, deduplicated by input-run set.
// First-seen wins (pattern order, then level order), so the output is a
// deterministic function of the tree state.
std::vector<CompactionCandidate> all_candidates(const TreeState& state,
                                                const EnumConfig& config,
                                                EnumStats* stats = nullptr);

// Same enumeration, same order, written into a reusable flat list.
void all_candidates_into(const TreeState& state, const EnumConfig& config,
                         CandidateList& out, EnumStats* stats = nullptr);

}  // namespace flexkv
