#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flexkv/types.hpp"

namespace flexkv::testutil {

// Builds a valid tree from per-level run sizes. Sequence intervals are
// assigned so deeper levels are strictly older.
inline TreeState make_tree(const std::vector<std::vector<std::uint64_t>>& level_sizes,
                           int min_levels = 0) {
  TreeState state(std::max<int>(min_levels, static_cast<int>(level_sizes.size())));
  std::uint64_t id = 1;
  std::uint64_t seq = 1u << 20;
  for (std::size_t level = 0; level < level_sizes.size(); ++level) {
    std::uint64_t level_seq = seq - static_cast<std::uint64_t>(level) * 1000;
    for (std::uint64_t size : level_sizes[level]) {
      SortedRun run;
      run.id = id++;
      run.level = static_cast<int>(level);
      run.size_bytes = size;
      run.min_key = "a";
      run.max_key = "z";
      run.min_seq = run.max_seq = level_seq--;
      state.add_run(std::move(run));
    }
  }
  return state;
}

inline CostConstants paper_constants() {
  CostConstants c;
  c.read_block_io_us = 12.0;
  c.write_block_io_us = 15.0;
  c.block_size = 4096;
  c.memtable_size = 2 * 1024 * 1024;
  c.entry_size = 1024;
  c.bloom_alpha = bloom_fpr(10.0);
  return c;
}

}  // namespace flexkv::testutil
