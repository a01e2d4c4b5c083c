#include "flexkv/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace flexkv {

void CostConstants::validate() const {
  if (read_block_io_us <= 0 || write_block_io_us <= 0) {
    throw std::invalid_argument("block I/O times must be positive");
  }
  if (block_size == 0 || memtable_size == 0 || entry_size == 0) {
    throw std::invalid_argument("sizes must be positive");
  }
  if (bloom_alpha < 0.0 || bloom_alpha > 1.0) {
    throw std::invalid_argument("bloom_alpha must lie in [0,1]");
  }
  if (memtable_size % entry_size != 0) {
    throw std::invalid_argument("memtable_size must be a multiple of entry_size");
  }
}

double bloom_fpr(double bits_per_key) {
  if (bits_per_key < 0) {
    throw std::invalid_argument("bits_per_key must be nonnegative");
  }
  static const double ln2_sq = std::log(2.0) * std::log(2.0);
  return std::exp(-bits_per_key * ln2_sq);
}

std::uint64_t window_update_count(const CostConstants& constants) {
  if (constants.entry_size == 0 || constants.memtable_size % constants.entry_size != 0) {
    throw std::invalid_argument("memtable_size must be a whole multiple of entry_size");
  }
  return constants.memtable_size / constants.entry_size;
}

int TreeState::run_count() const {
  int n = 0;
  for (const auto& level : levels_) n += static_cast<int>(level.size());
  return n;
}

std::uint64_t TreeState::total_bytes() const {
  std::uint64_t n = 0;
  for (const auto& level : levels_) {
    for (const auto& run : level) n += run.size_bytes;
  }
  return n;
}

void TreeState::add_run(SortedRun run) {
  if (run.level < 0) throw std::invalid_argument("negative level");
  if (run.level >= level_count()) levels_.resize(run.level + 1);
  levels_[run.level].push_back(std::move(run));
}

const SortedRun* TreeState::find_run(std::uint64_t id) const {
  for (const auto& level : levels_) {
    for (const auto& run : level) {
      if (run.id == id) return &run;
    }
  }
  return nullptr;
}

std::vector<SortedRun> TreeState::collect(const std::vector<std::uint64_t>& ids) const {
  std::vector<SortedRun> out;
  out.reserve(ids.size());
  for (auto id : ids) {
    const SortedRun* run = find_run(id);
    if (run == nullptr) throw std::invalid_argument("unknown run id");
    out.push_back(*run);
  }
  return out;
}

SortedRun TreeState::apply_candidate(const CompactionCandidate& candidate,
                                     std::uint64_t output_id) {
  std::vector<SortedRun> inputs = collect(candidate.input_runs);
  SortedRun output;
  output.id = output_id;
  output.level = candidate.output_level;
  output.min_seq = std::numeric_limits<std::uint64_t>::max();
  output.max_seq = 0;
  for (const auto& run : inputs) {
    output.size_bytes += run.size_bytes;
    output.min_seq = std::min(output.min_seq, run.min_seq);
    output.max_seq = std::max(output.max_seq, run.max_seq);
    if (output.min_key.empty() || run.min_key < output.min_key) {
      output.min_key = run.min_key;
    }
    if (run.max_key > output.max_key) output.max_key = run.max_key;
  }
  std::unordered_set<std::uint64_t> doomed(candidate.input_runs.begin(),
                                           candidate.input_runs.end());
  for (auto& level : levels_) {
    std::erase_if(level, [&](const SortedRun& run) { return doomed.count(run.id) > 0; });
  }
  add_run(output);
  return output;
}

void TreeState::reset(std::vector<SortedRun> runs, int min_levels) {
  levels_.assign(min_levels, {});
  for (auto& run : runs) add_run(std::move(run));
}

std::vector<SortedRun> TreeState::all_runs() const {
  std::vector<SortedRun> out;
  for (const auto& level : levels_) {
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::optional<std::string> validate_tree(const TreeState& state) {
  for (int i = 0; i < state.level_count(); ++i) {
    for (const auto& run : state.level(i)) {
      if (run.size_bytes == 0) {
        return "run " + std::to_string(run.id) + " has zero size";
      }
      if (run.min_key > run.max_key) {
        return "run " + std::to_string(run.id) + " has inverted key range";
      }
      if (run.min_seq > run.max_seq) {
        return "run " + std::to_string(run.id) + " has inverted seq interval";
      }
      if (run.level != i) {
        return "run " + std::to_string(run.id) + " filed under wrong level";
      }
    }
  }
  // Deeper levels must hold older data: max seq at level j <= min seq at
  // level i for every i < j.
  std::uint64_t min_seq_above = std::numeric_limits<std::uint64_t>::max();
  for (int i = 0; i < state.level_count(); ++i) {
    std::uint64_t level_min = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t level_max = 0;
    for (const auto& run : state.level(i)) {
      level_min = std::min(level_min, run.min_seq);
      level_max = std::max(level_max, run.max_seq);
    }
    if (state.level(i).empty()) continue;
    if (level_max > min_seq_above) {
      return "level " + std::to_string(i) + " holds data newer than a shallower level";
    }
    min_seq_above = std::min(min_seq_above, level_min);
  }
  return std::nullopt;
}

}  // namespace flexkv
