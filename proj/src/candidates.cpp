#include "flexkv/candidates.hpp"

#include <algorithm>

namespace flexkv {

namespace {

// Enumeration only needs identity and size; copying whole runs (with
// their key strings) per prefix was the hot spot in the searcher.
struct RunRef {
  std::uint64_t id = 0;
  std::uint64_t size_bytes = 0;
};

// Incrementally maintained candidate inputs: sorted ids and byte total,
// extended one run at a time so candidates need only a copy.
struct InputSet {
  std::vector<std::uint64_t> ids;
  std::uint64_t bytes = 0;

  void add(const RunRef& run) {
    ids.insert(std::upper_bound(ids.begin(), ids.end(), run.id), run.id);
    bytes += run.size_bytes;
  }

  CompactionCandidate to_candidate(int output_level, CompactionPattern pattern) const {
    CompactionCandidate c;
    c.output_level = output_level;
    c.pattern = pattern;
    c.input_runs = ids;
    c.input_bytes = bytes;
    c.runs_reduced = static_cast<int>(ids.size()) - 1;
    return c;
  }
};

std::vector<RunRef> runs_at(const TreeState& state, int level) {
  std::vector<RunRef> out;
  if (level < 0 || level >= state.level_count()) return out;
  const auto& runs = state.level(level);
  out.reserve(runs.size());
  for (const SortedRun& run : runs) out.push_back(RunRef{run.id, run.size_bytes});
  return out;
}

// Ascending size, ties broken by run id (older first) for determinism.
void sort_by_size(std::vector<RunRef>& runs) {
  std::sort(runs.begin(), runs.end(), [](const RunRef& a, const RunRef& b) {
    if (a.size_bytes != b.size_bytes) return a.size_bytes < b.size_bytes;
    return a.id < b.id;
  });
}

}  // namespace

void EnumConfig::validate() const {
  if (max_levels < 1 || max_levels > 8) {
    throw std::invalid_argument("max_levels must lie in [1,8]");
  }
  if (max_candidates < 1) throw std::invalid_argument("max_candidates must be positive");
}

std::vector<CompactionCandidate> enumerate_pattern1(const TreeState& state, int level) {
  std::vector<RunRef> runs = runs_at(state, level);
  if (runs.size() < 2) return {};
  sort_by_size(runs);
  std::vector<CompactionCandidate> out;
  out.reserve(runs.size() - 1);
  InputSet prefix;
  prefix.add(runs[0]);
  for (std::size_t i = 1; i < runs.size(); ++i) {
    prefix.add(runs[i]);
    out.push_back(prefix.to_candidate(level, CompactionPattern::kIntraLevel));
  }
  return out;
}

std::vector<CompactionCandidate> enumerate_pattern2(const TreeState& state, int level) {
  std::vector<RunRef> upper = runs_at(state, level);
  if (upper.empty()) return {};
  std::vector<RunRef> lower = runs_at(state, level + 1);
  sort_by_size(lower);
  std::vector<CompactionCandidate> out;
  out.reserve(lower.size() + 1);
  InputSet inputs;
  for (const RunRef& run : upper) inputs.add(run);
  if (inputs.ids.size() >= 2) {
    out.push_back(inputs.to_candidate(level + 1, CompactionPattern::kAdjacentLevel));
  }
  for (const RunRef& run : lower) {
    inputs.add(run);
    out.push_back(inputs.to_candidate(level + 1, CompactionPattern::kAdjacentLevel));
  }
  return out;
}

std::vector<CompactionCandidate> enumerate_pattern3(const TreeState& state,
                                                    int from_level, int to_level) {
  if (to_level <= from_level + 1) {
    throw std::invalid_argument("pattern 3 requires j > i+1");
  }
  InputSet inputs;
  for (int level = from_level; level <= to_level; ++level) {
    for (const RunRef& run : runs_at(state, level)) inputs.add(run);
  }
  std::vector<RunRef> target = runs_at(state, to_level + 1);
  sort_by_size(target);
  std::vector<CompactionCandidate> out;
  if (inputs.ids.size() >= 2) {
    out.push_back(inputs.to_candidate(to_level + 1, CompactionPattern::kMultiLevel));
  }
  for (const RunRef& run : target) {
    inputs.add(run);
    if (inputs.ids.size() >= 2) {
      out.push_back(inputs.to_candidate(to_level + 1, CompactionPattern::kMultiLevel));
    }
  }
  return out;
}

CompactionCandidate CandidateList::materialize(const Entry& entry) const {
  CompactionCandidate c;
  c.output_level = entry.output_level;
  c.pattern = entry.pattern;
  c.input_bytes = entry.input_bytes;
  c.runs_reduced = entry.runs_reduced;
  c.input_runs.assign(ids_of(entry), ids_of(entry) + entry.count);
  return c;
}

namespace {

// (size, id) pairs for one level, ascending size then id, into scratch.
void level_sorted(const TreeState& state, int level,
                  std::vector<std::pair<std::uint64_t, std::uint64_t>>& out) {
  out.clear();
  if (level < 0 || level >= state.level_count()) return;
  for (const SortedRun& run : state.level(level)) out.emplace_back(run.size_bytes, run.id);
  std::sort(out.begin(), out.end());
}

}  // namespace

void all_candidates_into(const TreeState& state, const EnumConfig& config,
                         CandidateList& out, EnumStats* stats) {
  config.validate();
  const int levels = config.max_levels;
  out.ids.clear();
  out.entries.clear();
  out.overflow.clear();
  int truncated = 0;

  auto& cur = out.scratch_ids;  // sorted input-id set under construction
  std::uint64_t cur_bytes = 0;
  auto reset = [&] {
    cur.clear();
    cur_bytes = 0;
  };
  auto add_run = [&](std::uint64_t id, std::uint64_t size) {
    cur.insert(std::upper_bound(cur.begin(), cur.end(), id), id);
    cur_bytes += size;
  };
  auto add_level = [&](int level) {
    if (level < 0 || level >= state.level_count()) return;
    for (const SortedRun& run : state.level(level)) add_run(run.id, run.size_bytes);
  };

  // Duplicate iff the sorted id sets match; count and byte total are
  // cheap exact filters before the element compare.
  auto matches = [&](const CandidateList::Entry& entry) {
    return entry.count == cur.size() && entry.input_bytes == cur_bytes &&
           std::equal(cur.begin(), cur.end(), out.ids_of(entry));
  };
  auto emit = [&](int output_level, CompactionPattern pattern) {
    if (cur.size() < 2) return;  // y >= 1
    for (const auto& entry : out.entries) {
      if (matches(entry)) return;
    }
    for (const auto& entry : out.overflow) {
      if (matches(entry)) return;
    }
    CandidateList::Entry entry;
    entry.offset = static_cast<std::uint32_t>(out.ids.size());
    entry.count = static_cast<std::uint32_t>(cur.size());
    entry.input_bytes = cur_bytes;
    entry.output_level = output_level;
    entry.runs_reduced = static_cast<int>(cur.size()) - 1;
    entry.pattern = pattern;
    out.ids.insert(out.ids.end(), cur.begin(), cur.end());
    if (static_cast<int>(out.entries.size()) >= config.max_candidates) {
      ++truncated;
      out.overflow.push_back(entry);
    } else {
      out.entries.push_back(entry);
    }
  };

  for (int level = 0; level < levels; ++level) {
    level_sorted(state, level, out.scratch_runs);
    reset();
    for (const auto& [size, id] : out.scratch_runs) {
      add_run(id, size);
      emit(level, CompactionPattern::kIntraLevel);
    }
  }
  for (int level = 0; level + 1 < levels; ++level) {
    if (level >= state.level_count() || state.level(level).empty()) continue;
    level_sorted(state, level + 1, out.scratch_runs);
    reset();
    add_level(level);
    emit(level + 1, CompactionPattern::kAdjacentLevel);
    for (const auto& [size, id] : out.scratch_runs) {
      add_run(id, size);
      emit(level + 1, CompactionPattern::kAdjacentLevel);
    }
  }
  for (int i = 0; i + 3 < levels; ++i) {
    for (int j = i + 2; j + 1 < levels; ++j) {
      level_sorted(state, j + 1, out.scratch_runs);
      reset();
      for (int level = i; level <= j; ++level) add_level(level);
      emit(j + 1, CompactionPattern::kMultiLevel);
      for (const auto& [size, id] : out.scratch_runs) {
        add_run(id, size);
        emit(j + 1, CompactionPattern::kMultiLevel);
      }
    }
  }
  if (stats != nullptr) stats->truncated = truncated;
}

std::vector<CompactionCandidate> all_candidates(const TreeState& state,
                                                const EnumConfig& config,
                                                EnumStats* stats) {
  CandidateList list;
  all_candidates_into(state, config, list, stats);
  std::vector<CompactionCandidate> out;
  out.reserve(list.entries.size());
  for (const auto& entry : list.entries) out.push_back(list.materialize(entry));
  return out;
}

}  // namespace flexkv
