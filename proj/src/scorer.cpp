#include "flexkv/scorer.hpp"

#include <algorithm>

namespace flexkv {

double short_term_effect(int run_count, int elapsed, const WorkloadMix& mix,
                         const CostConstants& constants, const ArceParams& params,
                         bool include_stall_penalty) {
  if (elapsed < 1) throw std::invalid_argument("elapsed windows must be >= 1");
  double read_weight = mix.range_lookups + constants.bloom_alpha * mix.point_lookups;
  double slowdown = constants.read_block_io_us * elapsed * read_weight;
  double stall = 0.0;
  if (include_stall_penalty) {
    int over = run_count + elapsed - params.stall_threshold;
    if (over > 0) stall = mix.updates * params.stall_penalty_us * over;
  }
  return slowdown + stall;
}

double long_term_effect(int runs_reduced, const WorkloadMix& mix,
                        const CostConstants& constants) {
  if (runs_reduced < 1) throw std::invalid_argument("runs_reduced must be >= 1");
  double read_weight = mix.range_lookups + constants.bloom_alpha * mix.point_lookups;
  return read_weight * constants.read_block_io_us * runs_reduced;
}

ScoredCandidate effectiveness(const CompactionCandidate& candidate, int run_count,
                              const WorkloadMix& mix, const CostConstants& constants,
                              const ArceParams& params, const ScoreConfig& config) {
  ScoredCandidate out;
  out.candidate = candidate;
  int t = elapsed_windows(candidate.input_bytes, run_count, constants, mix, params);
  if (config.foreground_cores > 1) {
    t = amdahl_adjusted_windows(t, config.parallel_fraction, config.foreground_cores);
  }
  out.elapsed = t;
  out.short_term = short_term_effect(run_count, t, mix, constants, params,
                                     config.include_stall_penalty);
  out.long_term = long_term_effect(candidate.runs_reduced, mix, constants);
  out.score = params.long_term_weight * out.long_term - out.short_term;
  return out;
}

std::vector<ScoredCandidate> dominating_filter(std::vector<ScoredCandidate> scored) {
  std::vector<ScoredCandidate> out;
  for (const auto& b : scored) {
    bool dominated = std::any_of(scored.begin(), scored.end(), [&](const auto& a) {
      return a.candidate.runs_reduced >= b.candidate.runs_reduced && a.elapsed < b.elapsed;
    });
    if (!dominated) out.push_back(b);
  }
  return out;
}

namespace {

// Cumulative f(s,t) built once per state; the same incremental summation
// as elapsed_windows, so lookups return identical values.
class ElapsedTable {
 public:
  ElapsedTable(int run_count, const WorkloadMix& mix, const CostConstants& constants,
               const ArceParams& params, std::vector<double>& cum)
      : run_count_(run_count), mix_(mix), constants_(constants), params_(params),
        cum_(cum) {
    cum_.clear();
  }

  int elapsed_for(std::uint64_t bytes) {
    if (bytes == 0) throw std::invalid_argument("compaction size must be positive");
    if (mix_.empty()) {
      throw std::runtime_error("compaction never completes under idle foreground");
    }
    const double target = static_cast<double>(bytes) / constants_.block_size *
                          (constants_.read_block_io_us + constants_.write_block_io_us);
    while (cum_.empty() || cum_.back() < target) {
      const int t = static_cast<int>(cum_.size()) + 1;
      const double next =
          (cum_.empty() ? 0.0 : cum_.back()) +
          window_breakdown(run_count_ + t - 1, constants_, mix_, params_).total();
      if (t >= 2 && next <= 0.0) {
        throw std::runtime_error("compaction never completes under idle foreground");
      }
      cum_.push_back(next);
    }
    auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
    return static_cast<int>(it - cum_.begin()) + 1;
  }

 private:
  int run_count_;
  const WorkloadMix& mix_;
  const CostConstants& constants_;
  const ArceParams& params_;
  std::vector<double>& cum_;
};

}  // namespace

std::vector<ScoredCandidate> score_candidates(
    const std::vector<CompactionCandidate>& candidates, int run_count,
    const WorkloadMix& mix, const CostConstants& constants, const ArceParams& params,
    const ScoreConfig& score_config) {
  std::vector<double> cum;
  ElapsedTable table(run_count, mix, constants, params, cum);
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    ScoredCandidate out;
    int t = table.elapsed_for(candidate.input_bytes);
    if (score_config.foreground_cores > 1) {
      t = amdahl_adjusted_windows(t, score_config.parallel_fraction,
                                  score_config.foreground_cores);
    }
    out.elapsed = t;
    out.short_term = short_term_effect(run_count, t, mix, constants, params,
                                       score_config.include_stall_penalty);
    out.long_term = long_term_effect(candidate.runs_reduced, mix, constants);
    out.score = params.long_term_weight * out.long_term - out.short_term;
    out.candidate = candidate;
    scored.push_back(std::move(out));
  }
  return scored;
}

std::vector<ScoredCandidate> score_all(const TreeState& state, const WorkloadMix& mix,
                                       const CostConstants& constants,
                                       const ArceParams& params,
                                       const EnumConfig& enum_config,
                                       const ScoreConfig& score_config) {
  return score_candidates(all_candidates(state, enum_config), state.run_count(), mix,
                          constants, params, score_config);
}

ScoredPick pick_scored_index(const std::vector<CompactionCandidate>& candidates,
                             int run_count, const WorkloadMix& mix,
                             const CostConstants& constants, const ArceParams& params,
                             const ScoreConfig& score_config,
                             std::vector<double>& cum_scratch) {
  ElapsedTable table(run_count, mix, constants, params, cum_scratch);
  ScoredPick pick;
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    const CompactionCandidate& candidate = candidates[i];
    int t = table.elapsed_for(candidate.input_bytes);
    if (score_config.foreground_cores > 1) {
      t = amdahl_adjusted_windows(t, score_config.parallel_fraction,
                                  score_config.foreground_cores);
    }
    const double short_term = short_term_effect(run_count, t, mix, constants, params,
                                                score_config.include_stall_penalty);
    const double long_term = long_term_effect(candidate.runs_reduced, mix, constants);
    const double score = params.long_term_weight * long_term - short_term;
    pick.max_elapsed = std::max(pick.max_elapsed, t);

    bool better;
    if (pick.index < 0) {
      better = true;
    } else {
      const CompactionCandidate& best = candidates[pick.index];
      if (score != pick.score) {
        better = score > pick.score;
      } else if (t != pick.elapsed) {
        better = t < pick.elapsed;
      } else if (candidate.input_bytes != best.input_bytes) {
        better = candidate.input_bytes < best.input_bytes;
      } else if (candidate.output_level != best.output_level) {
        better = candidate.output_level < best.output_level;
      } else {
        better = candidate.input_runs < best.input_runs;
      }
    }
    if (better) {
      pick.index = i;
      pick.elapsed = t;
      pick.short_term = short_term;
      pick.long_term = long_term;
      pick.score = score;
    }
  }
  return pick;
}

ScoredPick pick_scored_entry(const CandidateList& list, int run_count,
                             const WorkloadMix& mix, const CostConstants& constants,
                             const ArceParams& params, const ScoreConfig& score_config,
                             std::vector<double>& cum_scratch) {
  ElapsedTable table(run_count, mix, constants, params, cum_scratch);
  ScoredPick pick;
  for (int i = 0; i < static_cast<int>(list.entries.size()); ++i) {
    const CandidateList::Entry& entry = list.entries[i];
    int t = table.elapsed_for(entry.input_bytes);
    if (score_config.foreground_cores > 1) {
      t = amdahl_adjusted_windows(t, score_config.parallel_fraction,
                                  score_config.foreground_cores);
    }
    const double short_term = short_term_effect(run_count, t, mix, constants, params,
                                                score_config.include_stall_penalty);
    const double long_term = long_term_effect(entry.runs_reduced, mix, constants);
    const double score = params.long_term_weight * long_term - short_term;
    pick.max_elapsed = std::max(pick.max_elapsed, t);

    bool better;
    if (pick.index < 0) {
      better = true;
    } else {
      const CandidateList::Entry& best = list.entries[pick.index];
      if (score != pick.score) {
        better = score > pick.score;
      } else if (t != pick.elapsed) {
        better = t < pick.elapsed;
      } else if (entry.input_bytes != best.input_bytes) {
        better = entry.input_bytes < best.input_bytes;
      } else if (entry.output_level != best.output_level) {
        better = entry.output_level < best.output_level;
      } else {
        better = std::lexicographical_compare(
            list.ids_of(entry), list.ids_of(entry) + entry.count, list.ids_of(best),
            list.ids_of(best) + best.count);
      }
    }
    if (better) {
      pick.index = i;
      pick.elapsed = t;
      pick.short_term = short_term;
      pick.long_term = long_term;
      pick.score = score;
    }
  }
  return pick;
}

// Argmax order: higher score first, then smaller t, smaller X, lower
// output level, and run-id list as a final stable key.
bool scored_better(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.elapsed != b.elapsed) return a.elapsed < b.elapsed;
  if (a.candidate.input_bytes != b.candidate.input_bytes) {
    return a.candidate.input_bytes < b.candidate.input_bytes;
  }
  if (a.candidate.output_level != b.candidate.output_level) {
    return a.candidate.output_level < b.candidate.output_level;
  }
  return a.candidate.input_runs < b.candidate.input_runs;
}

std::optional<ScoredCandidate> pick_best(const TreeState& state, const WorkloadMix& mix,
                                         const CostConstants& constants,
                                         const ArceParams& params,
                                         const EnumConfig& enum_config,
                                         const ScoreConfig& score_config,
                                         int* max_elapsed) {
  if (max_elapsed != nullptr) *max_elapsed = 0;
  if (mix.empty()) return std::nullopt;
  std::optional<ScoredCandidate> best;
  for (ScoredCandidate& scored :
       score_all(state, mix, constants, params, enum_config, score_config)) {
    if (max_elapsed != nullptr) *max_elapsed = std::max(*max_elapsed, scored.elapsed);
    if (!best || scored_better(scored, *best)) best = std::move(scored);
  }
  if (best && best->score < 0.0) return std::nullopt;
  return best;
}

std::optional<ArceParams> claim2_params(int run_count, int runs_reduced, int elapsed,
                                        const WorkloadMix& mix,
                                        const CostConstants& constants) {
  if (elapsed < 1) throw std::invalid_argument("elapsed windows must be >= 1");
  if (run_count - runs_reduced - 1 <= 0) return std::nullopt;
  double a = mix.range_lookups + constants.bloom_alpha * mix.point_lookups;
  ArceParams params;
  params.stall_threshold = run_count + elapsed;
  params.long_term_weight = elapsed - 1;
  if (elapsed == 1 || mix.updates <= 0.0) {
    params.stall_penalty_us = 0.0;
  } else {
    // The read terms of the score carry Ir, so k must as well or the
    // stall make-up term cannot offset the read-slowdown difference.
    params.stall_penalty_us = constants.read_block_io_us * a *
                              (run_count - runs_reduced - 1) * (elapsed - 1) /
                              mix.updates;
  }
  return params;
}

}  // namespace flexkv
