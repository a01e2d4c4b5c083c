#pragma once

#include <optional>
#include <vector>

#include "flexkv/candidates.hpp"
#include "flexkv/cost_model.hpp"
#include "flexkv/types.hpp"

namespace flexkv {

struct ScoredCandidate {
  CompactionCandidate candidate;
  int elapsed = 0;        // t
  double short_term = 0;  // E_s
  double long_term = 0;   // E_l
  double score = 0;       // M * E_l - E_s
};

struct ScoreConfig {
  // Amdahl adjustment for multiple foreground threads; disabled at one core.
  double parallel_fraction = 0.5;  // phi
  int foreground_cores = 1;        // eta
  // Dropped when more than one background worker is free.
  bool include_stall_penalty = true;
};

// E_s(s,t) = Ir * t * (r + alpha*p) + u*k * max(0, s + t - c)
double short_term_effect(int run_count, int elapsed, const WorkloadMix& mix,
                         const CostConstants& constants, const ArceParams& params,
                         bool include_stall_penalty = true);

// E_l(y) = (r + alpha*p) * Ir * y
double long_term_effect(int runs_reduced, const WorkloadMix& mix,
                        const CostConstants& constants);

ScoredCandidate effectiveness(const CompactionCandidate& candidate, int run_count,
                              const WorkloadMix& mix, const CostConstants& constants,
                              const ArceParams& params, const ScoreConfig& config = {});

// Scores every enumerated candidate, sharing one cumulative-cost table
// across the t computations. Bit-identical to per-candidate effectiveness.
std::vector<ScoredCandidate> score_all(const TreeState& state, const WorkloadMix& mix,
                                       const CostConstants& constants,
                                       const ArceParams& params,
                                       const EnumConfig& enum_config,
                                       const ScoreConfig& score_config = {});

// Same scoring for an already-enumerated candidate list (the searcher
// caches enumerations across simulations).
std::vector<ScoredCandidate> score_candidates(
    const std::vector<CompactionCandidate>& candidates, int run_count,
    const WorkloadMix& mix, const CostConstants& constants, const ArceParams& params,
    const ScoreConfig& score_config = {});

// The pick_best ordering: higher score, then smaller t, smaller X, lower
// output level, run-id list.
bool scored_better(const ScoredCandidate& a, const ScoredCandidate& b);

// Argmax over a candidate list without materializing per-candidate
// scores; index is -1 when the list is empty. Same arithmetic and tie
// order as score_candidates + scored_better. cum_scratch carries the
// cumulative-cost buffer across calls to avoid reallocation.
struct ScoredPick {
  int index = -1;
  int elapsed = 0;
  double short_term = 0;
  double long_term = 0;
  double score = 0;
  int max_elapsed = 0;  // largest t over all candidates
};
ScoredPick pick_scored_index(const std::vector<CompactionCandidate>& candidates,
                             int run_count, const WorkloadMix& mix,
                             const CostConstants& constants, const ArceParams& params,
                             const ScoreConfig& score_config,
                             std::vector<double>& cum_scratch);

// Same argmax over a flat CandidateList; index refers into list.entries.
ScoredPick pick_scored_entry(const CandidateList& list, int run_count,
                             const WorkloadMix& mix, const CostConstants& constants,
                             const ArceParams& params, const ScoreConfig& score_config,
                             std::vector<double>& cum_scratch);

// Keeps the left frontier in (t, y): drops B whenever some A has
// y_A >= y_B and t_A < t_B.
std::vector<ScoredCandidate> dominating_filter(std::vector<ScoredCandidate> scored);

// Enumerates, scores, and returns the argmax-score candidate, or nothing
// when no candidate scores >= 0 (no compaction is always available).
// Ties break by smaller t, then smaller X, then lower output level.
// max_elapsed, when given, receives the largest t over all candidates.
std::optional<ScoredCandidate> pick_best(const TreeState& state, const WorkloadMix& mix,
                                         const CostConstants& constants,
                                         const ArceParams& params,
                                         const EnumConfig& enum_config,
                                         const ScoreConfig& score_config = {},
                                         int* max_elapsed = nullptr);

// Constructive parameters making a non-dominated candidate with (s, y, t)
// the score argmax: c = s + t, k = a*(s-y-1)*(t-1)/u, M = t - 1 with
// a = r + alpha*p. Inapplicable when s - y - 1 <= 0 (returns nothing).
std::optional<ArceParams> claim2_params(int run_count, int runs_reduced, int elapsed,
                                        const WorkloadMix& mix,
                                        const CostConstants& constants);

}  // namespace flexkv
