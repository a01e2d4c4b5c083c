#include "flexkv/param_search.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <limits>
#include <cmath>
#include <cstring>
#include <thread>
#include <unordered_map>

namespace flexkv {

void SearchConfig::validate() const {
  if (m_step < 1 || c_step < 1) throw std::invalid_argument("grid steps must be positive");
  if (k_candidates.empty()) throw std::invalid_argument("k grid must be nonempty");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  if (recompute_threshold <= 0.0 || recompute_threshold >= 1.0) {
    throw std::invalid_argument("recompute threshold must lie in (0,1)");
  }
  if (worker_count < 1) throw std::invalid_argument("worker_count must be positive");
  enum_config.validate();
}

namespace {

struct SimTree {
  TreeState state;
  std::uint64_t next_id = 1;
  std::uint64_t next_seq = 1;

  explicit SimTree(const TreeState& initial) : state(initial) {
    for (const auto& run : initial.all_runs()) {
      next_id = std::max(next_id, run.id + 1);
      next_seq = std::max(next_seq, run.max_seq + 1);
    }
  }

  void flush(std::uint64_t size) {
    SortedRun run;
    run.id = next_id++;
    run.level = 0;
    run.size_bytes = size;
    run.min_key = "";
    run.max_key = "\xff";
    run.min_seq = run.max_seq = next_seq++;
    state.add_run(std::move(run));
  }
};

std::string canonical_state(const TreeState& state) {
  std::vector<std::pair<int, std::uint64_t>> runs;
  runs.reserve(static_cast<std::size_t>(state.run_count()));
  for (int level = 0; level < state.level_count(); ++level) {
    for (const SortedRun& run : state.level(level)) {
      runs.emplace_back(level, run.size_bytes);
    }
  }
  std::sort(runs.begin(), runs.end());
  std::string out;
  out.reserve(runs.size() * 12);
  for (const auto& [level, size] : runs) {
    char buf[12];
    std::memcpy(buf, &level, 4);
    std::memcpy(buf + 4, &size, 8);
    out.append(buf, 12);
  }
  return out;
}

struct CycleMark {
  int iteration = 0;
  double total_cost = 0.0;
  double total_ops = 0.0;
};

// Decisions are a pure function of the run multiset, so once a state
// repeats the whole tail repeats; the skipped cycles contribute exactly
// cycle_cost per cycle. Disabled when a trace is requested.
constexpr int kIdleStreakCutoff = 100;

SimulationResult simulate_internal(const TreeState& state, const WorkloadMix& mix,
                                   const CostConstants& constants, const ArceParams& params,
                                   int max_iter, const EnumConfig& enum_config,
                                   const ScoreConfig& score_config, bool keep_trace) {
  if (max_iter < 1) throw std::invalid_argument("empty simulation");
  if (mix.empty()) throw std::invalid_argument("mix must have a positive component");

  SimTree sim(state);
  SimulationResult result;
  result.low_pressure = std::numeric_limits<int>::max();
  const double ops_per_window = mix.total();
  const double stall_slope =
      score_config.include_stall_penalty ? mix.updates * params.stall_penalty_us : 0.0;

  std::unordered_map<std::string, CycleMark> seen;
  bool fast_forwarded = false;
  int idle_streak = 0;
  std::vector<double> cum_scratch;
  CandidateList candidates;

  for (int iter = 0; iter < max_iter; ++iter) {
    const int s = sim.state.run_count();
    DecisionRecord record;
    record.iteration = iter;
    record.run_count_before = s;

    const bool track = !keep_trace && !fast_forwarded && idle_streak < kIdleStreakCutoff;
    if (track) {
      auto [mark, inserted] = seen.try_emplace(canonical_state(sim.state),
                                               CycleMark{iter, result.total_cost,
                                                         result.total_ops});
      if (!inserted) {
        const int cycle_iters = iter - mark->second.iteration;
        const double cycle_cost = result.total_cost - mark->second.total_cost;
        const double cycle_ops = result.total_ops - mark->second.total_ops;
        const int cycles = (max_iter - iter) / cycle_iters;
        result.total_cost += cycles * cycle_cost;
        result.total_ops += cycles * cycle_ops;
        iter += cycles * cycle_iters;
        fast_forwarded = true;
        if (iter >= max_iter) break;
      }
    }

    ScoredPick pick;
    int max_elapsed = 0;
    if (idle_streak < kIdleStreakCutoff) {
      // Past the cutoff a policy idle on a monotonically growing tree is
      // taken to stay idle; remaining windows accrue no-compaction cost.
      all_candidates_into(sim.state, enum_config, candidates);
      pick = pick_scored_entry(candidates, s, mix, constants, params, score_config,
                               cum_scratch);
      max_elapsed = pick.max_elapsed;
      if (pick.score < 0.0) pick.index = -1;
    }
    const bool chosen = pick.index >= 0;
    if (idle_streak < kIdleStreakCutoff) {
      // Validity bound for the low-c collapse: at or below s - 1 every
      // score shifts by stall_slope per unit of c, so an idle decision
      // holds up to just under its sign-flip threshold.
      int bound = s - 1;
      if (!chosen && !candidates.entries.empty() && stall_slope > 0.0 &&
          pick.score < 0.0) {
        const double needed = -pick.score / stall_slope;
        if (needed < 1e9) {
          bound = std::min(bound, params.stall_threshold +
                                      static_cast<int>(std::floor(needed - 1e-9)));
        }
      }
      result.low_pressure = std::min(result.low_pressure, bound);
    }
    idle_streak = chosen ? 0 : idle_streak + 1;

    if (chosen) {
      CompactionCandidate candidate = candidates.materialize(candidates.entries[pick.index]);
      const int t = pick.elapsed;
      record.compacted = true;
      record.elapsed = t;
      record.runs_reduced = candidate.runs_reduced;
      record.accrued_cost = window_cost_f(s, t, constants, mix, params);
      sim.state.apply_candidate(candidate, sim.next_id++);
      record.input_runs = std::move(candidate.input_runs);
      for (int i = 0; i < t; ++i) sim.flush(constants.memtable_size);
    } else {
      record.accrued_cost = window_cost_f(s, 1, constants, mix, params);
      sim.flush(constants.memtable_size);
    }
    result.total_cost += record.accrued_cost;
    result.total_ops += record.elapsed * ops_per_window;
    result.max_pressure =
        std::max(result.max_pressure, s + std::max(max_elapsed, record.elapsed));
    if (keep_trace) result.trace.push_back(std::move(record));
  }
  result.average_cost = result.total_ops > 0 ? result.total_cost / result.total_ops : 0.0;
  return result;
}

}  // namespace

SimulationResult simulate_policy(const TreeState& state, const WorkloadMix& mix,
                                 const CostConstants& constants, const ArceParams& params,
                                 int max_iter, const EnumConfig& enum_config,
                                 const ScoreConfig& score_config, bool keep_trace) {
  return simulate_internal(state, mix, constants, params, max_iter, enum_config,
                           score_config, keep_trace);
}

namespace {

// Smallest grid M that makes the maximal-y frontier candidate the argmax
// under a stall-free scoring (score differences reduce to M*y - t there).
double frontier_m_cap(const TreeState& state, const WorkloadMix& mix,
                      const CostConstants& constants, const SearchConfig& config) {
  ArceParams stall_free;
  stall_free.stall_threshold = 4 * std::max(state.run_count(), 1) + 64;
  stall_free.stall_penalty_us = 0.0;

  std::vector<ScoredCandidate> scored;
  for (const auto& candidate : all_candidates(state, config.enum_config)) {
    scored.push_back(effectiveness(candidate, state.run_count(), mix, constants,
                                   stall_free, config.score_config));
  }
  std::vector<ScoredCandidate> frontier = dominating_filter(std::move(scored));
  if (frontier.empty()) return 0.0;

  const ScoredCandidate* top = &frontier.front();
  for (const auto& c : frontier) {
    if (c.candidate.runs_reduced > top->candidate.runs_reduced ||
        (c.candidate.runs_reduced == top->candidate.runs_reduced &&
         c.elapsed < top->elapsed)) {
      top = &c;
    }
  }
  // Beating every lower-y frontier member, plus the positivity threshold
  // M*E_l >= E_s so the winner is actually scheduled.
  double needed =
      static_cast<double>(top->elapsed) / top->candidate.runs_reduced;
  for (const auto& c : frontier) {
    int dy = top->candidate.runs_reduced - c.candidate.runs_reduced;
    if (dy <= 0) continue;
    needed = std::max(needed, static_cast<double>(top->elapsed - c.elapsed) / dy);
  }
  return needed;
}

}  // namespace

SearchResult find_best_params(const TreeState& state, const WorkloadMix& mix,
                              const CostConstants& constants, const SearchConfig& config) {
  config.validate();
  auto start = std::chrono::steady_clock::now();

  double m_cap = frontier_m_cap(state, mix, constants, config);
  std::vector<double> m_values;
  for (double m = 0.0;; m += config.m_step) {
    m_values.push_back(m);
    if (m >= m_cap) break;
  }
  std::vector<int> c_values;
  const int c_cap = 4 * std::max(state.run_count(), 1);
  for (int c = 1; c < c_cap; c += config.c_step) c_values.push_back(c);
  if (c_values.empty()) c_values.push_back(1);

  std::vector<ArceParams> grid;
  for (double m : m_values) {
    for (int c : c_values) {
      for (double k : config.k_candidates) {
        grid.push_back(ArceParams{m, c, k});
      }
    }
  }

  // Tuples sharing (M, k) differ only in the stall threshold. The widest
  // c in a group is simulated first; any c at or above the run-count
  // pressure that run reached sees identical scores throughout, so its
  // cost is copied. M = 0 under read-weighted traffic never schedules
  // anything (every score is a negated positive E_s), so that row is the
  // idle trajectory, accrued with the same summation order as the loop.
  // Groups are claimed atomically and costs are indexed, so worker count
  // does not affect the result.
  const std::size_t k_count = config.k_candidates.size();
  const std::size_t c_count = c_values.size();
  const double read_weight =
      mix.range_lookups + constants.bloom_alpha * mix.point_lookups;
  const bool zero_m_idles = read_weight > 0.0 && constants.read_block_io_us > 0.0;
  // Without read traffic every long-term effect is zero, so M cancels out
  // of both scores and window costs: one M row covers the whole column.
  const bool m_irrelevant = !zero_m_idles;
  const std::size_t group_count = (m_irrelevant ? 1 : m_values.size()) * k_count;
  const double ops_per_window = mix.total();
  const int s0 = state.run_count();

  std::vector<double> costs(grid.size(), 0.0);
  std::atomic<std::size_t> next_group{0};
  auto evaluate = [&] {
    for (std::size_t g = next_group.fetch_add(1); g < group_count;
         g = next_group.fetch_add(1)) {
      const std::size_t mi = g / k_count;
      const std::size_t ki = g % k_count;
      auto index_of = [&](std::size_t ci) { return (mi * c_count + ci) * k_count + ki; };

      if (m_values[mi] == 0.0 && zero_m_idles) {
        for (std::size_t ci = 0; ci < c_count; ++ci) {
          const ArceParams& params = grid[index_of(ci)];
          double cost = 0.0;
          double ops = 0.0;
          for (int i = 0; i < config.max_iter; ++i) {
            cost += window_cost_f(s0 + i, 1, constants, mix, params);
            ops += ops_per_window;
          }
          costs[index_of(ci)] = ops > 0 ? cost / ops : 0.0;
        }
        continue;
      }

      SimulationResult widest =
          simulate_internal(state, mix, constants, grid[index_of(c_count - 1)],
                            config.max_iter, config.enum_config, config.score_config,
                            /*keep_trace=*/false);
      std::optional<SimulationResult> lowest;
      for (std::size_t ci = 0; ci < c_count; ++ci) {
        const std::size_t i = index_of(ci);
        if (ci == c_count - 1 || c_values[ci] >= widest.max_pressure) {
          costs[i] = widest.average_cost;
          continue;
        }
        if (!lowest) {
          lowest = simulate_internal(state, mix, constants, grid[index_of(0)],
                                     config.max_iter, config.enum_config,
                                     config.score_config, /*keep_trace=*/false);
        }
        if (ci == 0 || c_values[ci] <= lowest->low_pressure) {
          costs[i] = lowest->average_cost;
        } else {
          costs[i] = simulate_internal(state, mix, constants, grid[i], config.max_iter,
                                       config.enum_config, config.score_config,
                                       /*keep_trace=*/false)
                         .average_cost;
        }
      }
    }
  };
  const int workers = std::min<int>(config.worker_count, static_cast<int>(group_count));
  if (workers <= 1) {
    evaluate();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(evaluate);
    for (auto& t : pool) t.join();
  }
  if (m_irrelevant) {
    for (std::size_t mi = 1; mi < m_values.size(); ++mi) {
      for (std::size_t ci = 0; ci < c_count; ++ci) {
        for (std::size_t ki = 0; ki < k_count; ++ki) {
          costs[(mi * c_count + ci) * k_count + ki] = costs[ci * k_count + ki];
        }
      }
    }
  }

  SearchResult result;
  result.tuples_evaluated = static_cast<int>(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (costs[i] < costs[best]) best = i;  // grid order is (M, c, k) ascending
  }
  result.best_params = grid[best];
  result.best_avg_cost = costs[best];
  result.wall_time = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - start);
  return result;
}

namespace {

bool drifted(double old_value, double new_value, double threshold) {
  const double eps = 1.0;  // one operation, guards zero baselines
  return std::abs(new_value - old_value) / std::max(old_value, eps) > threshold;
}

}  // namespace

bool should_recompute(const RecomputeSnapshot& prev, const RecomputeSnapshot& current,
                      double threshold) {
  auto ratios = [](const WorkloadMix& mix) {
    double total = mix.total();
    if (total <= 0.0) return std::array<double, 3>{0.0, 0.0, 0.0};
    return std::array<double, 3>{mix.range_lookups / total, mix.updates / total,
                                 mix.point_lookups / total};
  };
  auto prev_ratios = ratios(prev.mix);
  auto cur_ratios = ratios(current.mix);
  for (int i = 0; i < 3; ++i) {
    if (drifted(prev_ratios[i], cur_ratios[i], threshold)) return true;
  }
  if (drifted(static_cast<double>(prev.total_bytes),
              static_cast<double>(current.total_bytes), threshold)) {
    return true;
  }
  return drifted(prev.run_count, current.run_count, threshold);
}

}  // namespace flexkv
