#include "flexkv/oracle.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace flexkv {

namespace {

struct WorkingTree {
  TreeState state;
  std::uint64_t next_id = 1;
  std::uint64_t next_seq = 1;

  explicit WorkingTree(const TreeState& initial) : state(initial) {
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
    run.max_key = "\xff";
    run.min_seq = run.max_seq = next_seq++;
    state.add_run(std::move(run));
  }
};

double window_total(const TinyInstance& instance, int run_count, std::size_t window) {
  if (window >= instance.schedule.size()) return 0.0;
  return window_breakdown(run_count, instance.constants, instance.schedule[window],
                          instance.stall)
      .total();
}

// Elapsed windows for a compaction started at `start` under the
// per-window schedule; returns 0 when it cannot finish by the horizon.
int schedule_elapsed(const TinyInstance& instance, std::uint64_t bytes, int run_count,
                     std::size_t start, double* accrued_out) {
  const std::size_t horizon = instance.schedule.size();
  const double target = static_cast<double>(bytes) / instance.constants.block_size *
                        (instance.constants.read_block_io_us +
                         instance.constants.write_block_io_us);
  double accrued = 0.0;
  for (int t = 1; start + t <= horizon; ++t) {
    accrued += window_total(instance, run_count + t - 1, start + t - 1);
    if (accrued >= target) {
      if (accrued_out != nullptr) *accrued_out = accrued;
      return t;
    }
  }
  return 0;
}

std::string canonical_key(std::size_t window, const TreeState& state) {
  std::vector<std::pair<int, std::uint64_t>> runs;
  for (const auto& run : state.all_runs()) runs.emplace_back(run.level, run.size_bytes);
  std::sort(runs.begin(), runs.end());
  std::ostringstream key;
  key << window;
  for (const auto& [level, size] : runs) key << '|' << level << ':' << size;
  return key.str();
}

EnumConfig enum_config_for(const TinyInstance& instance) {
  EnumConfig config;
  config.max_levels = std::max(instance.initial.level_count(), 1);
  return config;
}

struct Searcher {
  const TinyInstance& instance;
  EnumConfig enum_config;
  std::size_t budget;
  std::map<std::string, double> memo;

  Searcher(const TinyInstance& inst, std::size_t state_budget)
      : instance(inst), enum_config(enum_config_for(inst)), budget(state_budget) {}

  // Minimum total cost over the remaining windows.
  double best_cost(std::size_t window, const WorkingTree& tree) {
    if (window >= instance.schedule.size()) return 0.0;
    std::string key = canonical_key(window, tree.state);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    if (memo.size() >= budget) {
      throw std::runtime_error("oracle state budget exceeded: " +
                               std::to_string(memo.size()) + " states");
    }
    memo.emplace(key, 0.0);  // placeholder, overwritten below

    double best = std::numeric_limits<double>::infinity();
    // No-compaction: one window, one flush arrival.
    {
      WorkingTree next = tree;
      double cost = window_total(instance, next.state.run_count(), window);
      next.flush(instance.constants.memtable_size);
      best = cost + best_cost(window + 1, next);
    }
    for (const auto& candidate : all_candidates(tree.state, enum_config)) {
      double accrued = 0.0;
      int t = schedule_elapsed(instance, candidate.input_bytes, tree.state.run_count(),
                               window, &accrued);
      if (t == 0) continue;
      WorkingTree next = tree;
      next.state.apply_candidate(candidate, next.next_id++);
      for (int i = 0; i < t; ++i) next.flush(instance.constants.memtable_size);
      best = std::min(best, accrued + best_cost(window + t, next));
    }
    memo[key] = best;
    return best;
  }
};

}  // namespace

OracleResult optimal_sequence(const TinyInstance& instance, std::size_t state_budget) {
  if (instance.schedule.empty()) throw std::invalid_argument("empty schedule");
  Searcher searcher(instance, state_budget);
  WorkingTree root(instance.initial);
  double best = searcher.best_cost(0, root);

  OracleResult result;
  result.total_cost = best;
  for (const auto& mix : instance.schedule) result.total_ops += mix.total();
  result.average_cost = result.total_ops > 0 ? best / result.total_ops : 0.0;
  result.states_explored = searcher.memo.size();

  // Re-walk the memo to extract one argmin sequence.
  WorkingTree tree(instance.initial);
  std::size_t window = 0;
  const double slack = 1e-9;
  while (window < instance.schedule.size()) {
    double remaining = searcher.best_cost(window, tree);
    SequenceStep step;
    bool taken = false;
    for (const auto& candidate : all_candidates(tree.state, searcher.enum_config)) {
      double accrued = 0.0;
      int t = schedule_elapsed(instance, candidate.input_bytes, tree.state.run_count(),
                               window, &accrued);
      if (t == 0) continue;
      WorkingTree next = tree;
      next.state.apply_candidate(candidate, next.next_id++);
      for (int i = 0; i < t; ++i) next.flush(instance.constants.memtable_size);
      if (accrued + searcher.best_cost(window + t, next) <= remaining + slack) {
        step.compacted = true;
        step.input_runs = candidate.input_runs;
        step.output_level = candidate.output_level;
        step.elapsed = t;
        step.runs_reduced = candidate.runs_reduced;
        step.cost = accrued;
        tree = std::move(next);
        window += t;
        taken = true;
        break;
      }
    }
    if (!taken) {
      step.cost = window_total(instance, tree.state.run_count(), window);
      tree.flush(instance.constants.memtable_size);
      window += 1;
    }
    result.sequence.push_back(std::move(step));
  }
  return result;
}

ArceTraceResult arce_trace(const TinyInstance& instance, const SearchConfig& config) {
  SearchConfig local = config;
  local.enum_config = enum_config_for(instance);
  ArceTraceResult result;
  WorkingTree tree(instance.initial);
  std::size_t window = 0;
  const std::size_t horizon = instance.schedule.size();

  while (window < horizon) {
    const WorkloadMix& mix = instance.schedule[window];
    const int s = tree.state.run_count();
    SequenceStep step;

    std::optional<std::pair<CompactionCandidate, double>> best;  // candidate, accrued
    double best_score = 0.0;
    int best_t = 0;
    if (!mix.empty()) {
      ArceParams params =
          find_best_params(tree.state, mix, instance.constants, local).best_params;
      for (const auto& candidate : all_candidates(tree.state, local.enum_config)) {
        double accrued = 0.0;
        int t = schedule_elapsed(instance, candidate.input_bytes, s, window, &accrued);
        if (t == 0) continue;
        double score = params.long_term_weight *
                           long_term_effect(candidate.runs_reduced, mix,
                                            instance.constants) -
                       short_term_effect(s, t, mix, instance.constants, params);
        bool wins = false;
        if (!best) {
          wins = score >= 0.0;
        } else if (score > best_score) {
          wins = true;
        } else if (score == best_score && t < best_t) {
          wins = true;
        }
        if (wins) {
          best = std::make_pair(candidate, accrued);
          best_score = score;
          best_t = t;
        }
      }
    }

    if (best) {
      const auto& [candidate, accrued] = *best;
      step.compacted = true;
      step.input_runs = candidate.input_runs;
      step.output_level = candidate.output_level;
      step.elapsed = best_t;
      step.runs_reduced = candidate.runs_reduced;
      step.cost = accrued;
      tree.state.apply_candidate(candidate, tree.next_id++);
      for (int i = 0; i < best_t; ++i) tree.flush(instance.constants.memtable_size);
      window += best_t;
    } else {
      step.cost = window_total(instance, s, window);
      tree.flush(instance.constants.memtable_size);
      window += 1;
    }
    result.total_cost += step.cost;
    result.sequence.push_back(std::move(step));
  }

  double total_ops = 0.0;
  for (const auto& mix : instance.schedule) total_ops += mix.total();
  result.average_cost = total_ops > 0 ? result.total_cost / total_ops : 0.0;
  return result;
}

double approximation_ratio(const OracleResult& optimal, const ArceTraceResult& arce) {
  if (optimal.average_cost <= 1e-12) {
    return arce.average_cost <= 1e-12 ? 1.0
                                      : std::numeric_limits<double>::infinity();
  }
  return arce.average_cost / optimal.average_cost;
}

std::vector<TinyInstance> load_instances(std::istream& in) {
  std::vector<TinyInstance> out;
  TinyInstance current;
  std::string line;
  bool open = false;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string tag;
    if (!(row >> tag) || tag[0] == '#') continue;
    if (tag == "instance") {
      current = TinyInstance{};
      row >> current.name;
      open = true;
    } else if (tag == "run") {
      SortedRun run;
      row >> run.level >> run.size_bytes;
      run.id = current.initial.run_count() + 1;
      run.max_key = "\xff";
      // Deeper levels hold older data; ids are assigned newest-first here.
      run.min_seq = run.max_seq = 1000000 - static_cast<std::uint64_t>(run.level) * 1000 -
                                  run.id;
      current.initial.add_run(std::move(run));
    } else if (tag == "window") {
      WorkloadMix mix;
      row >> mix.range_lookups >> mix.updates >> mix.point_lookups;
      current.schedule.push_back(mix);
    } else if (tag == "constants") {
      row >> current.constants.read_block_io_us >> current.constants.write_block_io_us >>
          current.constants.block_size >> current.constants.memtable_size >>
          current.constants.entry_size >> current.constants.bloom_alpha;
    } else if (tag == "stall") {
      row >> current.stall.stall_threshold >> current.stall.stall_penalty_us;
    } else if (tag == "end") {
      if (open) out.push_back(std::move(current));
      open = false;
    }
  }
  return out;
}

void save_instances(std::ostream& out, const std::vector<TinyInstance>& instances) {
  for (const auto& instance : instances) {
    out << "instance " << instance.name << '\n';
    for (const auto& run : instance.initial.all_runs()) {
      out << "run " << run.level << ' ' << run.size_bytes << '\n';
    }
    for (const auto& mix : instance.schedule) {
      out << "window " << mix.range_lookups << ' ' << mix.updates << ' '
          << mix.point_lookups << '\n';
    }
    const auto& c = instance.constants;
    out << "constants " << c.read_block_io_us << ' ' << c.write_block_io_us << ' '
        << c.block_size << ' ' << c.memtable_size << ' ' << c.entry_size << ' '
        << c.bloom_alpha << '\n';
    out << "stall " << instance.stall.stall_threshold << ' '
        << instance.stall.stall_penalty_us << '\n';
    out << "end\n";
  }
}

}  // namespace flexkv
