#include "flexkv/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "flexkv/cost_model.hpp"

namespace flexkv {

namespace {

constexpr const char* kManifestName = "MANIFEST";

std::string sst_name(std::uint64_t id) { return std::to_string(id) + ".sst"; }

void spin_for_us(double us) {
  const auto until = std::chrono::steady_clock::now() +
                     std::chrono::nanoseconds(static_cast<std::int64_t>(us * 1000.0));
  while (std::chrono::steady_clock::now() < until) {
  }
}

}  // namespace

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kArce: return "arce";
    case PolicyKind::kLeveling: return "leveling";
    case PolicyKind::kTiering: return "tiering";
    case PolicyKind::kLazyLeveling: return "lazy-leveling";
  }
  throw std::invalid_argument("unknown policy kind");
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "arce") return PolicyKind::kArce;
  if (name == "leveling") return PolicyKind::kLeveling;
  if (name == "tiering") return PolicyKind::kTiering;
  if (name == "lazy-leveling" || name == "lazyleveling") return PolicyKind::kLazyLeveling;
  throw std::invalid_argument("unknown policy: " + name);
}

void EngineConfig::validate() const {
  constants.validate();
  if (data_dir.empty()) throw std::invalid_argument("data_dir is required");
  if (policy != PolicyKind::kArce && size_ratio < 2) {
    throw std::invalid_argument("baseline size ratio must be >= 2");
  }
  if (bloom_bits_per_key <= 0) throw std::invalid_argument("bloom bits_per_key must be positive");
  if (stats_period == 0) throw std::invalid_argument("stats_period must be positive");
  search.validate();
}

EngineConfig load_engine_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);

  EngineConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (key == "data_dir") config.data_dir = value.get<std::string>();
    else if (key == "policy") config.policy = parse_policy(value.get<std::string>());
    else if (key == "size_ratio") config.size_ratio = value.get<int>();
    else if (key == "memtable_size") config.constants.memtable_size = value.get<std::uint64_t>();
    else if (key == "entry_size") config.constants.entry_size = value.get<std::uint64_t>();
    else if (key == "block_size") config.constants.block_size = value.get<std::uint64_t>();
    else if (key == "bloom_bits_per_key") config.bloom_bits_per_key = value.get<double>();
    else if (key == "read_block_io_us") config.constants.read_block_io_us = value.get<double>();
    else if (key == "write_block_io_us") config.constants.write_block_io_us = value.get<double>();
    else if (key == "stats_period") config.stats_period = value.get<std::uint64_t>();
    else if (key == "search_workers") config.search.worker_count = value.get<int>();
    else if (key == "simulate_payload") config.simulate_payload = value.get<bool>();
    else if (key == "real_stall") config.real_stall = value.get<bool>();
    else if (key == "rng_seed") config.rng_seed = value.get<std::uint64_t>();
    else if (key == "stall_threshold") config.initial_params.stall_threshold = value.get<int>();
    else if (key == "stall_penalty_us") config.initial_params.stall_penalty_us = value.get<double>();
    else throw std::runtime_error("unknown config key: " + key);
  }
  config.constants.bloom_alpha = bloom_fpr(config.bloom_bits_per_key);
  return config;
}

Engine::Engine(Env& env, EngineConfig config)
    : env_(env), config_(std::move(config)), rng_(config_.rng_seed) {
  if (config_.constants.bloom_alpha <= 0.0) {
    config_.constants.bloom_alpha = bloom_fpr(config_.bloom_bits_per_key);
  }
  config_.validate();
  params_ = config_.initial_params;
  const double u = static_cast<double>(window_update_count(config_.constants));
  mix_ = WorkloadMix{u, u, u};  // balanced prior until the first stats report
  read_stats_ = std::make_shared<SstReader::Stats>();
  recover();
  open_ = true;
}

Engine::~Engine() {
  try {
    close();
  } catch (...) {
  }
}

void Engine::recover() {
  env_.create_dir(config_.data_dir);
  manifest_ = std::make_unique<Manifest>(env_, config_.data_dir + "/" + kManifestName);
  ManifestState state = manifest_->replay();

  next_run_id_ = state.next_run_id;
  next_seq_ = state.last_seq + 1;
  if (state.params) params_ = *state.params;

  std::vector<SortedRun> runs;
  for (const auto& [id, desc] : state.runs) {
    SortedRun run;
    run.id = desc.id;
    run.level = desc.level;
    run.size_bytes = desc.size_bytes;
    run.min_key = desc.min_key;
    run.max_key = desc.max_key;
    run.min_seq = desc.min_seq;
    run.max_seq = desc.max_seq;
    run.file = desc.file;
    runs.push_back(std::move(run));
  }
  tree_.reset(std::move(runs), 4);
  if (auto problem = validate_tree(tree_)) {
    throw std::runtime_error("recovered tree invalid: " + *problem);
  }

  for (const SortedRun* run : runs_newest_first()) {
    if (!run->file.empty()) {
      readers_[run->id] = RunReader{std::make_shared<SstReader>(
          env_, config_.data_dir + "/" + run->file, read_stats_)};
    }
  }

  // Files not named by the manifest are leftovers from a crash between
  // output write and install; drop them.
  for (const std::string& name : env_.list_dir(config_.data_dir)) {
    if (name.size() < 4 || name.substr(name.size() - 4) != ".sst") continue;
    bool referenced = false;
    for (const auto& [id, desc] : state.runs) {
      if (desc.file == name) {
        referenced = true;
        break;
      }
    }
    if (!referenced) env_.remove_file(config_.data_dir + "/" + name);
  }
}

double Engine::charge(double io_us) {
  metrics_.virtual_time_us += io_us;
  return io_us;
}

void Engine::maybe_stall() {
  double penalty = 0.0;
  if (config_.policy == PolicyKind::kArce) {
    if (tree_.run_count() > params_.stall_threshold) penalty = params_.stall_penalty_us;
  } else {
    if (static_cast<int>(tree_.level(0).size()) > config_.baseline_stall_runs &&
        tree_.level_count() > 0) {
      penalty = config_.baseline_stall_us;
    }
  }
  if (penalty > 0.0) {
    ++metrics_.stalled_puts;
    metrics_.stall_time_us += penalty;
    charge(penalty);
    if (config_.real_stall) spin_for_us(penalty);
  }
}

void Engine::write_entry(std::string_view key, std::string_view value, bool tombstone) {
  if (!open_) throw std::logic_error("engine is closed");
  poll_compaction();
  const double start = metrics_.virtual_time_us;
  maybe_stall();

  const std::uint64_t seq = next_seq_++;
  const std::uint64_t added = key.size() + value.size();
  if (config_.simulate_payload) {
    memtable_bytes_ += added;
  } else {
    auto it = memtable_.find(key);
    if (it != memtable_.end()) {
      memtable_bytes_ -= it->first.size() + it->second.value.size();
      it->second = MemEntry{std::string(value), seq, tombstone};
    } else {
      memtable_.emplace(std::string(key), MemEntry{std::string(value), seq, tombstone});
    }
    memtable_bytes_ += added;
  }

  metrics_.user_bytes_written += added;
  if (tombstone) ++metrics_.deletes; else ++metrics_.puts;
  ++metrics_.ops;
  raw_counts_.updates += 1.0;

  if (memtable_bytes_ >= config_.constants.memtable_size) seal_and_flush();
  maybe_report_stats();
  metrics_.last_op_cost_us = metrics_.virtual_time_us - start;
}

void Engine::put(std::string_view key, std::string_view value) {
  write_entry(key, value, false);
}

void Engine::del(std::string_view key) { write_entry(key, "", true); }

void Engine::seal_and_flush() {
  if (memtable_bytes_ == 0) return;
  const CostConstants& cc = config_.constants;

  SortedRun run;
  run.id = next_run_id_;
  run.level = 0;

  std::uint64_t entry_count = 0;
  if (config_.simulate_payload) {
    run.size_bytes = memtable_bytes_;
    run.min_key = "";
    run.max_key = "\xff";
    run.min_seq = next_seq_ > 1 ? next_seq_ - 1 : 1;  // refined below
    entry_count = memtable_bytes_ / cc.entry_size;
    // Seq interval approximated by the flushed update count; exact values
    // are irrelevant without payloads but must keep the tree invariant.
    const std::uint64_t span = std::max<std::uint64_t>(entry_count, 1);
    run.max_seq = next_seq_ - 1;
    run.min_seq = run.max_seq >= span ? run.max_seq - span + 1 : 1;
  } else {
    std::vector<Entry> entries;
    entries.reserve(memtable_.size());
    for (const auto& [key, mem] : memtable_) {
      entries.push_back(Entry{key, mem.value, mem.seq, mem.tombstone});
    }
    const std::string path = config_.data_dir + "/" + sst_name(run.id);
    SstWriteResult written =
        write_sst(env_, path, entries, cc.block_size, config_.bloom_bits_per_key);
    run.size_bytes = written.file_size;
    run.min_key = written.min_key;
    run.max_key = written.max_key;
    run.min_seq = written.min_seq;
    run.max_seq = written.max_seq;
    run.file = sst_name(run.id);
    entry_count = written.entry_count;
  }

  manifest_->log_add(descriptor_for(run, entry_count));
  if (!run.file.empty()) {
    readers_[run.id] = RunReader{std::make_shared<SstReader>(
        env_, config_.data_dir + "/" + run.file, read_stats_)};
  }
  tree_.add_run(run);
  ++next_run_id_;
  if (auto problem = validate_tree(tree_)) {
    throw std::logic_error("tree invalid after flush: " + *problem);
  }

  charge(static_cast<double>(run.size_bytes) / cc.block_size * cc.write_block_io_us);
  memtable_.clear();
  memtable_bytes_ = 0;
  ++metrics_.flushes;
  window_boundary();
}

RunDescriptor Engine::descriptor_for(const SortedRun& run, std::uint64_t entries) const {
  RunDescriptor desc;
  desc.id = run.id;
  desc.level = run.level;
  desc.size_bytes = run.size_bytes;
  desc.file = run.file;
  desc.min_key = run.min_key;
  desc.max_key = run.max_key;
  desc.min_seq = run.min_seq;
  desc.max_seq = run.max_seq;
  desc.entry_count = entries;
  return desc;
}

void Engine::window_boundary() {
  if (running_) {
    ++running_->actual_windows;
    maybe_complete_compaction(false);
  }
  maybe_schedule();
}

// Completes a compaction as soon as the virtual clock covers its I/O and
// chains the next decision, instead of waiting for a window boundary.
// Called between operations, never mid-read.
void Engine::poll_compaction() {
  if (!running_) return;
  if (metrics_.virtual_time_us - running_->start_virtual_us < running_->target_io_us) {
    return;
  }
  maybe_complete_compaction(false);
  maybe_schedule();
}

void Engine::maybe_complete_compaction(bool force) {
  if (!running_) return;
  const double done = metrics_.virtual_time_us - running_->start_virtual_us;
  if (!force && done < running_->target_io_us) return;

  execute_compaction(running_->candidate);
  // A force-completion (close) cuts the compaction short of its I/O
  // target, so its window count is not a meaningful estimate check.
  if (done >= running_->target_io_us) {
    window_log_.push_back(WindowLogEntry{running_->candidate.input_bytes,
                                         running_->estimated_windows,
                                         running_->actual_windows});
  }
  ++metrics_.compactions_completed;
  running_.reset();
}

void Engine::execute_compaction(const CompactionCandidate& candidate) {
  if (config_.simulate_payload) {
    tree_.apply_candidate(candidate, next_run_id_);
    const SortedRun* out = tree_.find_run(next_run_id_);
    manifest_->log_compact(candidate.input_runs,
                           descriptor_for(*out, out->size_bytes / config_.constants.entry_size));
    ++next_run_id_;
    if (auto problem = validate_tree(tree_)) {
      throw std::logic_error("tree invalid after compaction: " + *problem);
    }
    return;
  }

  std::vector<SortedRun> inputs = tree_.collect(candidate.input_runs);
  auto is_input = [&](std::uint64_t id) {
    return std::find(candidate.input_runs.begin(), candidate.input_runs.end(), id) !=
           candidate.input_runs.end();
  };

  // Merge, newest version per key.
  std::map<std::string, Entry> merged;
  for (const SortedRun& run : inputs) {
    auto it = readers_.find(run.id);
    if (it == readers_.end()) throw std::logic_error("missing reader for run");
    for (Entry& e : it->second.reader->range(run.min_key, run.max_key)) {
      auto [pos, inserted] = merged.try_emplace(e.key, e);
      if (!inserted && e.seq > pos->second.seq) pos->second = e;
    }
  }

  // A tombstone is dropped only when nothing older and deeper could still
  // hold the key.
  const int deepest = deepest_nonempty_level(candidate.input_runs);
  std::vector<Entry> entries;
  entries.reserve(merged.size());
  for (auto& [key, e] : merged) {
    if (e.tombstone && candidate.output_level >= deepest) {
      bool shadowed = false;
      for (const SortedRun& run : tree_.all_runs()) {
        if (is_input(run.id) || run.max_seq >= e.seq) continue;
        if (run.min_key <= key && key <= run.max_key) {
          shadowed = true;
          break;
        }
      }
      if (!shadowed) continue;
    }
    entries.push_back(std::move(e));
  }

  std::uint64_t min_seq = UINT64_MAX, max_seq = 0;
  for (const SortedRun& run : inputs) {
    min_seq = std::min(min_seq, run.min_seq);
    max_seq = std::max(max_seq, run.max_seq);
  }

  std::optional<SortedRun> output;
  std::uint64_t entry_count = 0;
  if (!entries.empty()) {
    SortedRun run;
    run.id = next_run_id_;
    run.level = candidate.output_level;
    run.file = sst_name(run.id);
    const std::string path = config_.data_dir + "/" + run.file;
    SstWriteResult written = write_sst(env_, path, entries, config_.constants.block_size,
                                      config_.bloom_bits_per_key);
    run.size_bytes = written.file_size;
    run.min_key = written.min_key;
    run.max_key = written.max_key;
    run.min_seq = min_seq;
    run.max_seq = max_seq;
    entry_count = written.entry_count;
    output = run;
  }

  // Install order: output is durable before the manifest record; input
  // files go last. A crash at any point leaves inputs or output live.
  if (output) {
    manifest_->log_compact(candidate.input_runs, descriptor_for(*output, entry_count));
  } else {
    for (std::uint64_t id : candidate.input_runs) manifest_->log_remove(id);
  }

  std::vector<SortedRun> survivors;
  for (SortedRun& run : tree_.all_runs()) {
    if (!is_input(run.id)) survivors.push_back(std::move(run));
  }
  if (output) survivors.push_back(*output);
  tree_.reset(std::move(survivors), tree_.level_count());
  if (auto problem = validate_tree(tree_)) {
    throw std::logic_error("tree invalid after compaction: " + *problem);
  }
  if (output) {
    readers_[output->id] = RunReader{std::make_shared<SstReader>(
        env_, config_.data_dir + "/" + output->file, read_stats_)};
    ++next_run_id_;
  }
  for (const SortedRun& run : inputs) {
    readers_.erase(run.id);
    if (!run.file.empty()) env_.remove_file(config_.data_dir + "/" + run.file);
  }
}

int Engine::deepest_nonempty_level(const std::vector<std::uint64_t>& excluded) const {
  int deepest = 0;
  for (const SortedRun& run : tree_.all_runs()) {
    if (std::find(excluded.begin(), excluded.end(), run.id) != excluded.end()) continue;
    deepest = std::max(deepest, run.level);
  }
  return deepest;
}

void Engine::maybe_schedule() {
  if (running_ || tree_.run_count() < 2) return;

  std::optional<CompactionCandidate> chosen;
  int estimated = 0;
  if (config_.policy == PolicyKind::kArce) {
    auto best = pick_best(tree_, mix_, config_.constants, params_,
                          config_.search.enum_config, config_.search.score_config);
    if (best) {
      chosen = best->candidate;
      estimated = best->elapsed;
    }
  } else {
    chosen = baseline_trigger(config_.policy, config_.size_ratio, tree_, config_.constants);
    if (chosen) {
      try {
        ArceParams neutral{0.0, std::numeric_limits<int>::max(), 0.0};
        estimated = elapsed_windows(chosen->input_bytes, tree_.run_count(),
                                    config_.constants, mix_, neutral);
      } catch (const std::runtime_error&) {
        estimated = 0;
      }
    }
  }
  if (!chosen) return;

  RunningCompaction rc;
  rc.candidate = *chosen;
  rc.estimated_windows = estimated;
  rc.start_virtual_us = metrics_.virtual_time_us;
  rc.target_io_us = static_cast<double>(chosen->input_bytes) / config_.constants.block_size *
                    (config_.constants.read_block_io_us + config_.constants.write_block_io_us);
  running_ = std::move(rc);
  ++metrics_.compactions_started;
}

std::optional<CompactionCandidate> Engine::peek_decision() {
  if (config_.policy == PolicyKind::kArce) {
    auto best = pick_best(tree_, mix_, config_.constants, params_,
                          config_.search.enum_config, config_.search.score_config);
    if (!best) return std::nullopt;
    return best->candidate;
  }
  return baseline_trigger(config_.policy, config_.size_ratio, tree_, config_.constants);
}

void Engine::inject_stats(const WorkloadMix& raw) {
  const double target_u = static_cast<double>(window_update_count(config_.constants));
  WorkloadMix mix = raw;
  if (raw.updates > 0.0) {
    const double factor = target_u / raw.updates;
    mix.range_lookups *= factor;
    mix.updates = target_u;
    mix.point_lookups *= factor;
  } else if (raw.total() > 0.0) {
    const double factor = 3.0 * target_u / raw.total();
    mix.range_lookups *= factor;
    mix.point_lookups *= factor;
  } else {
    mix = WorkloadMix{target_u, target_u, target_u};
  }
  mix_ = mix;

  if (config_.policy == PolicyKind::kArce) {
    RecomputeSnapshot now{mix_, tree_.total_bytes(), tree_.run_count()};
    const bool due = !last_search_ ||
                     should_recompute(*last_search_, now, config_.search.recompute_threshold);
    if (due) {
      SearchResult result = find_best_params(tree_, mix_, config_.constants, config_.search);
      params_ = result.best_params;
      manifest_->log_params(params_);
      last_search_ = now;
      ++metrics_.param_searches;
      metrics_.search_wall_us += static_cast<double>(result.wall_time.count());
      static const bool log_searches = std::getenv("FLEXKV_SEARCH_LOG") != nullptr;
      if (log_searches) {
        std::fprintf(stderr,
                     "search #%llu: runs=%d bytes=%lluMB mix=%.0f/%.0f/%.0f tuples=%d "
                     "wall=%.1fms best M=%g c=%d k=%g\n",
                     static_cast<unsigned long long>(metrics_.param_searches),
                     tree_.run_count(),
                     static_cast<unsigned long long>(tree_.total_bytes() >> 20),
                     mix_.range_lookups, mix_.updates, mix_.point_lookups,
                     result.tuples_evaluated, result.wall_time.count() / 1000.0,
                     params_.long_term_weight, params_.stall_threshold,
                     params_.stall_penalty_us);
      }
    }
  }
  maybe_complete_compaction(false);
  maybe_schedule();
}

void Engine::maybe_report_stats() {
  ++ops_in_period_;
  if (ops_in_period_ < config_.stats_period) return;
  WorkloadMix raw = raw_counts_;
  raw_counts_ = WorkloadMix{};
  ops_in_period_ = 0;
  inject_stats(raw);
}

std::vector<const SortedRun*> Engine::runs_newest_first() const {
  std::vector<const SortedRun*> runs;
  for (int level = 0; level < tree_.level_count(); ++level) {
    for (const SortedRun& run : tree_.level(level)) runs.push_back(&run);
  }
  std::sort(runs.begin(), runs.end(), [](const SortedRun* a, const SortedRun* b) {
    if (a->max_seq != b->max_seq) return a->max_seq > b->max_seq;
    return a->id > b->id;
  });
  return runs;
}

std::optional<std::string> Engine::get(std::string_view key) {
  if (!open_) throw std::logic_error("engine is closed");
  poll_compaction();
  const double start = metrics_.virtual_time_us;
  const CostConstants& cc = config_.constants;

  ++metrics_.gets;
  ++metrics_.ops;
  raw_counts_.point_lookups += 1.0;

  std::optional<std::string> result;
  if (config_.simulate_payload) {
    // Model: one block for the hit plus a bloom false positive per run.
    const int s = tree_.run_count();
    std::bernoulli_distribution fp(cc.bloom_alpha);
    std::uint64_t blocks = s > 0 ? 1 : 0;
    for (int i = 0; i < s; ++i) {
      if (fp(rng_)) ++blocks;
    }
    metrics_.data_block_reads += blocks;
    charge(static_cast<double>(blocks) * cc.read_block_io_us);
  } else {
    bool done = false;
    auto it = memtable_.find(key);
    if (it != memtable_.end()) {
      if (!it->second.tombstone) result = it->second.value;
      done = true;
    }
    if (!done) {
      const std::uint64_t before = read_stats_->data_block_reads.load();
      std::optional<Entry> best;
      for (const SortedRun* run : runs_newest_first()) {
        if (best && best->seq >= run->max_seq) break;
        if (key < run->min_key || key > run->max_key) continue;
        auto reader = readers_.find(run->id);
        if (reader == readers_.end()) continue;
        std::optional<Entry> hit = reader->second.reader->get(key);
        if (hit && (!best || hit->seq > best->seq)) best = std::move(hit);
      }
      const std::uint64_t blocks = read_stats_->data_block_reads.load() - before;
      metrics_.data_block_reads += blocks;
      charge(static_cast<double>(blocks) * cc.read_block_io_us);
      if (best && !best->tombstone) result = best->value;
    }
  }

  maybe_report_stats();
  metrics_.last_op_cost_us = metrics_.virtual_time_us - start;
  return result;
}

std::vector<std::pair<std::string, std::string>> Engine::scan(std::string_view start,
                                                              std::string_view end) {
  if (!open_) throw std::logic_error("engine is closed");
  if (end < start) throw std::invalid_argument("scan start must not exceed end");
  poll_compaction();
  const double begin_us = metrics_.virtual_time_us;
  const CostConstants& cc = config_.constants;

  ++metrics_.scans;
  ++metrics_.ops;
  raw_counts_.range_lookups += 1.0;

  std::vector<std::pair<std::string, std::string>> out;
  if (config_.simulate_payload) {
    const int s = tree_.run_count();
    metrics_.data_block_reads += static_cast<std::uint64_t>(s);
    charge(static_cast<double>(s) * cc.read_block_io_us);
  } else {
    const std::uint64_t before = read_stats_->data_block_reads.load();
    std::map<std::string, Entry> best;
    auto offer = [&](Entry e) {
      auto [pos, inserted] = best.try_emplace(e.key, std::move(e));
      if (!inserted && pos->second.seq < e.seq) pos->second = std::move(e);
    };
    for (const SortedRun* run : runs_newest_first()) {
      if (run->max_key < start || run->min_key > end) continue;
      auto reader = readers_.find(run->id);
      if (reader == readers_.end()) continue;
      for (Entry& e : reader->second.reader->range(start, end)) offer(std::move(e));
    }
    for (auto it = memtable_.lower_bound(start); it != memtable_.end() && it->first <= end;
         ++it) {
      offer(Entry{it->first, it->second.value, it->second.seq, it->second.tombstone});
    }
    for (auto& [key, e] : best) {
      if (!e.tombstone) out.emplace_back(key, std::move(e.value));
    }
    const std::uint64_t blocks = read_stats_->data_block_reads.load() - before;
    metrics_.data_block_reads += blocks;
    charge(static_cast<double>(blocks) * cc.read_block_io_us);
  }

  maybe_report_stats();
  metrics_.last_op_cost_us = metrics_.virtual_time_us - begin_us;
  return out;
}

std::vector<std::pair<std::string, std::string>> Engine::scan_n(std::string_view start,
                                                                std::size_t limit) {
  if (!open_) throw std::logic_error("engine is closed");
  if (limit == 0) return {};
  std::string end(1, '\xff');
  while (end.size() < 32) end.push_back('\xff');
  auto all = scan(start, end);
  if (all.size() > limit) all.resize(limit);
  return all;
}

void Engine::flush() {
  if (!open_) throw std::logic_error("engine is closed");
  seal_and_flush();
}

void Engine::close() {
  if (!open_) return;
  seal_and_flush();
  maybe_complete_compaction(true);
  manifest_->log_seq(next_seq_ - 1);
  open_ = false;
}

std::optional<CompactionCandidate> baseline_trigger(PolicyKind policy, int size_ratio,
                                                    const TreeState& state,
                                                    const CostConstants& constants) {
  if (policy == PolicyKind::kArce) return std::nullopt;
  const int levels = state.level_count();

  auto make = [&](std::vector<const SortedRun*> inputs, int output_level,
                  CompactionPattern pattern) {
    CompactionCandidate c;
    for (const SortedRun* run : inputs) {
      c.input_runs.push_back(run->id);
      c.input_bytes += run->size_bytes;
    }
    std::sort(c.input_runs.begin(), c.input_runs.end());
    c.output_level = output_level;
    c.runs_reduced = static_cast<int>(c.input_runs.size()) - 1;
    c.pattern = pattern;
    return c;
  };

  if (policy == PolicyKind::kLeveling) {
    // Level 0 is the flush landing zone: any run there spills into level
    // 1; deeper levels spill when bytes exceed T^i * F.
    for (int i = 0; i < levels; ++i) {
      std::uint64_t bytes = 0;
      for (const SortedRun& run : state.level(i)) bytes += run.size_bytes;
      double capacity = i == 0 ? 0.0 : static_cast<double>(constants.memtable_size);
      for (int j = 0; j < i; ++j) capacity *= size_ratio;
      if (static_cast<double>(bytes) <= capacity || bytes == 0) continue;
      std::vector<const SortedRun*> inputs;
      for (const SortedRun& run : state.level(i)) inputs.push_back(&run);
      if (i + 1 < levels) {
        for (const SortedRun& run : state.level(i + 1)) inputs.push_back(&run);
      }
      return make(std::move(inputs), i + 1, CompactionPattern::kAdjacentLevel);
    }
    return std::nullopt;
  }

  int deepest = -1;
  for (int i = 0; i < levels; ++i) {
    if (!state.level(i).empty()) deepest = i;
  }
  if (policy == PolicyKind::kLazyLeveling && deepest >= 0 &&
      state.level(deepest).size() >= 2) {
    std::vector<const SortedRun*> inputs;
    for (const SortedRun& run : state.level(deepest)) inputs.push_back(&run);
    return make(std::move(inputs), deepest, CompactionPattern::kIntraLevel);
  }

  for (int i = 0; i < levels; ++i) {
    if (policy == PolicyKind::kLazyLeveling && i == deepest) continue;
    const auto& level = state.level(i);
    if (static_cast<int>(level.size()) < size_ratio) continue;
    std::vector<const SortedRun*> inputs;
    for (int j = 0; j < size_ratio; ++j) inputs.push_back(&level[j]);
    return make(std::move(inputs), i + 1, CompactionPattern::kAdjacentLevel);
  }
  return std::nullopt;
}

}  // namespace flexkv
