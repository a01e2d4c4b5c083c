#include "flexkv/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flexkv {

namespace {

double percentile(std::vector<double>& window, double q) {
  if (window.empty()) return 0.0;
  std::sort(window.begin(), window.end());
  const auto idx = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(window.size()))) - 1;
  return window[std::min(idx, window.size() - 1)];
}

double space_amp(const Engine& engine) {
  const double user = static_cast<double>(engine.metrics().user_bytes_written);
  if (user <= 0.0) return 0.0;
  return static_cast<double>(engine.tree().total_bytes()) / user;
}

void write_trace_csv(const std::string& path, const BenchResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << "ops,throughput_ops_s,p999_us,run_count,read_blocks,stall_us,space_amp\n";
  for (const MetricSample& row : result.trace) {
    out << row.ops << ',' << row.throughput_ops_s << ',' << row.p999_us << ','
        << row.run_count << ',' << row.read_blocks << ',' << row.stall_us << ','
        << row.space_amp << '\n';
  }
}

void write_summary(const std::string& path, const BenchResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary: " + path);
  out << "policy=" << result.policy << '\n'
      << "total_ops=" << result.final_metrics.ops << '\n'
      << "overall_throughput_ops_s=" << result.overall_throughput_ops_s << '\n'
      << "avg_latency_us=" << result.avg_latency_us << '\n'
      << "stall_time_us=" << result.final_metrics.stall_time_us << '\n'
      << "stalled_puts=" << result.final_metrics.stalled_puts << '\n'
      << "flushes=" << result.final_metrics.flushes << '\n'
      << "compactions=" << result.final_metrics.compactions_completed << '\n'
      << "param_searches=" << result.final_metrics.param_searches << '\n'
      << "read_blocks=" << result.final_metrics.data_block_reads << '\n'
      << "preload_virtual_us=" << result.preload_virtual_us << '\n';
  for (const PhaseSummary& phase : result.phases) {
    out << "phase_" << phase.mix << "_throughput_ops_s=" << phase.throughput_ops_s << '\n';
  }
}

}  // namespace

BenchResult run_benchmark(Env& env, EngineConfig config, const CompoundWorkload& workload,
                          std::uint64_t seed, const std::string& output_dir) {
  workload.validate();

  BenchResult result;
  const std::uint64_t entry_bytes = config.constants.entry_size;
  const std::uint64_t preload_keys = workload.preload_bytes / entry_bytes;
  if (preload_keys > 0) {
    // Fill under a fixed leveling discipline so every policy starts the
    // measured phases from the same tree; the fill is not measured.
    EngineConfig fill = config;
    fill.policy = PolicyKind::kLeveling;
    Engine filler(env, std::move(fill));
    for (std::uint64_t i = 0; i < preload_keys; ++i) {
      const std::string key = make_key(i);
      filler.put(key, make_value(i, entry_bytes - key.size()));
    }
    filler.close();
    result.preload_virtual_us = filler.metrics().virtual_time_us;
  }

  Engine engine(env, std::move(config));
  result.policy = policy_name(engine.config().policy);

  OpGenerator gen(workload, seed, preload_keys);
  Op op;
  std::vector<double> costs;
  costs.reserve(kSampleInterval);
  std::uint64_t ops_done = 0;
  double last_sample_us = engine.metrics().virtual_time_us;
  double replay_start_us = last_sample_us;
  double total_cost_us = 0.0;

  int current_phase = 0;
  std::uint64_t phase_start_ops = 0;
  double phase_start_us = last_sample_us;
  auto close_phase = [&](int phase) {
    PhaseSummary summary;
    summary.mix = workload.phases[phase].mix.name;
    summary.ops = ops_done - phase_start_ops;
    const double elapsed = engine.metrics().virtual_time_us - phase_start_us;
    summary.throughput_ops_s =
        elapsed > 0.0 ? static_cast<double>(summary.ops) / elapsed * 1e6 : 0.0;
    result.phases.push_back(summary);
    phase_start_ops = ops_done;
    phase_start_us = engine.metrics().virtual_time_us;
  };

  while (gen.next(op)) {
    if (gen.phase_index() != current_phase) {
      close_phase(current_phase);
      current_phase = gen.phase_index();
    }
    switch (op.type) {
      case OpType::kPut: {
        const std::string key = make_key(op.key_index);
        engine.put(key, make_value(op.key_index, entry_bytes - key.size()));
        break;
      }
      case OpType::kGet:
        engine.get(make_key(op.key_index));
        break;
      case OpType::kScan:
        engine.scan_n(make_key(op.key_index), kScanLength);
        break;
    }
    ++ops_done;
    costs.push_back(engine.metrics().last_op_cost_us);
    total_cost_us += engine.metrics().last_op_cost_us;

    if (ops_done % kSampleInterval == 0) {
      MetricSample row;
      row.ops = ops_done;
      const double now = engine.metrics().virtual_time_us;
      row.throughput_ops_s = now > last_sample_us
                                 ? static_cast<double>(kSampleInterval) / (now - last_sample_us) * 1e6
                                 : 0.0;
      row.p999_us = percentile(costs, 0.999);
      row.run_count = engine.tree().run_count();
      row.read_blocks = engine.metrics().data_block_reads;
      row.stall_us = engine.metrics().stall_time_us;
      row.space_amp = space_amp(engine);
      result.trace.push_back(row);
      costs.clear();
      last_sample_us = now;
    }
  }
  if (!workload.phases.empty()) close_phase(current_phase);

  const double replay_us = engine.metrics().virtual_time_us - replay_start_us;
  result.overall_throughput_ops_s =
      replay_us > 0.0 ? static_cast<double>(ops_done) / replay_us * 1e6 : 0.0;
  result.avg_latency_us =
      ops_done > 0 ? total_cost_us / static_cast<double>(ops_done) : 0.0;

  engine.close();
  result.final_metrics = engine.metrics();
  result.window_log = engine.window_log();

  if (!output_dir.empty()) {
    env.create_dir(output_dir);
    write_trace_csv(output_dir + "/" + result.policy + "_trace.csv", result);
    write_summary(output_dir + "/" + result.policy + "_summary.txt", result);
  }
  return result;
}

std::vector<BenchResult> compare_policies(Env& env, std::vector<EngineConfig> configs,
                                          const CompoundWorkload& workload,
                                          std::uint64_t seed,
                                          const std::string& output_dir) {
  if (configs.empty()) throw std::invalid_argument("compare needs at least one config");
  std::vector<BenchResult> results;
  results.reserve(configs.size());
  for (EngineConfig& config : configs) {
    results.push_back(run_benchmark(env, std::move(config), workload, seed, output_dir));
  }
  if (!output_dir.empty()) {
    std::ofstream out(output_dir + "/compare.txt");
    out << render_comparison(results, workload);
  }
  return results;
}

std::string render_comparison(const std::vector<BenchResult>& results,
                              const CompoundWorkload& workload) {
  std::ostringstream out;
  out << "policy";
  for (const WorkloadPhase& phase : workload.phases) out << '\t' << phase.mix.name;
  out << "\toverall\n";
  for (const BenchResult& result : results) {
    out << result.policy;
    for (const PhaseSummary& phase : result.phases) out << '\t' << phase.throughput_ops_s;
    out << '\t' << result.overall_throughput_ops_s << '\n';
  }
  return out.str();
}

}  // namespace flexkv
