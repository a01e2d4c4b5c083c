#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "flexkv/bench.hpp"
#include "flexkv/engine.hpp"
#include "flexkv/oracle.hpp"
#include "flexkv/workload.hpp"

namespace {

using namespace flexkv;

std::string resolve_output_dir(const std::string& flag_value) {
  if (const char* env = std::getenv("FLEXKV_OUTPUT_DIR")) return env;
  return flag_value;
}

struct CommonOpts {
  std::string workload = "I";
  double scale = 0.01;
  std::uint64_t seed = 42;
  std::string config_path;
  std::string output_dir = "bench_out";
  std::string dist = "uniform";
  int workers = 16;
  bool real_files = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--workload", opts.workload, "compound workload name: I, II, or III");
  cmd->add_option("--scale", opts.scale, "fraction of full-size op counts")
      ->check(CLI::Range(1e-6, 1.0));
  cmd->add_option("--seed", opts.seed, "rng seed for the op stream");
  cmd->add_option("--config", opts.config_path, "engine config file (json)");
  cmd->add_option("--output", opts.output_dir, "output directory for traces");
  cmd->add_option("--dist", opts.dist, "key distribution: uniform, zipfian, latest");
  cmd->add_option("--workers", opts.workers, "parameter-search worker threads");
  cmd->add_flag("--real-files", opts.real_files,
                "store real sst files instead of metadata-only runs");
}

EngineConfig base_config(const CommonOpts& opts, const std::string& data_dir) {
  EngineConfig config;
  if (!opts.config_path.empty()) config = load_engine_config(opts.config_path);
  config.data_dir = data_dir;
  config.simulate_payload = !opts.real_files;
  config.search.worker_count = opts.workers;
  config.constants.bloom_alpha = bloom_fpr(config.bloom_bits_per_key);
  // Stats reports scale with the stream so adaptation happens at the same
  // relative points as at full size.
  config.stats_period = std::max<std::uint64_t>(
      1000, static_cast<std::uint64_t>(5'000'000 * opts.scale));
  return config;
}

CompoundWorkload make_workload(const CommonOpts& opts) {
  CompoundWorkload workload = build_named_workload(opts.workload, opts.scale);
  workload.dist = parse_key_dist(opts.dist);
  return workload;
}

int cmd_bench(const CommonOpts& opts, const std::string& policy) {
  const std::string out = resolve_output_dir(opts.output_dir);
  EngineConfig config = base_config(opts, out + "/data_" + policy);
  config.policy = parse_policy(policy);
  BenchResult result =
      run_benchmark(default_env(), std::move(config), make_workload(opts), opts.seed, out);
  std::cout << "policy=" << result.policy
            << " ops=" << result.final_metrics.ops
            << " throughput_ops_s=" << result.overall_throughput_ops_s
            << " avg_latency_us=" << result.avg_latency_us
            << " compactions=" << result.final_metrics.compactions_completed
            << " stall_us=" << result.final_metrics.stall_time_us << '\n';
  return 0;
}

int cmd_compare(const CommonOpts& opts, const std::vector<std::string>& policies) {
  const std::string out = resolve_output_dir(opts.output_dir);
  std::vector<EngineConfig> configs;
  for (const std::string& policy : policies) {
    EngineConfig config = base_config(opts, out + "/data_" + policy);
    config.policy = parse_policy(policy);
    configs.push_back(std::move(config));
  }
  CompoundWorkload workload = make_workload(opts);
  auto results = compare_policies(default_env(), std::move(configs), workload, opts.seed, out);
  std::cout << render_comparison(results, workload);
  return 0;
}

int cmd_oracle(const std::string& instances_path, int workers) {
  std::ifstream in(instances_path);
  if (!in) {
    std::cerr << "cannot open instance corpus: " << instances_path << '\n';
    return 1;
  }
  SearchConfig search;
  search.worker_count = workers;
  double worst = 0.0;
  for (const TinyInstance& instance : load_instances(in)) {
    OracleResult optimal = optimal_sequence(instance);
    ArceTraceResult trace = arce_trace(instance, search);
    const double ratio = approximation_ratio(optimal, trace);
    worst = std::max(worst, ratio);
    std::cout << instance.name << " optimal=" << optimal.average_cost
              << " arce=" << trace.average_cost << " ratio=" << ratio << '\n';
  }
  std::cout << "worst_ratio=" << worst << '\n';
  return worst <= 2.0 + 1e-9 ? 0 : 2;
}

int cmd_simulate(const CommonOpts& opts, const std::string& level_spec,
                 double r, double u, double p) {
  EngineConfig config;
  if (!opts.config_path.empty()) config = load_engine_config(opts.config_path);
  config.constants.bloom_alpha = bloom_fpr(config.bloom_bits_per_key);

  TreeState tree(4);
  std::uint64_t id = 1;
  int level = 0;
  std::stringstream levels(level_spec);
  std::string token;
  while (std::getline(levels, token, '/')) {
    std::stringstream runs(token);
    std::string size;
    while (std::getline(runs, size, ',')) {
      SortedRun run;
      run.id = id;
      run.level = level;
      run.size_bytes = std::stoull(size) * config.constants.memtable_size;
      run.min_key = "a";
      run.max_key = "z";
      run.max_seq = 1'000'000 - static_cast<std::uint64_t>(level) * 1000 - id;
      run.min_seq = run.max_seq;
      tree.add_run(run);
      ++id;
    }
    ++level;
  }

  WorkloadMix mix{r, u, p};
  if (mix.empty()) {
    const double w = static_cast<double>(window_update_count(config.constants));
    mix = WorkloadMix{w, w, w};
  }
  SearchConfig search = config.search;
  search.worker_count = opts.workers;
  SearchResult result = find_best_params(tree, mix, config.constants, search);
  std::cout << "best_M=" << result.best_params.long_term_weight
            << " best_c=" << result.best_params.stall_threshold
            << " best_k=" << result.best_params.stall_penalty_us
            << " avg_cost_us=" << result.best_avg_cost
            << " tuples=" << result.tuples_evaluated
            << " wall_ms=" << result.wall_time.count() / 1000.0 << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flexkv: adaptive-compaction LSM engine benchmark driver"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string policy = "arce";
  std::vector<std::string> policies = {"arce", "leveling", "tiering", "lazy-leveling"};
  std::string instances_path;
  std::string level_spec = "1,1/2/4";
  double mix_r = 0, mix_u = 0, mix_p = 0;

  CLI::App* bench = app.add_subcommand("bench", "run one policy over a workload");
  add_common(bench, opts);
  bench->add_option("--policy", policy, "arce, leveling, tiering, or lazy-leveling");

  CLI::App* compare = app.add_subcommand("compare", "run several policies on one stream");
  add_common(compare, opts);
  compare->add_option("--policies", policies, "policies to compare");

  CLI::App* oracle = app.add_subcommand("oracle", "tiny-instance optimality suite");
  oracle->add_option("--instances", instances_path, "instance corpus file")->required();
  oracle->add_option("--workers", opts.workers, "parameter-search worker threads");

  CLI::App* simulate = app.add_subcommand("simulate", "analytical parameter search only");
  add_common(simulate, opts);
  simulate->add_option("--tree", level_spec,
                       "levels split by '/', run sizes in memtable units split by ','");
  simulate->add_option("--mix-r", mix_r, "range lookups per window");
  simulate->add_option("--mix-u", mix_u, "updates per window");
  simulate->add_option("--mix-p", mix_p, "point lookups per window");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) return cmd_bench(opts, policy);
    if (compare->parsed()) return cmd_compare(opts, policies);
    if (oracle->parsed()) return cmd_oracle(instances_path, opts.workers);
    if (simulate->parsed()) return cmd_simulate(opts, level_spec, mix_r, mix_u, mix_p);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
