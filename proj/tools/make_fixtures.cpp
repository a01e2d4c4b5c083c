// Regenerates the frozen tiny-instance corpus used by the acceptance
// suite. Deterministic: the same seed always produces the same file.
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "flexkv/oracle.hpp"

using namespace flexkv;

namespace {

CostConstants small_constants() {
  CostConstants c;
  c.read_block_io_us = 12.0;
  c.write_block_io_us = 15.0;
  c.block_size = 4096;
  c.memtable_size = 2 * 1024 * 1024;
  c.entry_size = 1024;
  c.bloom_alpha = bloom_fpr(10);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generate the tiny-instance optimality corpus"};
  std::string out_path = "tests/fixtures/tiny_instances.txt";
  std::uint64_t seed = 20260824;
  int count = 220;
  app.add_option("--out", out_path, "destination corpus file");
  app.add_option("--seed", seed, "rng seed");
  app.add_option("--count", count, "number of instances");
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  std::vector<TinyInstance> instances;
  while (static_cast<int>(instances.size()) < count) {
    TinyInstance instance;
    instance.name = "tiny" + std::to_string(instances.size());
    instance.constants = small_constants();
    instance.stall.stall_threshold = 2 + static_cast<int>(rng() % 7);
    instance.stall.stall_penalty_us = 6.0;

    // Up to six runs over one to three levels; sizes in 4K..512K so the
    // exhaustive search stays inside its state budget.
    const int levels = 1 + static_cast<int>(rng() % 3);
    const int runs = 1 + static_cast<int>(rng() % 6);
    TreeState tree(levels);
    std::uint64_t id = 1;
    for (int i = 0; i < runs; ++i) {
      SortedRun run;
      run.id = id;
      run.level = static_cast<int>(rng() % static_cast<std::uint64_t>(levels));
      run.size_bytes = (1 + rng() % 128) << 12;
      run.max_key = "\xff";
      run.min_seq = run.max_seq =
          1000000 - static_cast<std::uint64_t>(run.level) * 1000 - id;
      tree.add_run(std::move(run));
      ++id;
    }
    instance.initial = std::move(tree);

    const int windows = 1 + static_cast<int>(rng() % 4);
    for (int w = 0; w < windows; ++w) {
      instance.schedule.push_back(WorkloadMix{static_cast<double>(rng() % 3000), 2048.0,
                                              static_cast<double>(rng() % 3000)});
    }

    try {
      optimal_sequence(instance);  // drop instances the oracle cannot afford
    } catch (const std::exception&) {
      continue;
    }
    instances.push_back(std::move(instance));
  }

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << '\n';
    return 1;
  }
  save_instances(out, instances);
  std::cout << "wrote " << instances.size() << " instances to " << out_path << '\n';
  return 0;
}
