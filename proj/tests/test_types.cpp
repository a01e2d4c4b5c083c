#include <cmath>
#include <random>

#include "doctest.h"
#include "flexkv/candidates.hpp"
#include "flexkv/types.hpp"
#include "test_util.hpp"

using namespace flexkv;

TEST_CASE("window_update_count divides memtable by entry size") {
  CostConstants c = testutil::paper_constants();
  CHECK(window_update_count(c) == 2048);  // 2 MiB / 1024 B

  c.memtable_size = 4096;
  c.entry_size = 1024;
  CHECK(window_update_count(c) == 4);

  c.memtable_size = c.entry_size = 777;
  CHECK(window_update_count(c) == 1);

  c.memtable_size = 1000;
  c.entry_size = 999;
  CHECK_THROWS_AS(window_update_count(c), std::invalid_argument);
}

TEST_CASE("bloom_fpr closed form") {
  CHECK(bloom_fpr(10.0) == doctest::Approx(0.00819).epsilon(0.001));
  CHECK(bloom_fpr(0.0) == doctest::Approx(1.0));
  double ln2_sq = std::log(2.0) * std::log(2.0);
  CHECK(bloom_fpr(10.0 / ln2_sq) == doctest::Approx(std::exp(-10.0)));
}

TEST_CASE("validate_tree accepts empty and singleton trees") {
  TreeState empty(4);
  CHECK(!validate_tree(empty).has_value());

  TreeState one = testutil::make_tree({{}, {}, {4096}});
  CHECK(!validate_tree(one).has_value());
}

TEST_CASE("validate_tree rejects newer data at a deeper level") {
  TreeState state(2);
  SortedRun shallow;
  shallow.id = 1;
  shallow.level = 0;
  shallow.size_bytes = 100;
  shallow.max_key = "z";
  shallow.min_seq = shallow.max_seq = 5;
  state.add_run(shallow);
  SortedRun deep;
  deep.id = 2;
  deep.level = 1;
  deep.size_bytes = 100;
  deep.max_key = "z";
  deep.min_seq = deep.max_seq = 9;  // newer than level 0
  state.add_run(deep);
  CHECK(validate_tree(state).has_value());
}

TEST_CASE("random candidate executions preserve the timestamp invariant") {
  std::mt19937_64 rng(7);
  EnumConfig config;
  config.max_levels = 4;
  for (int trial = 0; trial < 200; ++trial) {
    TreeState state = testutil::make_tree({{10, 20, 30}, {40, 50}, {600}});
    std::uint64_t next_id = 100;
    std::uint64_t next_seq = 1u << 21;
    for (int step = 0; step < 6; ++step) {
      if (rng() % 2 == 0) {
        SortedRun flushed;
        flushed.id = next_id++;
        flushed.level = 0;
        flushed.size_bytes = 5 + rng() % 64;
        flushed.max_key = "z";
        flushed.min_seq = flushed.max_seq = next_seq++;
        state.add_run(flushed);
      } else {
        auto candidates = all_candidates(state, config);
        if (candidates.empty()) continue;
        state.apply_candidate(candidates[rng() % candidates.size()], next_id++);
      }
      auto violation = validate_tree(state);
      INFO("trial " << trial << " step " << step << ": "
                    << violation.value_or("ok"));
      CHECK(!violation.has_value());
    }
  }
}
