#include <random>
#include <sstream>

#include "doctest.h"
#include "flexkv/oracle.hpp"
#include "test_util.hpp"

using namespace flexkv;

namespace {

TinyInstance basic_instance() {
  TinyInstance instance;
  instance.name = "basic";
  instance.constants = testutil::paper_constants();
  instance.stall.stall_threshold = 8;
  instance.stall.stall_penalty_us = 6.0;
  return instance;
}

}  // namespace

TEST_CASE("single window with no candidates is forced to no-compaction") {
  TinyInstance instance = basic_instance();
  instance.initial = testutil::make_tree({{1 << 20}});
  instance.schedule = {WorkloadMix{10, 2048, 10}};

  auto result = optimal_sequence(instance);
  REQUIRE(result.sequence.size() == 1);
  CHECK(!result.sequence[0].compacted);
  double expected = window_breakdown(1, instance.constants, instance.schedule[0],
                                     instance.stall)
                        .total();
  CHECK(result.average_cost ==
        doctest::Approx(expected / instance.schedule[0].total()));
}

TEST_CASE("read-heavy schedule merges two equal runs rather than waiting") {
  TinyInstance instance = basic_instance();
  // Two small runs; merging completes within one window.
  instance.initial = testutil::make_tree({{1 << 14, 1 << 14}});
  instance.schedule = {WorkloadMix{2000, 2048, 2000}, WorkloadMix{2000, 2048, 2000}};

  auto result = optimal_sequence(instance);
  REQUIRE(!result.sequence.empty());
  CHECK(result.sequence[0].compacted);
  CHECK(result.sequence[0].elapsed == 1);

  // Full enumeration is the oracle: never-merging must cost more.
  double never = 0.0;
  int s = 2;
  for (std::size_t w = 0; w < 2; ++w) {
    never += window_breakdown(s, instance.constants, instance.schedule[w],
                              instance.stall)
                 .total();
    s += 1;
  }
  CHECK(result.total_cost < never);
}

TEST_CASE("returned sequence re-evaluates to the returned cost") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    TinyInstance instance = basic_instance();
    std::vector<std::vector<std::uint64_t>> sizes(1 + rng() % 3);
    int runs = 0;
    for (auto& level : sizes) {
      int n = static_cast<int>(rng() % 3);
      runs += n;
      for (int i = 0; i < n; ++i) level.push_back((1 + rng() % 64) << 12);
    }
    if (runs == 0) sizes[0].push_back(1 << 14);
    instance.initial = testutil::make_tree(sizes, 3);
    int windows = 2 + static_cast<int>(rng() % 3);
    for (int w = 0; w < windows; ++w) {
      instance.schedule.push_back(WorkloadMix{static_cast<double>(rng() % 2000), 2048.0,
                                              static_cast<double>(rng() % 2000)});
    }

    auto result = optimal_sequence(instance);
    double replayed = 0.0;
    int consumed = 0;
    for (const auto& step : result.sequence) {
      replayed += step.cost;
      consumed += step.elapsed;
    }
    CHECK(consumed == windows);
    CHECK(replayed == doctest::Approx(result.total_cost).epsilon(1e-12));
  }
}

TEST_CASE("zero-read zero-stall instances tie at ratio 1") {
  TinyInstance instance = basic_instance();
  instance.initial = testutil::make_tree({{1 << 12, 1 << 12}});
  instance.schedule = {WorkloadMix{0, 2048, 0}, WorkloadMix{0, 2048, 0}};
  instance.stall.stall_threshold = 100;  // never stalls

  auto optimal = optimal_sequence(instance);
  SearchConfig config;
  config.max_iter = 20;
  config.worker_count = 1;
  auto arce = arce_trace(instance, config);
  CHECK(approximation_ratio(optimal, arce) == doctest::Approx(1.0));
}

TEST_CASE("oracle refuses instances beyond the state budget") {
  TinyInstance instance = basic_instance();
  instance.initial = testutil::make_tree({{1, 2, 3, 4, 5, 6}});
  instance.schedule.assign(5, WorkloadMix{2000, 2048, 2000});
  CHECK_THROWS_AS(optimal_sequence(instance, 3), std::runtime_error);
}

TEST_CASE("instance corpus round-trips through the text format") {
  TinyInstance instance = basic_instance();
  instance.initial = testutil::make_tree({{100, 200}, {300}});
  instance.schedule = {WorkloadMix{1, 2048, 3}, WorkloadMix{4, 2048, 6}};

  std::stringstream buffer;
  save_instances(buffer, {instance});
  auto loaded = load_instances(buffer);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].name == "basic");
  CHECK(loaded[0].initial.run_count() == 3);
  CHECK(loaded[0].initial.total_bytes() == 600);
  CHECK(loaded[0].schedule.size() == 2);
  CHECK(loaded[0].stall.stall_threshold == 8);
  CHECK(!validate_tree(loaded[0].initial).has_value());
}

TEST_CASE("arce stays within twice the optimum on random tiny instances") {
  std::mt19937_64 rng(71);
  SearchConfig config;
  config.max_iter = 12;
  config.worker_count = 1;
  for (int trial = 0; trial < 25; ++trial) {
    TinyInstance instance = basic_instance();
    std::vector<std::vector<std::uint64_t>> sizes(1 + rng() % 2);
    int runs = 0;
    for (auto& level : sizes) {
      int n = 1 + static_cast<int>(rng() % 3);
      runs += n;
      for (int i = 0; i < n; ++i) level.push_back((1 + rng() % 128) << 12);
    }
    instance.initial = testutil::make_tree(sizes, 2);
    instance.stall.stall_threshold = 2 + static_cast<int>(rng() % 6);
    int windows = 2 + static_cast<int>(rng() % 3);
    for (int w = 0; w < windows; ++w) {
      instance.schedule.push_back(WorkloadMix{static_cast<double>(rng() % 3000), 2048.0,
                                              static_cast<double>(rng() % 3000)});
    }
    auto optimal = optimal_sequence(instance);
    auto arce = arce_trace(instance, config);
    double ratio = approximation_ratio(optimal, arce);
    INFO("trial " << trial << " ratio " << ratio);
    CHECK(ratio <= 2.0 + 1e-9);
    CHECK(ratio >= 1.0 - 1e-9);
  }
}
