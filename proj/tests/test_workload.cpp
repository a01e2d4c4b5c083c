#include <map>

#include "doctest.h"
#include "flexkv/workload.hpp"

using namespace flexkv;

TEST_CASE("named mixes are valid and sum to 100") {
  for (char name = 'A'; name <= 'J'; ++name) {
    MixSpec mix = named_mix(name);
    CHECK(mix.range_pct + mix.update_pct + mix.point_pct == 100);
    CHECK_NOTHROW(mix.validate());
  }
  CHECK_THROWS(named_mix('K'));

  MixSpec a = named_mix('A');
  CHECK(a.range_pct == 98);
  MixSpec d = named_mix('D');
  CHECK(d.range_pct == 49);
  CHECK(d.update_pct == 2);
  CHECK(d.point_pct == 49);
}

TEST_CASE("compound workloads compose and scale") {
  CompoundWorkload full = build_named_workload("I", 1.0);
  CHECK(full.phases.size() == 6);
  CHECK(full.phases[0].mix.name == "A");
  CHECK(full.phases[0].op_count == 40'960'000);
  CHECK(full.total_ops() == 6 * 40'960'000ULL);

  CompoundWorkload scaled = build_named_workload("I", 0.01);
  CHECK(scaled.phases[0].op_count == 409'600);
  CHECK(scaled.preload_bytes == full.preload_bytes / 100);

  CompoundWorkload three = build_named_workload("III", 1.0);
  CHECK(three.phases.size() == 3);
  CHECK(three.phases[0].op_count == 20'480'000);

  CHECK_THROWS(build_named_workload("IV", 1.0));
  CHECK_THROWS(build_named_workload("I", 0.0));
}

TEST_CASE("keys and values have the fixed shapes") {
  std::string key = make_key(7);
  CHECK(key.size() == 24);
  CHECK(key == "k0000000000000000000007:");
  CHECK(make_key(8) > key);
  CHECK(make_value(3).size() == 1000);
  CHECK(make_value(3) == make_value(3));
  CHECK(make_value(3) != make_value(4));
}

TEST_CASE("op stream matches the mix ratios within one percent") {
  CompoundWorkload workload = build_named_workload("I", 0.002);
  OpGenerator gen(workload, 99, 1000);

  std::map<int, std::map<OpType, std::uint64_t>> counts;
  Op op;
  std::uint64_t phase_totals[6] = {0};
  while (gen.next(op)) {
    counts[gen.phase_index()][op.type]++;
    phase_totals[gen.phase_index()]++;
  }
  for (int phase = 0; phase < 6; ++phase) {
    const MixSpec& mix = workload.phases[phase].mix;
    const double total = static_cast<double>(phase_totals[phase]);
    REQUIRE(total > 0);
    CHECK(counts[phase][OpType::kScan] / total ==
          doctest::Approx(mix.range_pct / 100.0).epsilon(0.01));
    CHECK(counts[phase][OpType::kPut] / total ==
          doctest::Approx(mix.update_pct / 100.0).epsilon(0.01));
    CHECK(counts[phase][OpType::kGet] / total ==
          doctest::Approx(mix.point_pct / 100.0).epsilon(0.01));
  }
}

TEST_CASE("op stream is deterministic per seed") {
  CompoundWorkload workload = build_named_workload("II", 0.0005);
  auto a = generate_ops(workload, 7, 500);
  auto b = generate_ops(workload, 7, 500);
  auto c = generate_ops(workload, 8, 500);
  REQUIRE(a.size() == b.size());
  bool identical = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].type != b[i].type || a[i].key_index != b[i].key_index) identical = false;
  }
  CHECK(identical);
  bool differs = a.size() != c.size();
  for (std::size_t i = 0; i < std::min(a.size(), c.size()) && !differs; ++i) {
    differs = a[i].key_index != c[i].key_index;
  }
  CHECK(differs);
}

TEST_CASE("lookups only reference inserted keys and puts append") {
  CompoundWorkload workload = build_named_workload("I", 0.001);
  const std::uint64_t preloaded = 2000;
  OpGenerator gen(workload, 3, preloaded);
  std::uint64_t next_key = preloaded;
  Op op;
  while (gen.next(op)) {
    if (op.type == OpType::kPut) {
      CHECK(op.key_index == next_key);
      ++next_key;
    } else {
      CHECK(op.key_index < next_key);
    }
  }
  CHECK(gen.keys_inserted() == next_key);
}

TEST_CASE("zipfian skews toward hot keys, latest toward new ones") {
  CompoundWorkload workload = build_named_workload("I", 0.001);
  workload.phases.resize(1);
  // Pure point lookups: a fixed key count keeps the rank-to-key mapping
  // stable so per-key skew is visible.
  workload.phases[0].mix = MixSpec{"points", 0, 0, 100};
  workload.phases[0].op_count = 200'000;

  auto histogram = [&](KeyDist dist) {
    CompoundWorkload w = workload;
    w.dist = dist;
    std::map<std::uint64_t, std::uint64_t> counts;
    for (const Op& op : generate_ops(w, 11, 100'000)) {
      if (op.type == OpType::kGet) counts[op.key_index]++;
    }
    return counts;
  };

  auto uniform = histogram(KeyDist::kUniform);
  auto zipf = histogram(KeyDist::kZipfian);
  std::uint64_t uniform_max = 0;
  std::uint64_t zipf_max = 0;
  for (const auto& [k, v] : uniform) uniform_max = std::max(uniform_max, v);
  for (const auto& [k, v] : zipf) zipf_max = std::max(zipf_max, v);
  CHECK(zipf_max >= 10 * uniform_max);

  // Latest draws stay inside the newest 1% of the key space.
  auto latest = histogram(KeyDist::kLatest);
  std::uint64_t low_keys = 0;
  for (const auto& [k, v] : latest) {
    if (k < 95'000) low_keys += v;
  }
  CHECK(low_keys == 0);
}

TEST_CASE("workload validation rejects bad parameters") {
  CompoundWorkload w = build_named_workload("I", 0.01);
  w.zipf_theta = 1.5;
  CHECK_THROWS(w.validate());
  w.zipf_theta = 0.99;
  w.phases[0].op_count = 0;
  CHECK_THROWS(w.validate());
}
