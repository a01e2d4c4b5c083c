#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "doctest.h"
#include "flexkv/engine.hpp"
#include "test_util.hpp"

using namespace flexkv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("flexkv_engine_" + std::to_string(std::random_device{}()));
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

EngineConfig small_config(const std::string& dir, PolicyKind policy = PolicyKind::kArce) {
  EngineConfig config;
  config.data_dir = dir;
  config.policy = policy;
  config.constants.memtable_size = 16 * 1024;
  config.constants.entry_size = 1024;
  config.stats_period = 500;
  config.search.max_iter = 40;
  config.search.worker_count = 2;
  return config;
}

std::string pad_key(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "k%08d", i);
  return buf;
}

}  // namespace

TEST_CASE("engine matches a reference map over randomized histories") {
  TempDir dir;
  Engine engine(default_env(), small_config(dir.str()));
  std::map<std::string, std::string> reference;
  std::mt19937_64 rng(4242);

  // Many short histories against one engine instance; each op is checked
  // immediately so divergence points are exact.
  for (int i = 0; i < 6000; ++i) {
    const int key_id = static_cast<int>(rng() % 400);
    const std::string key = pad_key(key_id);
    switch (rng() % 5) {
      case 0:
      case 1: {
        std::string value = "v" + std::to_string(rng() % 100000);
        value.resize(80, 'x');
        engine.put(key, value);
        reference[key] = value;
        break;
      }
      case 2: {
        engine.del(key);
        reference.erase(key);
        break;
      }
      case 3: {
        auto got = engine.get(key);
        auto expect = reference.find(key);
        if (expect == reference.end()) {
          CHECK(!got.has_value());
        } else {
          REQUIRE(got.has_value());
          CHECK(*got == expect->second);
        }
        break;
      }
      default: {
        const std::string end = pad_key(key_id + 25);
        auto got = engine.scan(key, end);
        std::vector<std::pair<std::string, std::string>> expect;
        for (auto it = reference.lower_bound(key);
             it != reference.end() && it->first <= end; ++it) {
          expect.emplace_back(it->first, it->second);
        }
        CHECK(got == expect);
        break;
      }
    }
  }
  CHECK(engine.metrics().flushes > 5);
  engine.close();
}

TEST_CASE("engine state survives close and reopen") {
  TempDir dir;
  EngineConfig config = small_config(dir.str());
  {
    Engine engine(default_env(), config);
    for (int i = 0; i < 800; ++i) {
      engine.put(pad_key(i), "value-" + std::to_string(i));
    }
    engine.del(pad_key(17));
    engine.close();
  }
  {
    Engine engine(default_env(), config);
    CHECK(!engine.get(pad_key(17)).has_value());
    auto got = engine.get(pad_key(311));
    REQUIRE(got.has_value());
    CHECK(*got == "value-311");

    // Sequence numbers keep ascending: a new overwrite wins.
    engine.put(pad_key(311), "updated");
    CHECK(*engine.get(pad_key(311)) == "updated");
    engine.close();
  }
}

TEST_CASE("flush arithmetic follows the memtable budget") {
  TempDir dir;
  EngineConfig config = small_config(dir.str());
  Engine engine(default_env(), config);
  // Each put adds key (9 bytes) + value (91 bytes) = 100 bytes.
  const std::string value(91, 'v');
  const int puts_per_flush =
      static_cast<int>(config.constants.memtable_size / 100) + 1;
  for (int round = 0; round < 3; ++round) {
    for (int i = 0; i < puts_per_flush; ++i) {
      engine.put(pad_key(round * puts_per_flush + i), value);
    }
  }
  CHECK(engine.metrics().flushes == 3);
  CHECK(engine.metrics().user_bytes_written == 3ULL * puts_per_flush * 100);
  engine.close();
}

TEST_CASE("scan_n stops at the limit across memtable and runs") {
  TempDir dir;
  Engine engine(default_env(), small_config(dir.str()));
  for (int i = 0; i < 500; ++i) engine.put(pad_key(i), "v" + std::to_string(i));
  auto got = engine.scan_n(pad_key(100), 10);
  REQUIRE(got.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(got[i].first == pad_key(100 + i));
  engine.close();
}

TEST_CASE("read-heavy stats drive the decision toward compaction") {
  TempDir dir;
  EngineConfig config = small_config(dir.str());
  config.stats_period = 1'000'000;  // manual injection only
  Engine engine(default_env(), config);
  const std::string value(91, 'v');
  for (int i = 0; i < 2000; ++i) engine.put(pad_key(i), value);
  REQUIRE(engine.tree().run_count() >= 2);

  // A read-dominated report makes merging pay for itself and the search
  // must grant a positive long-term weight for that to happen.
  engine.inject_stats(WorkloadMix{4000, 500, 4000});
  auto decision = engine.peek_decision();
  REQUIRE(decision.has_value());
  CHECK(decision->runs_reduced >= 1);
  CHECK(engine.params().long_term_weight > 0.0);
  CHECK(engine.metrics().param_searches >= 1);
  engine.close();
}

TEST_CASE("compactions run to completion and reduce the tree") {
  TempDir dir;
  EngineConfig config = small_config(dir.str());
  Engine engine(default_env(), config);
  const std::string value(91, 'v');
  int key = 0;
  for (int i = 0; i < 3000; ++i) engine.put(pad_key(key++), value);
  engine.inject_stats(WorkloadMix{4000, 500, 4000});
  for (int i = 0; i < 3000; ++i) engine.put(pad_key(key++), value);
  engine.close();

  CHECK(engine.metrics().compactions_completed >= 1);
  CHECK(engine.metrics().compactions_completed ==
        engine.metrics().compactions_started);
  // Close may force-complete a short-of-target compaction, which is
  // excluded from the estimate log.
  CHECK(engine.window_log().size() <= engine.metrics().compactions_completed);
  CHECK(!engine.window_log().empty());
  CHECK(!validate_tree(engine.tree()).has_value());
  // Every key remains visible after merges.
  Engine reopened(default_env(), config);
  CHECK(reopened.get(pad_key(0)).has_value());
  CHECK(reopened.get(pad_key(key - 1)).has_value());
  reopened.close();
}

TEST_CASE("baseline stall accounting charges stalled puts") {
  TempDir dir;
  EngineConfig config = small_config(dir.str(), PolicyKind::kTiering);
  config.baseline_stall_runs = 1;  // stall immediately once L0 backs up
  config.baseline_stall_us = 6.0;
  Engine engine(default_env(), config);
  const std::string value(91, 'v');
  for (int i = 0; i < 2000; ++i) engine.put(pad_key(i), value);
  CHECK(engine.metrics().stalled_puts > 0);
  CHECK(engine.metrics().stall_time_us ==
        doctest::Approx(6.0 * engine.metrics().stalled_puts));
  engine.close();
}

TEST_CASE("baseline_trigger implements the classical shapes") {
  CostConstants constants = testutil::paper_constants();
  const std::uint64_t f = constants.memtable_size;

  SUBCASE("leveling merges any level-0 bytes into level 1") {
    TreeState state = testutil::make_tree({{f}});
    auto trigger = baseline_trigger(PolicyKind::kLeveling, 10, state, constants);
    REQUIRE(trigger.has_value());
    CHECK(trigger->output_level == 1);
    CHECK(trigger->input_runs.size() == 1);
  }

  SUBCASE("leveling leaves an in-budget deeper level alone") {
    TreeState state = testutil::make_tree({{}, {5 * f}});
    CHECK(!baseline_trigger(PolicyKind::kLeveling, 10, state, constants).has_value());
    TreeState over = testutil::make_tree({{}, {11 * f}});
    auto trigger = baseline_trigger(PolicyKind::kLeveling, 10, over, constants);
    REQUIRE(trigger.has_value());
    CHECK(trigger->output_level == 2);
  }

  SUBCASE("tiering waits for T runs then merges the oldest T") {
    TreeState under = testutil::make_tree({{f, f, f}});
    CHECK(!baseline_trigger(PolicyKind::kTiering, 4, under, constants).has_value());
    TreeState full = testutil::make_tree({{f, f, f, f, f}});
    auto trigger = baseline_trigger(PolicyKind::kTiering, 4, full, constants);
    REQUIRE(trigger.has_value());
    CHECK(trigger->input_runs.size() == 4);
    CHECK(trigger->output_level == 1);
  }

  SUBCASE("lazy leveling keeps a single run at the deepest level") {
    // Two runs at the deepest non-empty level merge in place even below T.
    TreeState deep = testutil::make_tree({{}, {f, 2 * f}});
    auto trigger = baseline_trigger(PolicyKind::kLazyLeveling, 4, deep, constants);
    REQUIRE(trigger.has_value());
    CHECK(trigger->input_runs.size() == 2);
    // Shallower levels behave like tiering.
    TreeState mixed = testutil::make_tree({{f, f, f, f}, {8 * f}});
    auto upper = baseline_trigger(PolicyKind::kLazyLeveling, 4, mixed, constants);
    REQUIRE(upper.has_value());
    CHECK(upper->output_level == 1);
  }
}

TEST_CASE("simulated payload mode tracks metrics without files") {
  TempDir dir;
  EngineConfig config = small_config(dir.str());
  config.simulate_payload = true;
  Engine engine(default_env(), config);
  const std::string value(91, 'v');
  for (int i = 0; i < 2000; ++i) engine.put(pad_key(i), value);
  for (int i = 0; i < 200; ++i) engine.get(pad_key(i));
  engine.scan(pad_key(0), pad_key(50));
  CHECK(engine.metrics().flushes > 0);
  CHECK(engine.metrics().gets == 200);
  CHECK(engine.metrics().virtual_time_us > 0);
  // No sst files on disk in this mode.
  int sst_files = 0;
  for (const auto& entry : fs::directory_iterator(dir.str())) {
    if (entry.path().extension() == ".sst") ++sst_files;
  }
  CHECK(sst_files == 0);
  engine.close();
}

TEST_CASE("engine config validation and json loading") {
  TempDir dir;
  fs::create_directories(dir.str());
  EngineConfig bad;
  CHECK_THROWS(bad.validate());

  const std::string path = dir.str() + "/config.json";
  {
    std::ofstream out(path);
    out << R"({"policy": "tiering", "size_ratio": 6, "bloom_bits_per_key": 12})";
  }
  EngineConfig loaded = load_engine_config(path);
  CHECK(loaded.policy == PolicyKind::kTiering);
  CHECK(loaded.size_ratio == 6);
  CHECK(loaded.bloom_bits_per_key == 12.0);
  {
    std::ofstream out(path);
    out << R"({"no_such_key": 1})";
  }
  CHECK_THROWS(load_engine_config(path));
}
