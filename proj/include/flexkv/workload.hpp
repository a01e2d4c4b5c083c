#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace flexkv {

// Operation mix as percentages; the named mixes A..J are fixed.
struct MixSpec {
  std::string name;
  int range_pct = 0;
  int update_pct = 0;
  int point_pct = 0;

  void validate() const;
};

MixSpec named_mix(char name);

enum class KeyDist { kUniform, kZipfian, kLatest };

KeyDist parse_key_dist(const std::string& name);

struct WorkloadPhase {
  MixSpec mix;
  std::uint64_t op_count = 0;
};

struct CompoundWorkload {
  std::string name;
  std::vector<WorkloadPhase> phases;
  KeyDist dist = KeyDist::kUniform;
  double zipf_theta = 0.99;
  std::uint64_t preload_bytes = 0;

  std::uint64_t total_ops() const;
  void validate() const;
};

// The named compound workloads at a fractional scale: per-phase op counts
// and the preload volume shrink together.
CompoundWorkload build_named_workload(const std::string& name, double scale);

enum class OpType { kPut, kGet, kScan };

struct Op {
  OpType type = OpType::kPut;
  std::uint64_t key_index = 0;
};

// 24-byte zero-padded key and 1000-byte value for an index.
std::string make_key(std::uint64_t index);
std::string make_value(std::uint64_t index, std::size_t size = 1000);

constexpr std::size_t kScanLength = 100;

// Deterministic per-seed stream. Updates append fresh keys; lookups draw
// an existing key from the configured distribution (latest = uniform over
// the newest 1% of inserted keys).
class OpGenerator {
 public:
  OpGenerator(const CompoundWorkload& workload, std::uint64_t seed,
              std::uint64_t preloaded_keys);

  bool next(Op& op);
  int phase_index() const { return phase_; }
  std::uint64_t ops_emitted() const { return emitted_; }
  std::uint64_t keys_inserted() const { return total_keys_; }

 private:
  std::uint64_t draw_existing();
  std::uint64_t draw_zipf_rank();

  CompoundWorkload workload_;
  std::mt19937_64 rng_;
  std::uint64_t total_keys_ = 0;
  int phase_ = 0;
  std::uint64_t phase_ops_ = 0;
  std::uint64_t emitted_ = 0;
  double theta_ = 0.99;
  double zeta_ = 0.0;       // zeta(n) maintained incrementally
  std::uint64_t zeta_n_ = 0;
  double zeta2_ = 0.0;
};

std::vector<Op> generate_ops(const CompoundWorkload& workload, std::uint64_t seed,
                             std::uint64_t preloaded_keys);

}  // namespace flexkv
