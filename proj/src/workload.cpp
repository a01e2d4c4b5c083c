#include "flexkv/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "flexkv/bloom.hpp"

namespace flexkv {

void MixSpec::validate() const {
  if (range_pct < 0 || update_pct < 0 || point_pct < 0 ||
      range_pct + update_pct + point_pct != 100) {
    throw std::invalid_argument("mix percentages must be nonnegative and sum to 100");
  }
}

MixSpec named_mix(char name) {
  // Ratios are (range, update, point). J is published as 33/33/33; the
  // point share absorbs the rounding remainder.
  switch (name) {
    case 'A': return {"A", 98, 1, 1};
    case 'B': return {"B", 1, 98, 1};
    case 'C': return {"C", 1, 1, 98};
    case 'D': return {"D", 49, 2, 49};
    case 'E': return {"E", 2, 49, 49};
    case 'F': return {"F", 49, 49, 2};
    case 'G': return {"G", 40, 40, 20};
    case 'H': return {"H", 40, 20, 40};
    case 'I': return {"I", 20, 40, 40};
    case 'J': return {"J", 33, 33, 34};
    default: throw std::invalid_argument(std::string("unknown mix: ") + name);
  }
}

KeyDist parse_key_dist(const std::string& name) {
  if (name == "uniform") return KeyDist::kUniform;
  if (name == "zipfian") return KeyDist::kZipfian;
  if (name == "latest") return KeyDist::kLatest;
  throw std::invalid_argument("unknown key distribution: " + name);
}

std::uint64_t CompoundWorkload::total_ops() const {
  std::uint64_t total = 0;
  for (const WorkloadPhase& phase : phases) total += phase.op_count;
  return total;
}

void CompoundWorkload::validate() const {
  for (const WorkloadPhase& phase : phases) {
    phase.mix.validate();
    if (phase.op_count == 0) throw std::invalid_argument("phase op_count must be positive");
  }
  if (zipf_theta <= 0.0 || zipf_theta >= 1.0) {
    throw std::invalid_argument("zipf theta must lie in (0,1)");
  }
}

CompoundWorkload build_named_workload(const std::string& name, double scale) {
  if (scale <= 0.0 || scale > 1.0) throw std::invalid_argument("scale must be in (0,1]");

  std::string mixes;
  std::uint64_t phase_ops = 40'960'000;
  if (name == "I") {
    mixes = "ABDJCE";
  } else if (name == "II") {
    mixes = "JEBFDC";
  } else if (name == "III") {
    mixes = "GHI";
    phase_ops = 20'480'000;
  } else {
    throw std::invalid_argument("unknown workload: " + name);
  }

  CompoundWorkload workload;
  workload.name = name;
  for (char mix : mixes) {
    WorkloadPhase phase;
    phase.mix = named_mix(mix);
    phase.op_count = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(phase_ops * scale)));
    workload.phases.push_back(phase);
  }
  workload.preload_bytes =
      static_cast<std::uint64_t>(40.0 * 1024 * 1024 * 1024 * scale);
  return workload;
}

std::string make_key(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "k%022llu:", static_cast<unsigned long long>(index));
  return std::string(buf, 24);
}

std::string make_value(std::uint64_t index, std::size_t size) {
  std::string value;
  value.reserve(size);
  while (value.size() < size) {
    value += std::to_string(hash64(make_key(index), value.size() + 1));
  }
  value.resize(size);
  return value;
}

OpGenerator::OpGenerator(const CompoundWorkload& workload, std::uint64_t seed,
                         std::uint64_t preloaded_keys)
    : workload_(workload), rng_(seed), total_keys_(preloaded_keys),
      theta_(workload.zipf_theta) {
  workload_.validate();
  zeta2_ = 1.0 + std::pow(0.5, theta_);
}

std::uint64_t OpGenerator::draw_zipf_rank() {
  // YCSB-style bounded zipfian; zeta(n) is extended incrementally as the
  // key population grows.
  const std::uint64_t n = std::max<std::uint64_t>(total_keys_, 1);
  while (zeta_n_ < n) {
    ++zeta_n_;
    zeta_ += 1.0 / std::pow(static_cast<double>(zeta_n_), theta_);
  }
  if (n == 1) return 0;
  const double alpha = 1.0 / (1.0 - theta_);
  const double eta = (1.0 - std::pow(2.0 / static_cast<double>(n), 1.0 - theta_)) /
                     (1.0 - zeta2_ / zeta_);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng_);
  const double uz = u * zeta_;
  if (uz < 1.0) return 0;
  if (uz < 1.0 + std::pow(0.5, theta_)) return 1;
  auto rank = static_cast<std::uint64_t>(
      static_cast<double>(n) * std::pow(eta * u - eta + 1.0, alpha));
  return std::min(rank, n - 1);
}

std::uint64_t OpGenerator::draw_existing() {
  const std::uint64_t n = std::max<std::uint64_t>(total_keys_, 1);
  switch (workload_.dist) {
    case KeyDist::kUniform: {
      std::uniform_int_distribution<std::uint64_t> uniform(0, n - 1);
      return uniform(rng_);
    }
    case KeyDist::kZipfian: {
      // Scramble so popular ranks spread over the keyspace.
      const std::uint64_t rank = draw_zipf_rank();
      return hash64(std::to_string(rank)) % n;
    }
    case KeyDist::kLatest: {
      const std::uint64_t window = std::max<std::uint64_t>(1, n / 100);
      std::uniform_int_distribution<std::uint64_t> uniform(0, window - 1);
      return n - 1 - uniform(rng_);
    }
  }
  throw std::logic_error("unhandled key distribution");
}

bool OpGenerator::next(Op& op) {
  while (phase_ < static_cast<int>(workload_.phases.size()) &&
         phase_ops_ >= workload_.phases[phase_].op_count) {
    ++phase_;
    phase_ops_ = 0;
  }
  if (phase_ >= static_cast<int>(workload_.phases.size())) return false;

  const MixSpec& mix = workload_.phases[phase_].mix;
  std::uniform_int_distribution<int> pct(0, 99);
  const int draw = pct(rng_);
  if (draw < mix.update_pct) {
    op.type = OpType::kPut;
    op.key_index = total_keys_++;
  } else if (draw < mix.update_pct + mix.point_pct) {
    op.type = OpType::kGet;
    op.key_index = draw_existing();
  } else {
    op.type = OpType::kScan;
    op.key_index = draw_existing();
  }
  ++phase_ops_;
  ++emitted_;
  return true;
}

std::vector<Op> generate_ops(const CompoundWorkload& workload, std::uint64_t seed,
                             std::uint64_t preloaded_keys) {
  OpGenerator gen(workload, seed, preloaded_keys);
  std::vector<Op> ops;
  ops.reserve(workload.total_ops());
  Op op;
  while (gen.next(op)) ops.push_back(op);
  return ops;
}

}  // namespace flexkv
