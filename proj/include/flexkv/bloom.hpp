#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace flexkv {

// Standard double-hashing Bloom filter, bits-per-key fixed at build time.
// Zero false negatives; false positive rate ~ exp(-bpk * ln(2)^2).
class BloomFilter {
 public:
  BloomFilter() = default;
  BloomFilter(std::size_t key_count, double bits_per_key);

  void insert(std::string_view key);
  bool may_contain(std::string_view key) const;

  std::vector<std::uint8_t> serialize() const;
  static BloomFilter deserialize(const std::uint8_t* data, std::size_t size);

  std::size_t bit_count() const { return bits_.size() * 8; }
  int hash_count() const { return hashes_; }

 private:
  std::vector<std::uint8_t> bits_;
  int hashes_ = 0;
};

// 64-bit FNV-1a; also used for key-hash sharding in the bench driver.
std::uint64_t hash64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace flexkv
