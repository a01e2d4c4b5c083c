#include "flexkv/bloom.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace flexkv {

std::uint64_t hash64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

BloomFilter::BloomFilter(std::size_t key_count, double bits_per_key) {
  if (bits_per_key <= 0) throw std::invalid_argument("bits_per_key must be positive");
  std::size_t bits = static_cast<std::size_t>(std::ceil(key_count * bits_per_key));
  if (bits < 64) bits = 64;
  bits_.assign((bits + 7) / 8, 0);
  hashes_ = static_cast<int>(std::lround(bits_per_key * std::log(2.0)));
  if (hashes_ < 1) hashes_ = 1;
  if (hashes_ > 30) hashes_ = 30;
}

void BloomFilter::insert(std::string_view key) {
  const std::uint64_t h1 = hash64(key);
  const std::uint64_t h2 = hash64(key, 0x9e3779b97f4a7c15ULL) | 1;
  const std::size_t bits = bits_.size() * 8;
  std::uint64_t h = h1;
  for (int i = 0; i < hashes_; ++i) {
    std::size_t bit = h % bits;
    bits_[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    h += h2;
  }
}

bool BloomFilter::may_contain(std::string_view key) const {
  if (bits_.empty()) return true;
  const std::uint64_t h1 = hash64(key);
  const std::uint64_t h2 = hash64(key, 0x9e3779b97f4a7c15ULL) | 1;
  const std::size_t bits = bits_.size() * 8;
  std::uint64_t h = h1;
  for (int i = 0; i < hashes_; ++i) {
    std::size_t bit = h % bits;
    if ((bits_[bit / 8] & (1u << (bit % 8))) == 0) return false;
    h += h2;
  }
  return true;
}

std::vector<std::uint8_t> BloomFilter::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(bits_.size() + 4);
  out.push_back(static_cast<std::uint8_t>(hashes_));
  out.insert(out.end(), bits_.begin(), bits_.end());
  return out;
}

BloomFilter BloomFilter::deserialize(const std::uint8_t* data, std::size_t size) {
  if (size < 1) throw std::runtime_error("bloom filter payload too small");
  BloomFilter filter;
  filter.hashes_ = data[0];
  filter.bits_.assign(data + 1, data + size);
  return filter;
}

}  // namespace flexkv
