#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flexkv/bloom.hpp"
#include "flexkv/env.hpp"

namespace flexkv {

struct Entry {
  std::string key;
  std::string value;
  std::uint64_t seq = 0;
  bool tombstone = false;
};

// On-disk sorted run. Little-endian throughout.
//
//   [block 0: magic "FXLS", version u32, padded to block_size]
//   [data blocks: entries (key_len u32, val_len u32, seq u64, flags u8,
//                 key, value), each block padded to block_size]
//   [index: per block {offset, used length, entry count, crc32, first key}]
//   [bloom filter]
//   [meta: section offsets, entry count, key range, seq interval]
//   [footer: meta offset u64, meta length u64, meta crc32, magic]

struct SstWriteResult {
  std::uint64_t entry_count = 0;
  std::uint64_t file_size = 0;
  std::string min_key;
  std::string max_key;
  std::uint64_t min_seq = 0;
  std::uint64_t max_seq = 0;
};

// Entries must be key-ascending with unique keys (resolve duplicates by
// max seq before calling).
SstWriteResult write_sst(Env& env, const std::string& path,
                         const std::vector<Entry>& entries, std::uint64_t block_size,
                         double bloom_bits_per_key);

class SstReader {
 public:
  struct Stats {
    std::atomic<std::uint64_t> data_block_reads{0};
  };

  SstReader(Env& env, const std::string& path, std::shared_ptr<Stats> stats = nullptr);

  // Highest-seq entry for the key, tombstones included. `used_io` is set
  // to true when a data block was actually fetched.
  std::optional<Entry> get(std::string_view key, bool* used_io = nullptr) const;

  bool may_contain(std::string_view key) const { return bloom_.may_contain(key); }

  // All entries with key in [start, end], key-ascending.
  std::vector<Entry> range(std::string_view start, std::string_view end) const;

  std::uint64_t entry_count() const { return entry_count_; }
  const std::string& min_key() const { return min_key_; }
  const std::string& max_key() const { return max_key_; }
  std::uint64_t min_seq() const { return min_seq_; }
  std::uint64_t max_seq() const { return max_seq_; }
  std::uint64_t file_size() const { return file_->size(); }

 private:
  struct BlockHandle {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
    std::uint32_t entries = 0;
    std::uint32_t crc = 0;
    std::string first_key;
  };

  std::vector<Entry> read_block(std::size_t index) const;
  // Last block whose first key <= key; -1 when key precedes all blocks.
  int locate_block(std::string_view key) const;

  std::string path_;
  std::unique_ptr<RandomReadFile> file_;
  std::shared_ptr<Stats> stats_;
  std::vector<BlockHandle> blocks_;
  BloomFilter bloom_;
  std::uint64_t entry_count_ = 0;
  std::string min_key_;
  std::string max_key_;
  std::uint64_t min_seq_ = 0;
  std::uint64_t max_seq_ = 0;
};

}  // namespace flexkv
