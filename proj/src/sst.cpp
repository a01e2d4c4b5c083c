#include "flexkv/sst.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include <zlib.h>

namespace flexkv {

namespace {

constexpr char kMagic[4] = {'F', 'X', 'L', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kFooterSize = 4 + 8 + 8 + 4;  // magic, offset, length, crc

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::uint32_t crc_of(const void* data, std::size_t size) {
  return static_cast<std::uint32_t>(
      crc32(0L, static_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

void encode_entry(std::string& out, const Entry& e) {
  put_u32(out, static_cast<std::uint32_t>(e.key.size()));
  put_u32(out, static_cast<std::uint32_t>(e.value.size()));
  put_u64(out, e.seq);
  out.push_back(e.tombstone ? '\x01' : '\x00');
  out.append(e.key);
  out.append(e.value);
}

constexpr std::size_t kEntryHeader = 4 + 4 + 8 + 1;

}  // namespace

SstWriteResult write_sst(Env& env, const std::string& path,
                         const std::vector<Entry>& entries, std::uint64_t block_size,
                         double bloom_bits_per_key) {
  if (entries.empty()) throw std::invalid_argument("cannot write empty sst");
  if (block_size < 64) throw std::invalid_argument("block_size too small");
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (!(entries[i - 1].key < entries[i].key)) {
      throw std::invalid_argument("sst entries must be key-ascending and unique");
    }
  }

  auto file = env.new_writable(path);
  std::string buf;

  // Header block.
  buf.assign(kMagic, 4);
  put_u32(buf, kVersion);
  buf.resize(block_size, '\0');
  file->append(buf.data(), buf.size());
  std::uint64_t offset = block_size;

  BloomFilter bloom(entries.size(), bloom_bits_per_key);
  struct PendingBlock {
    std::uint64_t offset;
    std::uint64_t length;
    std::uint32_t entries;
    std::uint32_t crc;
    std::string first_key;
  };
  std::vector<PendingBlock> index;

  std::string block;
  std::uint32_t block_entries = 0;
  std::string block_first_key;
  auto flush_block = [&] {
    if (block.empty()) return;
    PendingBlock pb;
    pb.offset = offset;
    pb.length = block.size();
    pb.entries = block_entries;
    pb.crc = crc_of(block.data(), block.size());
    pb.first_key = block_first_key;
    index.push_back(std::move(pb));
    std::uint64_t padded = (block.size() + block_size - 1) / block_size * block_size;
    block.resize(padded, '\0');
    file->append(block.data(), block.size());
    offset += padded;
    block.clear();
    block_entries = 0;
  };

  std::uint64_t min_seq = entries.front().seq;
  std::uint64_t max_seq = entries.front().seq;
  for (const Entry& e : entries) {
    bloom.insert(e.key);
    min_seq = std::min(min_seq, e.seq);
    max_seq = std::max(max_seq, e.seq);
    std::size_t need = kEntryHeader + e.key.size() + e.value.size();
    if (!block.empty() && block.size() + need > block_size) flush_block();
    if (block.empty()) block_first_key = e.key;
    encode_entry(block, e);
    ++block_entries;
  }
  flush_block();

  // Index section.
  std::string section;
  put_u32(section, static_cast<std::uint32_t>(index.size()));
  for (const PendingBlock& pb : index) {
    put_u64(section, pb.offset);
    put_u64(section, pb.length);
    put_u32(section, pb.entries);
    put_u32(section, pb.crc);
    put_u32(section, static_cast<std::uint32_t>(pb.first_key.size()));
    section.append(pb.first_key);
  }
  const std::uint64_t index_offset = offset;
  const std::uint64_t index_length = section.size();
  file->append(section.data(), section.size());
  offset += section.size();

  // Bloom section.
  std::vector<std::uint8_t> bloom_bytes = bloom.serialize();
  const std::uint64_t bloom_offset = offset;
  const std::uint64_t bloom_length = bloom_bytes.size();
  file->append(bloom_bytes.data(), bloom_bytes.size());
  offset += bloom_bytes.size();

  // Meta section.
  std::string meta;
  put_u64(meta, index_offset);
  put_u64(meta, index_length);
  put_u64(meta, bloom_offset);
  put_u64(meta, bloom_length);
  put_u64(meta, entries.size());
  put_u64(meta, min_seq);
  put_u64(meta, max_seq);
  put_u32(meta, static_cast<std::uint32_t>(entries.front().key.size()));
  meta.append(entries.front().key);
  put_u32(meta, static_cast<std::uint32_t>(entries.back().key.size()));
  meta.append(entries.back().key);
  const std::uint64_t meta_offset = offset;
  file->append(meta.data(), meta.size());
  offset += meta.size();

  std::string footer;
  footer.append(kMagic, 4);
  put_u64(footer, meta_offset);
  put_u64(footer, meta.size());
  put_u32(footer, crc_of(meta.data(), meta.size()));
  file->append(footer.data(), footer.size());
  offset += footer.size();

  file->sync();
  file->close();

  SstWriteResult result;
  result.entry_count = entries.size();
  result.file_size = offset;
  result.min_key = entries.front().key;
  result.max_key = entries.back().key;
  result.min_seq = min_seq;
  result.max_seq = max_seq;
  return result;
}

SstReader::SstReader(Env& env, const std::string& path, std::shared_ptr<Stats> stats)
    : path_(path), file_(env.new_readable(path)), stats_(std::move(stats)) {
  const std::uint64_t size = file_->size();
  if (size < kFooterSize + 8) throw std::runtime_error("sst too small: " + path);

  std::uint8_t header[8];
  file_->read_at(0, header, sizeof(header));
  if (std::memcmp(header, kMagic, 4) != 0) {
    throw std::runtime_error("bad sst magic: " + path);
  }
  if (get_u32(header + 4) != kVersion) {
    throw std::runtime_error("unsupported sst version: " + path);
  }

  std::uint8_t footer[kFooterSize];
  file_->read_at(size - kFooterSize, footer, kFooterSize);
  if (std::memcmp(footer, kMagic, 4) != 0) {
    throw std::runtime_error("bad sst footer: " + path);
  }
  const std::uint64_t meta_offset = get_u64(footer + 4);
  const std::uint64_t meta_length = get_u64(footer + 12);
  const std::uint32_t meta_crc = get_u32(footer + 20);
  if (meta_offset + meta_length + kFooterSize > size) {
    throw std::runtime_error("sst meta out of range: " + path);
  }

  std::vector<std::uint8_t> meta(meta_length);
  file_->read_at(meta_offset, meta.data(), meta.size());
  if (crc_of(meta.data(), meta.size()) != meta_crc) {
    throw std::runtime_error("sst meta checksum mismatch: " + path);
  }
  if (meta.size() < 7 * 8 + 2 * 4) throw std::runtime_error("sst meta truncated: " + path);
  const std::uint8_t* p = meta.data();
  const std::uint64_t index_offset = get_u64(p); p += 8;
  const std::uint64_t index_length = get_u64(p); p += 8;
  const std::uint64_t bloom_offset = get_u64(p); p += 8;
  const std::uint64_t bloom_length = get_u64(p); p += 8;
  entry_count_ = get_u64(p); p += 8;
  min_seq_ = get_u64(p); p += 8;
  max_seq_ = get_u64(p); p += 8;
  const std::uint8_t* meta_end = meta.data() + meta.size();
  std::uint32_t klen = get_u32(p); p += 4;
  if (p + klen > meta_end) throw std::runtime_error("sst meta truncated: " + path);
  min_key_.assign(reinterpret_cast<const char*>(p), klen); p += klen;
  klen = get_u32(p); p += 4;
  if (p + klen > meta_end) throw std::runtime_error("sst meta truncated: " + path);
  max_key_.assign(reinterpret_cast<const char*>(p), klen);

  std::vector<std::uint8_t> index(index_length);
  file_->read_at(index_offset, index.data(), index.size());
  const std::uint8_t* q = index.data();
  const std::uint8_t* index_end = index.data() + index.size();
  std::uint32_t block_count = get_u32(q); q += 4;
  blocks_.reserve(block_count);
  for (std::uint32_t i = 0; i < block_count; ++i) {
    if (q + 8 + 8 + 4 + 4 + 4 > index_end) {
      throw std::runtime_error("sst index truncated: " + path);
    }
    BlockHandle bh;
    bh.offset = get_u64(q); q += 8;
    bh.length = get_u64(q); q += 8;
    bh.entries = get_u32(q); q += 4;
    bh.crc = get_u32(q); q += 4;
    std::uint32_t flen = get_u32(q); q += 4;
    if (q + flen > index_end) throw std::runtime_error("sst index truncated: " + path);
    bh.first_key.assign(reinterpret_cast<const char*>(q), flen); q += flen;
    blocks_.push_back(std::move(bh));
  }

  std::vector<std::uint8_t> bloom(bloom_length);
  file_->read_at(bloom_offset, bloom.data(), bloom.size());
  bloom_ = BloomFilter::deserialize(bloom.data(), bloom.size());
}

std::vector<Entry> SstReader::read_block(std::size_t index) const {
  const BlockHandle& bh = blocks_.at(index);
  std::vector<std::uint8_t> raw(bh.length);
  file_->read_at(bh.offset, raw.data(), raw.size());
  if (crc_of(raw.data(), raw.size()) != bh.crc) {
    throw std::runtime_error("sst block checksum mismatch: " + path_);
  }
  if (stats_) stats_->data_block_reads.fetch_add(1, std::memory_order_relaxed);

  std::vector<Entry> out;
  out.reserve(bh.entries);
  const std::uint8_t* p = raw.data();
  const std::uint8_t* end = raw.data() + raw.size();
  for (std::uint32_t i = 0; i < bh.entries; ++i) {
    if (p + kEntryHeader > end) throw std::runtime_error("sst block truncated: " + path_);
    Entry e;
    std::uint32_t klen = get_u32(p); p += 4;
    std::uint32_t vlen = get_u32(p + 0); p += 4;
    e.seq = get_u64(p); p += 8;
    e.tombstone = *p != 0; ++p;
    if (p + klen + vlen > end) throw std::runtime_error("sst block truncated: " + path_);
    e.key.assign(reinterpret_cast<const char*>(p), klen); p += klen;
    e.value.assign(reinterpret_cast<const char*>(p), vlen); p += vlen;
    out.push_back(std::move(e));
  }
  return out;
}

int SstReader::locate_block(std::string_view key) const {
  int lo = 0, hi = static_cast<int>(blocks_.size()) - 1, best = -1;
  while (lo <= hi) {
    int mid = (lo + hi) / 2;
    if (blocks_[static_cast<std::size_t>(mid)].first_key <= key) {
      best = mid;
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return best;
}

std::optional<Entry> SstReader::get(std::string_view key, bool* used_io) const {
  if (used_io != nullptr) *used_io = false;
  if (key < min_key_ || key > max_key_) return std::nullopt;
  if (!bloom_.may_contain(key)) return std::nullopt;
  int block = locate_block(key);
  if (block < 0) return std::nullopt;
  if (used_io != nullptr) *used_io = true;
  std::vector<Entry> entries = read_block(static_cast<std::size_t>(block));
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const Entry& e, std::string_view k) { return e.key < k; });
  if (it == entries.end() || it->key != key) return std::nullopt;
  return *it;
}

std::vector<Entry> SstReader::range(std::string_view start, std::string_view end) const {
  std::vector<Entry> out;
  if (blocks_.empty() || end < start) return out;
  int block = locate_block(start);
  if (block < 0) block = 0;
  for (std::size_t i = static_cast<std::size_t>(block); i < blocks_.size(); ++i) {
    if (blocks_[i].first_key > end) break;
    for (Entry& e : read_block(i)) {
      if (e.key < start) continue;
      if (e.key > end) return out;
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace flexkv
