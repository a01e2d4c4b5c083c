#include "flexkv/manifest.hpp"

#include <bit>
#include <stdexcept>

#include <zlib.h>

namespace flexkv {

namespace {

enum Tag : std::uint8_t {
  kAdd = 1,
  kRemove = 2,
  kCompact = 3,
  kParams = 4,
  kSeq = 5,
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

std::uint32_t crc_of(const std::string& data) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

class Cursor {
 public:
  Cursor(const std::uint8_t* data, std::size_t size) : p_(data), end_(data + size) {}

  bool ok() const { return ok_; }
  std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }

  std::uint8_t u8() {
    if (!need(1)) return 0;
    return *p_++;
  }
  std::uint32_t u32() {
    if (!need(4)) return 0;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p_[i]) << (8 * i);
    p_ += 4;
    return v;
  }
  std::uint64_t u64() {
    if (!need(8)) return 0;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p_[i]) << (8 * i);
    p_ += 8;
    return v;
  }
  std::string str() {
    std::uint32_t len = u32();
    if (!need(len)) return {};
    std::string s(reinterpret_cast<const char*>(p_), len);
    p_ += len;
    return s;
  }

 private:
  bool need(std::size_t n) {
    if (!ok_ || remaining() < n) {
      ok_ = false;
      return false;
    }
    return true;
  }

  const std::uint8_t* p_;
  const std::uint8_t* end_;
  bool ok_ = true;
};

void encode_run(std::string& out, const RunDescriptor& run) {
  put_u64(out, run.id);
  put_u32(out, static_cast<std::uint32_t>(run.level));
  put_u64(out, run.size_bytes);
  put_string(out, run.file);
  put_string(out, run.min_key);
  put_string(out, run.max_key);
  put_u64(out, run.min_seq);
  put_u64(out, run.max_seq);
  put_u64(out, run.entry_count);
}

RunDescriptor decode_run(Cursor& c) {
  RunDescriptor run;
  run.id = c.u64();
  run.level = static_cast<int>(c.u32());
  run.size_bytes = c.u64();
  run.file = c.str();
  run.min_key = c.str();
  run.max_key = c.str();
  run.min_seq = c.u64();
  run.max_seq = c.u64();
  run.entry_count = c.u64();
  return run;
}

void apply_add(ManifestState& state, const RunDescriptor& run) {
  state.runs[run.id] = run;
  if (run.id >= state.next_run_id) state.next_run_id = run.id + 1;
  if (run.max_seq > state.last_seq) state.last_seq = run.max_seq;
}

// Returns false on a malformed payload so replay stops at the tail.
bool apply_record(ManifestState& state, const std::string& payload) {
  Cursor c(reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size());
  switch (c.u8()) {
    case kAdd: {
      RunDescriptor run = decode_run(c);
      if (!c.ok()) return false;
      apply_add(state, run);
      return true;
    }
    case kRemove: {
      std::uint64_t id = c.u64();
      if (!c.ok()) return false;
      state.runs.erase(id);
      return true;
    }
    case kCompact: {
      std::uint32_t count = c.u32();
      std::vector<std::uint64_t> removed;
      for (std::uint32_t i = 0; i < count; ++i) removed.push_back(c.u64());
      RunDescriptor added = decode_run(c);
      if (!c.ok()) return false;
      for (std::uint64_t id : removed) state.runs.erase(id);
      apply_add(state, added);
      return true;
    }
    case kParams: {
      ArceParams params;
      params.long_term_weight = std::bit_cast<double>(c.u64());
      params.stall_threshold = static_cast<int>(c.u32());
      params.stall_penalty_us = std::bit_cast<double>(c.u64());
      if (!c.ok()) return false;
      state.params = params;
      return true;
    }
    case kSeq: {
      std::uint64_t seq = c.u64();
      if (!c.ok()) return false;
      if (seq > state.last_seq) state.last_seq = seq;
      return true;
    }
    default:
      return false;
  }
}

}  // namespace

Manifest::Manifest(Env& env, const std::string& path) : env_(env), path_(path) {}

ManifestState Manifest::replay() {
  ManifestState state;
  if (env_.file_exists(path_)) {
    auto file = env_.new_readable(path_);
    std::vector<std::uint8_t> raw(file->size());
    if (!raw.empty()) file->read_at(0, raw.data(), raw.size());
    std::size_t pos = 0;
    while (pos + 8 <= raw.size()) {
      std::uint32_t len = 0, crc = 0;
      for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(raw[pos + i]) << (8 * i);
      for (int i = 0; i < 4; ++i) crc |= static_cast<std::uint32_t>(raw[pos + 4 + i]) << (8 * i);
      if (pos + 8 + len > raw.size()) break;
      std::string payload(reinterpret_cast<const char*>(raw.data() + pos + 8), len);
      if (crc_of(payload) != crc) break;
      if (!apply_record(state, payload)) break;
      pos += 8 + len;
    }
  }
  file_ = env_.new_writable(path_, /*append=*/true);
  return state;
}

void Manifest::append_record(const std::string& payload) {
  if (file_ == nullptr) file_ = env_.new_writable(path_, /*append=*/true);
  std::string record;
  put_u32(record, static_cast<std::uint32_t>(payload.size()));
  put_u32(record, crc_of(payload));
  record.append(payload);
  file_->append(record.data(), record.size());
  file_->sync();
}

void Manifest::log_add(const RunDescriptor& run) {
  std::string payload(1, static_cast<char>(kAdd));
  encode_run(payload, run);
  append_record(payload);
}

void Manifest::log_remove(std::uint64_t run_id) {
  std::string payload(1, static_cast<char>(kRemove));
  put_u64(payload, run_id);
  append_record(payload);
}

void Manifest::log_compact(const std::vector<std::uint64_t>& removed,
                           const RunDescriptor& added) {
  std::string payload(1, static_cast<char>(kCompact));
  put_u32(payload, static_cast<std::uint32_t>(removed.size()));
  for (std::uint64_t id : removed) put_u64(payload, id);
  encode_run(payload, added);
  append_record(payload);
}

void Manifest::log_params(const ArceParams& params) {
  std::string payload(1, static_cast<char>(kParams));
  put_u64(payload, std::bit_cast<std::uint64_t>(params.long_term_weight));
  put_u32(payload, static_cast<std::uint32_t>(params.stall_threshold));
  put_u64(payload, std::bit_cast<std::uint64_t>(params.stall_penalty_us));
  append_record(payload);
}

void Manifest::log_seq(std::uint64_t last_seq) {
  std::string payload(1, static_cast<char>(kSeq));
  put_u64(payload, last_seq);
  append_record(payload);
}

}  // namespace flexkv
