#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flexkv/env.hpp"
#include "flexkv/types.hpp"

namespace flexkv {

struct RunDescriptor {
  std::uint64_t id = 0;
  int level = 0;
  std::uint64_t size_bytes = 0;
  std::string file;
  std::string min_key;
  std::string max_key;
  std::uint64_t min_seq = 0;
  std::uint64_t max_seq = 0;
  std::uint64_t entry_count = 0;
};

struct ManifestState {
  std::map<std::uint64_t, RunDescriptor> runs;
  std::optional<ArceParams> params;
  std::uint64_t next_run_id = 1;
  std::uint64_t last_seq = 0;
};

// Append-only metadata log. Records are length-prefixed and checksummed:
//   u32 payload length, u32 crc32(payload), payload
// payload starts with a one-byte tag {ADD, REMOVE, COMPACT, PARAMS, SEQ}.
// COMPACT removes its input ids and adds the output run in one record so
// a crash never exposes a state with neither. Replay stops at the first
// truncated or corrupt record, discarding the torn tail.
class Manifest {
 public:
  Manifest(Env& env, const std::string& path);

  // Replays an existing log; empty state when the file is absent.
  ManifestState replay();

  void log_add(const RunDescriptor& run);
  void log_remove(std::uint64_t run_id);
  void log_compact(const std::vector<std::uint64_t>& removed, const RunDescriptor& added);
  void log_params(const ArceParams& params);
  void log_seq(std::uint64_t last_seq);

  const std::string& path() const { return path_; }

 private:
  void append_record(const std::string& payload);

  Env& env_;
  std::string path_;
  std::unique_ptr<WritableFile> file_;
};

}  // namespace flexkv
