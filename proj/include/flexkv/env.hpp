#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace flexkv {

// Minimal filesystem abstraction so tests can inject faults into the
// flush/compaction install path.

class WritableFile {
 public:
  virtual ~WritableFile() = default;
  virtual void append(const void* data, std::size_t size) = 0;
  virtual void sync() = 0;
  virtual void close() = 0;
};

class RandomReadFile {
 public:
  virtual ~RandomReadFile() = default;
  // Reads exactly `size` bytes at `offset`; throws on short reads.
  virtual void read_at(std::uint64_t offset, void* out, std::size_t size) const = 0;
  virtual std::uint64_t size() const = 0;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual std::unique_ptr<WritableFile> new_writable(const std::string& path,
                                                     bool append = false) = 0;
  virtual std::unique_ptr<RandomReadFile> new_readable(const std::string& path) = 0;
  virtual bool file_exists(const std::string& path) = 0;
  virtual void remove_file(const std::string& path) = 0;
  virtual void create_dir(const std::string& path) = 0;
  virtual std::vector<std::string> list_dir(const std::string& path) = 0;
};

// Plain POSIX-backed environment.
Env& default_env();

// Wraps another Env and fails (optionally mid-write) after a budget of
// write operations. Used by the crash-safety tests.
class FaultInjectionEnv : public Env {
 public:
  explicit FaultInjectionEnv(Env& base) : base_(base) {}

  // Fails every write-path operation once `budget` operations have run.
  // When `tear_writes` is set the failing append first persists a prefix
  // of the data, modeling a torn write.
  void arm(int budget, bool tear_writes);
  void disarm();
  bool tripped() const { return tripped_; }
  int writes_observed() const { return writes_seen_; }

  std::unique_ptr<WritableFile> new_writable(const std::string& path,
                                             bool append) override;
  std::unique_ptr<RandomReadFile> new_readable(const std::string& path) override;
  bool file_exists(const std::string& path) override;
  void remove_file(const std::string& path) override;
  void create_dir(const std::string& path) override;
  std::vector<std::string> list_dir(const std::string& path) override;

 private:
  friend class FaultInjectionFile;
  // Returns true when the next write-path operation must fail.
  bool consume();

  Env& base_;
  bool armed_ = false;
  bool tear_writes_ = false;
  bool tripped_ = false;
  int budget_ = 0;
  int writes_seen_ = 0;
};

}  // namespace flexkv
