#include "flexkv/env.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <system_error>

namespace flexkv {

namespace fs = std::filesystem;

namespace {

class PosixWritableFile : public WritableFile {
 public:
  PosixWritableFile(const std::string& path, bool append) : path_(path) {
    file_ = std::fopen(path.c_str(), append ? "ab" : "wb");
    if (file_ == nullptr) throw std::runtime_error("cannot open for write: " + path);
  }
  ~PosixWritableFile() override {
    if (file_ != nullptr) std::fclose(file_);
  }

  void append(const void* data, std::size_t size) override {
    if (std::fwrite(data, 1, size, file_) != size) {
      throw std::runtime_error("short write: " + path_);
    }
  }

  void sync() override {
    if (std::fflush(file_) != 0) throw std::runtime_error("flush failed: " + path_);
  }

  void close() override {
    if (file_ != nullptr) {
      std::fclose(file_);
      file_ = nullptr;
    }
  }

 private:
  std::string path_;
  std::FILE* file_ = nullptr;
};

class PosixReadFile : public RandomReadFile {
 public:
  explicit PosixReadFile(const std::string& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "rb");
    if (file_ == nullptr) throw std::runtime_error("cannot open for read: " + path);
    std::fseek(file_, 0, SEEK_END);
    size_ = static_cast<std::uint64_t>(std::ftell(file_));
  }
  ~PosixReadFile() override { std::fclose(file_); }

  void read_at(std::uint64_t offset, void* out, std::size_t size) const override {
    if (std::fseek(file_, static_cast<long>(offset), SEEK_SET) != 0 ||
        std::fread(out, 1, size, file_) != size) {
      throw std::runtime_error("short read: " + path_);
    }
  }

  std::uint64_t size() const override { return size_; }

 private:
  std::string path_;
  std::FILE* file_;
  std::uint64_t size_ = 0;
};

class PosixEnv : public Env {
 public:
  std::unique_ptr<WritableFile> new_writable(const std::string& path,
                                             bool append) override {
    return std::make_unique<PosixWritableFile>(path, append);
  }
  std::unique_ptr<RandomReadFile> new_readable(const std::string& path) override {
    return std::make_unique<PosixReadFile>(path);
  }
  bool file_exists(const std::string& path) override { return fs::exists(path); }
  void remove_file(const std::string& path) override {
    std::error_code ec;
    fs::remove(path, ec);
  }
  void create_dir(const std::string& path) override { fs::create_directories(path); }
  std::vector<std::string> list_dir(const std::string& path) override {
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(path)) {
      out.push_back(entry.path().filename().string());
    }
    return out;
  }
};

}  // namespace

Env& default_env() {
  static PosixEnv env;
  return env;
}

class FaultInjectionFile : public WritableFile {
 public:
  FaultInjectionFile(FaultInjectionEnv& owner, std::unique_ptr<WritableFile> base)
      : owner_(owner), base_(std::move(base)) {}

  void append(const void* data, std::size_t size) override;
  void sync() override {
    if (owner_.consume()) throw std::runtime_error("injected fault: sync");
    base_->sync();
  }
  void close() override { base_->close(); }

 private:
  FaultInjectionEnv& owner_;
  std::unique_ptr<WritableFile> base_;
  friend class FaultInjectionEnv;
  bool tear_ = false;
};

void FaultInjectionFile::append(const void* data, std::size_t size) {
  if (owner_.consume()) {
    if (tear_ && size > 1) {
      base_->append(data, size / 2);  // torn write: a prefix lands on disk
      base_->sync();
    }
    throw std::runtime_error("injected fault: append");
  }
  base_->append(data, size);
}

void FaultInjectionEnv::arm(int budget, bool tear_writes) {
  armed_ = true;
  tripped_ = false;
  budget_ = budget;
  tear_writes_ = tear_writes;
  writes_seen_ = 0;
}

void FaultInjectionEnv::disarm() { armed_ = false; }

bool FaultInjectionEnv::consume() {
  if (!armed_) return false;
  ++writes_seen_;
  if (writes_seen_ > budget_) {
    tripped_ = true;
    return true;
  }
  return false;
}

std::unique_ptr<WritableFile> FaultInjectionEnv::new_writable(const std::string& path,
                                                              bool append) {
  if (consume()) throw std::runtime_error("injected fault: open " + path);
  auto file = std::make_unique<FaultInjectionFile>(*this, base_.new_writable(path, append));
  file->tear_ = tear_writes_;
  return file;
}

std::unique_ptr<RandomReadFile> FaultInjectionEnv::new_readable(const std::string& path) {
  return base_.new_readable(path);
}

bool FaultInjectionEnv::file_exists(const std::string& path) {
  return base_.file_exists(path);
}

void FaultInjectionEnv::remove_file(const std::string& path) {
  if (consume()) throw std::runtime_error("injected fault: remove " + path);
  base_.remove_file(path);
}

void FaultInjectionEnv::create_dir(const std::string& path) { base_.create_dir(path); }

std::vector<std::string> FaultInjectionEnv::list_dir(const std::string& path) {
  return base_.list_dir(path);
}

}  // namespace flexkv
