#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>

namespace lifeserver::store {

enum class SyncPolicy {
  EveryAppend,  // fsync before append returns
  Batched,      // written immediately, fsync'd by a background flusher
};

struct LogOptions {
  SyncPolicy sync = SyncPolicy::Batched;
  std::chrono::milliseconds batch_interval{50};
  std::uint64_t max_bytes = 0;  // 0 = unbounded
};

/// Append-only newline-delimited JSON file.
///
/// Every append is a single write(2) of whole lines, so a crash leaves at most
/// one torn line at the tail; open() truncates it away. Once append returns
/// the bytes are in the kernel and survive the process being killed.
class NdjsonLog {
 public:
  using Replay = std::function<void(std::string_view line, std::size_t line_no)>;

  NdjsonLog(std::filesystem::path path, LogOptions options, const Replay& replay);
  ~NdjsonLog();
  NdjsonLog(const NdjsonLog&) = delete;
  NdjsonLog& operator=(const NdjsonLog&) = delete;

  /// Lines must not contain '\n'. Throws StoreError(StorageFull | Io).
  void append(std::span<const std::string> lines);
  void append(const std::string& line) { append(std::span<const std::string>(&line, 1)); }

  void sync();
  std::uint64_t size_bytes() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void flusher_loop(std::stop_token stop);

  std::filesystem::path path_;
  LogOptions options_;
  int fd_ = -1;
  std::uint64_t size_ = 0;
  bool dirty_ = false;
  mutable std::mutex mu_;
  std::condition_variable_any wake_;
  std::jthread flusher_;
};

}  // namespace lifeserver::store
