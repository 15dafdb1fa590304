#include "lifeserver/store/ndjson_log.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "lifeserver/store/records.hpp"

namespace lifeserver::store {
namespace {

[[noreturn]] void io_error(const std::string& what, int err) {
  if (err == ENOSPC || err == EDQUOT || err == EFBIG) {
    throw StoreError(StoreErrc::StorageFull, what + ": " + std::strerror(err));
  }
  throw StoreError(StoreErrc::Io, what + ": " + std::strerror(err));
}

}  // namespace

NdjsonLog::NdjsonLog(std::filesystem::path path, LogOptions options, const Replay& replay)
    : path_(std::move(path)), options_(options) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());

  std::string content;
  {
    std::ifstream in(path_, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      content = ss.str();
    }
  }
  // Drop a torn tail left by a crash mid-write.
  const auto last_nl = content.rfind('\n');
  const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  const bool torn = keep != content.size();

  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0640);
  if (fd_ < 0) io_error("open " + path_.string(), errno);
  if (torn) {
    if (::ftruncate(fd_, static_cast<off_t>(keep)) != 0) io_error("truncate " + path_.string(), errno);
    ::fsync(fd_);
  }
  size_ = keep;

  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin < keep) {
    const std::size_t nl = content.find('\n', begin);
    ++line_no;
    const std::string_view line(content.data() + begin, nl - begin);
    if (!line.empty()) replay(line, line_no);
    begin = nl + 1;
  }

  if (options_.sync == SyncPolicy::Batched) {
    flusher_ = std::jthread([this](std::stop_token st) { flusher_loop(st); });
  }
}

NdjsonLog::~NdjsonLog() {
  if (flusher_.joinable()) {
    flusher_.request_stop();
    wake_.notify_all();
    flusher_.join();
  }
  if (fd_ >= 0) {
    ::fsync(fd_);
    ::close(fd_);
  }
}

void NdjsonLog::append(std::span<const std::string> lines) {
  std::string buf;
  for (const auto& l : lines) {
    if (l.find('\n') != std::string::npos) {
      throw StoreError(StoreErrc::SchemaViolation, "log lines cannot contain newlines");
    }
    buf += l;
    buf += '\n';
  }
  std::lock_guard lock(mu_);
  if (options_.max_bytes != 0 && size_ + buf.size() > options_.max_bytes) {
    throw StoreError(StoreErrc::StorageFull,
                     path_.filename().string() + " would exceed " + std::to_string(options_.max_bytes) + " bytes");
  }
  std::size_t written = 0;
  while (written < buf.size()) {
    const ssize_t n = ::write(fd_, buf.data() + written, buf.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      // Roll back a partial write so the file stays line-aligned. If even
      // that fails, reopening cuts the torn tail.
      if (written > 0 && ::ftruncate(fd_, static_cast<off_t>(size_)) != 0) {
        spdlog::warn("{}: partial write left in place until reopen", path_.string());
      }
      io_error("write " + path_.string(), err);
    }
    written += static_cast<std::size_t>(n);
  }
  size_ += buf.size();
  if (options_.sync == SyncPolicy::EveryAppend) {
    if (::fsync(fd_) != 0) io_error("fsync " + path_.string(), errno);
  } else {
    dirty_ = true;
  }
}

void NdjsonLog::sync() {
  std::lock_guard lock(mu_);
  ::fsync(fd_);
  dirty_ = false;
}

std::uint64_t NdjsonLog::size_bytes() const {
  std::lock_guard lock(mu_);
  return size_;
}

void NdjsonLog::flusher_loop(std::stop_token stop) {
  std::unique_lock lock(mu_);
  while (!stop.stop_requested()) {
    wake_.wait_for(lock, stop, options_.batch_interval, [] { return false; });
    if (dirty_) {
      dirty_ = false;
      lock.unlock();
      ::fsync(fd_);
      lock.lock();
    }
  }
}

}  // namespace lifeserver::store
