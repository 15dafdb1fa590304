#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "lifeserver/node/config.hpp"
#include "lifeserver/node/messages.hpp"

namespace lifeserver::node {

enum class ExitCode : int { Ok = 0, Usage = 1, Config = 2, Runtime = 3 };

enum class RuntimeErrc { PortInUse, DataDirLocked, ChannelHandshakeTimeout };

const char* to_string(RuntimeErrc code);

class RuntimeError : public std::runtime_error {
 public:
  RuntimeError(RuntimeErrc code, const std::string& what);
  RuntimeErrc code() const noexcept { return code_; }

 private:
  RuntimeErrc code_;
};

/// Exclusive advisory lock on `<data_dir>/LOCK`, held for the object's life.
class DataDirLock {
 public:
  /// Throws RuntimeError(DataDirLocked).
  explicit DataDirLock(const std::filesystem::path& data_dir);
  ~DataDirLock();
  DataDirLock(const DataDirLock&) = delete;
  DataDirLock& operator=(const DataDirLock&) = delete;

 private:
  int fd_ = -1;
};

struct RunOptions {
  const std::atomic<bool>* stop = nullptr;  // run until this becomes true
  std::ostream* out = nullptr;              // operator messages; stdout when null
  std::chrono::milliseconds handshake_timeout{10'000};
  /// Called once the node is serving, with the HTTP port (public) or the
  /// channel port (private).
  std::function<void(int port)> on_ready;
};

/// Runs a node until `options.stop` is set. Throws RuntimeError or ConfigError.
void run_node(const NodeConfig& config, const RunOptions& options);

/// Public config: connects to the private node (or boots it, for inprocess)
/// and stores the key it announces. Private config: creates the key if needed.
/// Throws RuntimeError(ChannelHandshakeTimeout) when no announcement arrives.
AnnouncedKey provision_node(const NodeConfig& config,
                            std::chrono::milliseconds timeout = std::chrono::seconds(10));

/// Records the new mode for the private node (and the public node, when the
/// public config names the private one). Without `unlock` this always locks.
/// Returns the data directories written.
std::vector<std::filesystem::path> lock_node(const NodeConfig& config, bool unlock);

/// The public node's live pairing code, falling back to the configured one
/// before first start. Throws ConfigError for a private config.
std::string current_pairing_code(const NodeConfig& config);

}  // namespace lifeserver::node
