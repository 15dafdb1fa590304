#pragma once

#include <memory>
#include <mutex>

#include "lifeserver/node/config.hpp"
#include "lifeserver/node/private_node.hpp"
#include "lifeserver/node/public_node.hpp"

namespace lifeserver::node {

/// Both nodes in one process over an in-memory channel. Traffic moves only
/// when sync() runs, which keeps tests deterministic; `lifeserver run`
/// calls it from a loop.
class Deployment {
 public:
  Deployment(const NodeConfig& public_config, const NodeConfig& private_config, vdp::Fetcher fetcher);

  PublicNode& public_node() noexcept { return *public_; }
  PrivateNode& private_node() noexcept { return *private_; }
  callosum::Channel& channel() noexcept { return *channel_; }

  /// Pumps both nodes until neither handles another packet (or `max_rounds`).
  void sync(int max_rounds = 64);

  /// Duplex KeyAnnounce and delivery to the public node. Throws
  /// ChannelError(DirectionViolation) in Diode mode.
  AnnouncedKey provision();

  /// Switches to Diode and records it in the private data_dir.
  void lock();
  /// Back to Duplex; the explicit operator override.
  void unlock();

  /// Simulates losing and regaining the wire between the nodes.
  void disconnect();
  void reconnect();

 private:
  NodeConfig private_config_;
  std::shared_ptr<callosum::Channel> channel_;
  std::unique_ptr<PrivateNode> private_;
  std::unique_ptr<PublicNode> public_;
  std::mutex sync_mu_;
};

}  // namespace lifeserver::node
