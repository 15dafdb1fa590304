#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "lifeserver/callosum/channel.hpp"

namespace lifeserver::callosum {

/// One process's end of a TCP connection between the two nodes. It can only
/// transmit in its own outbound direction and only receive in the other;
/// which direction may actually be used is still decided by the Channel.
class TcpLink final : public Link {
 public:
  TcpLink(int fd, Direction outbound);
  ~TcpLink() override;
  TcpLink(const TcpLink&) = delete;
  TcpLink& operator=(const TcpLink&) = delete;

  /// Throws ChannelError(ChannelClosed) if no connection is made in time.
  static std::shared_ptr<TcpLink> connect(const std::string& host, int port, Direction outbound,
                                          std::chrono::milliseconds timeout);

  void transmit(Direction dir, ByteView bytes) override;
  Bytes receive(Direction dir) override;
  bool connected() const override { return fd_ >= 0 && !closed_; }
  void close() override;

  /// Blocks up to `timeout` for inbound bytes.
  bool wait_readable(std::chrono::milliseconds timeout) const;

 private:
  int fd_;
  Direction outbound_;
  std::atomic<bool> closed_{false};
};

class TcpListener {
 public:
  /// Binds and listens; throws std::system_error (EADDRINUSE etc).
  TcpListener(const std::string& host, int port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const noexcept { return port_; }

  /// nullptr on timeout.
  std::shared_ptr<TcpLink> accept(Direction outbound, std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  int port_ = 0;
};

/// Splits "host:port". Throws std::invalid_argument.
std::pair<std::string, int> split_host_port(const std::string& endpoint);

}  // namespace lifeserver::callosum
