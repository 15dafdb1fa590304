#include "lifeserver/callosum/tcp_link.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <stdexcept>
#include <system_error>
#include <thread>

namespace lifeserver::callosum {
namespace {

sockaddr_in make_addr(const std::string& host, int port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  const std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) {
    throw std::invalid_argument("not an IPv4 address: " + host);
  }
  return addr;
}

}  // namespace

std::pair<std::string, int> split_host_port(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw std::invalid_argument("expected host:port, got '" + endpoint + "'");
  }
  int port = 0;
  try {
    port = std::stoi(endpoint.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad port in '" + endpoint + "'");
  }
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range in '" + endpoint + "'");
  return {endpoint.substr(0, colon), port};
}

TcpLink::TcpLink(int fd, Direction outbound) : fd_(fd), outbound_(outbound) {
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpLink::~TcpLink() { close(); }

std::shared_ptr<TcpLink> TcpLink::connect(const std::string& host, int port, Direction outbound,
                                          std::chrono::milliseconds timeout) {
  const auto addr = make_addr(host, port);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw std::system_error(errno, std::generic_category(), "socket");
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
      return std::make_shared<TcpLink>(fd, outbound);
    }
    ::close(fd);
    if (std::chrono::steady_clock::now() >= deadline) {
      throw ChannelError(ChannelErrc::ChannelClosed,
                         "no peer at " + host + ":" + std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

void TcpLink::transmit(Direction dir, ByteView bytes) {
  if (dir != outbound_) {
    throw std::logic_error(std::string("this endpoint cannot transmit ") + to_string(dir));
  }
  if (!connected()) throw ChannelError(ChannelErrc::ChannelClosed, "tcp link closed");
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      closed_ = true;
      throw ChannelError(ChannelErrc::ChannelClosed, "tcp send failed");
    }
    sent += static_cast<std::size_t>(n);
  }
}

Bytes TcpLink::receive(Direction dir) {
  Bytes out;
  if (dir == outbound_ || !connected()) return out;
  std::uint8_t buf[16384];
  while (true) {
    const ssize_t n = ::recv(fd_, buf, sizeof(buf), MSG_DONTWAIT);
    if (n > 0) {
      out.insert(out.end(), buf, buf + n);
      continue;
    }
    if (n == 0) closed_ = true;  // orderly shutdown by the peer
    else if (errno == EINTR) continue;
    else if (errno != EAGAIN && errno != EWOULDBLOCK) closed_ = true;
    break;
  }
  return out;
}

bool TcpLink::wait_readable(std::chrono::milliseconds timeout) const {
  if (!connected()) return false;
  pollfd p{fd_, POLLIN, 0};
  return ::poll(&p, 1, static_cast<int>(timeout.count())) > 0;
}

void TcpLink::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
  closed_ = true;
}

TcpListener::TcpListener(const std::string& host, int port) {
  const auto addr = make_addr(host, port);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw std::system_error(errno, std::generic_category(), "socket");
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 4) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    throw std::system_error(err, std::generic_category(),
                            "listen on " + host + ":" + std::to_string(port));
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::shared_ptr<TcpLink> TcpListener::accept(Direction outbound, std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  if (::poll(&p, 1, static_cast<int>(timeout.count())) <= 0) return nullptr;
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) return nullptr;
  return std::make_shared<TcpLink>(fd, outbound);
}

}  // namespace lifeserver::callosum
