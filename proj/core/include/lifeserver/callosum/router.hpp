#pragma once

#include <functional>
#include <map>
#include <stdexcept>

#include "lifeserver/callosum/packet.hpp"

namespace lifeserver::callosum {

class NoHandlerRegistered : public std::runtime_error {
 public:
  explicit NoHandlerRegistered(MsgType type);
  MsgType type() const noexcept { return type_; }

 private:
  MsgType type_;
};

/// Dispatches each decoded packet to the one service registered for its type.
class Router {
 public:
  using Handler = std::function<void(const Packet&)>;

  /// Replaces any previous handler for `type`.
  void on(MsgType type, Handler handler);
  bool has(MsgType type) const { return handlers_.contains(type); }

  /// Throws NoHandlerRegistered.
  void route(const Packet& packet) const;

 private:
  std::map<MsgType, Handler> handlers_;
};

}  // namespace lifeserver::callosum
