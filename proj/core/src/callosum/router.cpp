#include "lifeserver/callosum/router.hpp"

#include <string>

namespace lifeserver::callosum {

NoHandlerRegistered::NoHandlerRegistered(MsgType type)
    : std::runtime_error(std::string("no handler registered for ") + to_string(type)),
      type_(type) {}

void Router::on(MsgType type, Handler handler) { handlers_[type] = std::move(handler); }

void Router::route(const Packet& packet) const {
  const auto it = handlers_.find(packet.type);
  if (it == handlers_.end()) throw NoHandlerRegistered(packet.type);
  it->second(packet);
}

}  // namespace lifeserver::callosum
