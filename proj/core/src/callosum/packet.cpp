#include "lifeserver/callosum/packet.hpp"

namespace lifeserver::callosum {

std::optional<MsgType> msg_type_from_code(std::uint8_t code) {
  if (code >= 0x01 && code <= 0x06) return static_cast<MsgType>(code);
  return std::nullopt;
}

const char* to_string(MsgType type) {
  switch (type) {
    case MsgType::SenseForward: return "SenseForward";
    case MsgType::SealedEnvelopeMsg: return "SealedEnvelope";
    case MsgType::KeyAnnounce: return "KeyAnnounce";
    case MsgType::QueryRequest: return "QueryRequest";
    case MsgType::QueryResponse: return "QueryResponse";
    case MsgType::Heartbeat: return "Heartbeat";
  }
  return "Unknown";
}

void FecConfig::validate() const {
  if (data_len < 1) throw std::invalid_argument("FEC data length must be at least 1");
  if (parity_len < 2) throw std::invalid_argument("FEC parity length must be at least 2");
  if (data_len + parity_len > 255) {
    throw std::invalid_argument("FEC block (data + parity) must fit in 255 bytes");
  }
}

PayloadTooLarge::PayloadTooLarge(std::size_t size)
    : std::length_error("payload of " + std::to_string(size) + " bytes exceeds " +
                        std::to_string(kMaxPayload)) {}

}  // namespace lifeserver::callosum
