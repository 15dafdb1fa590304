#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "lifeserver/common/bytes.hpp"

namespace lifeserver::callosum {

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kMaxPayload = 1u << 20;  // 1 MiB
inline constexpr std::array<std::uint8_t, 4> kMagic = {0x43, 0x41, 0x4C, 0x31};  // "CAL1"

/// Wire codes are fixed; unknown codes are a decode error.
enum class MsgType : std::uint8_t {
  SenseForward = 0x01,
  SealedEnvelopeMsg = 0x02,
  KeyAnnounce = 0x03,
  QueryRequest = 0x04,
  QueryResponse = 0x05,
  Heartbeat = 0x06,
};

std::optional<MsgType> msg_type_from_code(std::uint8_t code);
const char* to_string(MsgType type);

struct Packet {
  std::uint8_t version = kProtocolVersion;
  MsgType type = MsgType::Heartbeat;
  std::uint64_t correlation_id = 0;
  Bytes payload;

  bool operator==(const Packet&) const = default;
};

/// Reed-Solomon protection of everything after the magic. The defaults are
/// RS(255,223); FEC itself is off unless enabled.
struct FecConfig {
  bool enabled = false;
  std::size_t data_len = 223;
  std::size_t parity_len = 32;

  /// Throws std::invalid_argument unless 1 <= data_len, 2 <= parity_len and
  /// data_len + parity_len <= 255.
  void validate() const;
  std::size_t block_len() const noexcept { return data_len + parity_len; }
};

class PayloadTooLarge : public std::length_error {
 public:
  explicit PayloadTooLarge(std::size_t size);
};

}  // namespace lifeserver::callosum
