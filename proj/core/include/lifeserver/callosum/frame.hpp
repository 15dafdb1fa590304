#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "lifeserver/callosum/packet.hpp"
#include "lifeserver/callosum/reed_solomon.hpp"

namespace lifeserver::callosum {

// Wire layout before FEC:
//   magic[4] = "CAL1"
//   version[1] msg_type[1] flags[1] reserved[1] correlation_id[8] payload_len[4]
//   payload[payload_len]
//   crc32[4] over version..payload
// Integers are big-endian. With FEC every byte after the magic is cut into
// data_len blocks (the last zero-padded) and each block carries parity_len
// Reed-Solomon symbols. The magic is never coded.

inline constexpr std::size_t kHeaderLen = 16;
inline constexpr std::size_t kCrcLen = 4;
inline constexpr std::uint8_t kFlagFec = 0x01;

enum class FrameErrc {
  CrcMismatch,
  FecDecodeFailure,
  BadVersion,
  UnknownMsgType,
  Truncated,
  BadLength,  // declared payload_len above kMaxPayload
};

const char* to_string(FrameErrc code);

struct FrameError {
  FrameErrc code;
  std::size_t offset = 0;  // stream offset of the magic that started the candidate

  bool operator==(const FrameError&) const = default;
};

using Decoded = std::variant<Packet, FrameError>;

/// Throws PayloadTooLarge above kMaxPayload and std::invalid_argument for an
/// invalid FecConfig.
Bytes encode_frame(const Packet& packet, const FecConfig& fec = {});

/// Incremental decoder for one direction of a channel. Feed bytes as they
/// arrive and call next() until it returns nullopt. After a bad frame the
/// decoder moves one byte forward and scans for the next magic, so a damaged
/// length field cannot desynchronize the stream.
class FrameDecoder {
 public:
  explicit FrameDecoder(FecConfig fec = {});

  void feed(ByteView bytes);

  /// The next packet or error, or nullopt if more bytes are needed.
  std::optional<Decoded> next();

  /// Declares end of stream: whatever is left is reported (an incomplete
  /// frame becomes Truncated) and the buffer is cleared.
  std::vector<Decoded> finish();

  std::size_t buffered() const noexcept { return buf_.size() - pos_; }

 private:
  struct Candidate {
    std::size_t pos;
    bool exact;
  };
  struct Attempt {
    enum class Kind { NeedMore, Ok, Bad } kind;
    Packet packet;
    FrameErrc error = FrameErrc::CrcMismatch;
    std::size_t frame_len = 0;  // consumed on Ok, or skipped on Bad if skip_frame
    bool skip_frame = false;
  };

  std::optional<Candidate> find_candidate() const;
  Attempt attempt(std::size_t pos) const;
  Attempt attempt_plain(std::size_t pos) const;
  Attempt attempt_fec(std::size_t pos) const;
  Attempt from_plain(const Bytes& plain, std::size_t frame_len) const;
  std::optional<Decoded> step(bool at_end);
  void compact();

  FecConfig fec_;
  std::optional<ReedSolomon> rs_;
  Bytes buf_;
  std::size_t pos_ = 0;
  std::size_t base_ = 0;  // stream offset of buf_[0]
};

/// Decodes a complete byte stream in one go.
std::vector<Decoded> decode_stream(ByteView stream, const FecConfig& fec = {});

}  // namespace lifeserver::callosum
