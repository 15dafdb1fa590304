#include "lifeserver/callosum/frame.hpp"

#include <algorithm>

#include "lifeserver/callosum/crc32.hpp"

namespace lifeserver::callosum {

const char* to_string(FrameErrc code) {
  switch (code) {
    case FrameErrc::CrcMismatch: return "CrcMismatch";
    case FrameErrc::FecDecodeFailure: return "FecDecodeFailure";
    case FrameErrc::BadVersion: return "BadVersion";
    case FrameErrc::UnknownMsgType: return "UnknownMsgType";
    case FrameErrc::Truncated: return "Truncated";
    case FrameErrc::BadLength: return "BadLength";
  }
  return "Unknown";
}

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

Bytes encode_frame(const Packet& packet, const FecConfig& fec) {
  if (packet.payload.size() > kMaxPayload) throw PayloadTooLarge(packet.payload.size());
  if (fec.enabled) fec.validate();

  Bytes plain;
  plain.reserve(kHeaderLen + packet.payload.size() + kCrcLen);
  plain.push_back(packet.version);
  plain.push_back(static_cast<std::uint8_t>(packet.type));
  plain.push_back(fec.enabled ? kFlagFec : 0x00);
  plain.push_back(0x00);
  put_u64_be(plain, packet.correlation_id);
  put_u32_be(plain, static_cast<std::uint32_t>(packet.payload.size()));
  plain.insert(plain.end(), packet.payload.begin(), packet.payload.end());
  put_u32_be(plain, crc32(plain));

  if (!fec.enabled) {
    plain.insert(plain.begin(), kMagic.begin(), kMagic.end());
    return plain;
  }

  Bytes out(kMagic.begin(), kMagic.end());

  const ReedSolomon rs(GaloisField::gf256(), fec.parity_len);
  const std::size_t blocks = ceil_div(plain.size(), fec.data_len);
  plain.resize(blocks * fec.data_len, 0);
  out.reserve(out.size() + blocks * fec.block_len());
  for (std::size_t b = 0; b < blocks; ++b) {
    const ByteView block(plain.data() + b * fec.data_len, fec.data_len);
    out.insert(out.end(), block.begin(), block.end());
    const Bytes parity = rs.parity(block);
    out.insert(out.end(), parity.begin(), parity.end());
  }
  return out;
}

FrameDecoder::FrameDecoder(FecConfig fec) : fec_(fec) {
  if (fec_.enabled) {
    fec_.validate();
    rs_.emplace(GaloisField::gf256(), fec_.parity_len);
  }
}

void FrameDecoder::feed(ByteView bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

std::optional<FrameDecoder::Candidate> FrameDecoder::find_candidate() const {
  // Coded frames tolerate damage to the (uncoded) magic: two matching bytes
  // nominate a candidate that must then survive RS decoding and the CRC.
  const int needed = fec_.enabled ? 2 : 4;
  for (std::size_t i = pos_; i + kMagic.size() <= buf_.size(); ++i) {
    int matches = 0;
    for (std::size_t j = 0; j < kMagic.size(); ++j) matches += buf_[i + j] == kMagic[j] ? 1 : 0;
    if (matches >= needed) return Candidate{i, matches == 4};
  }
  return std::nullopt;
}

FrameDecoder::Attempt FrameDecoder::from_plain(const Bytes& plain, std::size_t frame_len) const {
  Attempt a{};
  const std::size_t len = get_u32_be(plain.data() + 12);
  const std::size_t body = kHeaderLen + len;
  const std::uint32_t expected = get_u32_be(plain.data() + body);
  if (crc32(ByteView(plain.data(), body)) != expected) {
    a.kind = Attempt::Kind::Bad;
    a.error = FrameErrc::CrcMismatch;
    return a;
  }
  // The frame is intact, so a bad version or type skips all of it.
  a.frame_len = frame_len;
  if (plain[0] != kProtocolVersion) {
    a.kind = Attempt::Kind::Bad;
    a.error = FrameErrc::BadVersion;
    a.skip_frame = true;
    return a;
  }
  const auto type = msg_type_from_code(plain[1]);
  if (!type) {
    a.kind = Attempt::Kind::Bad;
    a.error = FrameErrc::UnknownMsgType;
    a.skip_frame = true;
    return a;
  }
  a.kind = Attempt::Kind::Ok;
  a.packet.version = plain[0];
  a.packet.type = *type;
  a.packet.correlation_id = get_u64_be(plain.data() + 4);
  a.packet.payload.assign(plain.begin() + kHeaderLen,
                          plain.begin() + static_cast<std::ptrdiff_t>(body));
  return a;
}

FrameDecoder::Attempt FrameDecoder::attempt_plain(std::size_t pos) const {
  Attempt a{};
  const std::size_t avail = buf_.size() - pos;
  if (avail < kMagic.size() + kHeaderLen) return a;  // NeedMore
  const std::uint8_t* h = buf_.data() + pos + kMagic.size();
  const std::size_t len = get_u32_be(h + 12);
  if (len > kMaxPayload) {
    a.kind = Attempt::Kind::Bad;
    a.error = FrameErrc::BadLength;
    return a;
  }
  const std::size_t frame_len = kMagic.size() + kHeaderLen + len + kCrcLen;
  if (avail < frame_len) return a;
  const Bytes plain(h, h + kHeaderLen + len + kCrcLen);
  return from_plain(plain, frame_len);
}

FrameDecoder::Attempt FrameDecoder::attempt_fec(std::size_t pos) const {
  Attempt a{};
  const std::size_t avail = buf_.size() - pos;
  const std::size_t k = fec_.data_len;
  const std::size_t bl = fec_.block_len();
  const std::uint8_t* coded = buf_.data() + pos + kMagic.size();

  Bytes plain;
  auto decode_blocks = [&](std::size_t from, std::size_t to) {
    for (std::size_t b = from; b < to; ++b) {
      auto d = rs_->try_decode(ByteView(coded + b * bl, bl));
      if (!d) return false;
      plain.insert(plain.end(), d->data.begin(), d->data.end());
    }
    return true;
  };

  const std::size_t header_blocks = ceil_div(kHeaderLen, k);
  if (avail < kMagic.size() + header_blocks * bl) return a;
  if (!decode_blocks(0, header_blocks)) {
    a.kind = Attempt::Kind::Bad;
    a.error = FrameErrc::FecDecodeFailure;
    return a;
  }
  const std::size_t len = get_u32_be(plain.data() + 12);
  if (len > kMaxPayload) {
    a.kind = Attempt::Kind::Bad;
    a.error = FrameErrc::BadLength;
    return a;
  }
  const std::size_t blocks = ceil_div(kHeaderLen + len + kCrcLen, k);
  const std::size_t frame_len = kMagic.size() + blocks * bl;
  if (avail < frame_len) return a;
  if (!decode_blocks(header_blocks, blocks)) {
    a.kind = Attempt::Kind::Bad;
    a.error = FrameErrc::FecDecodeFailure;
    return a;
  }
  return from_plain(plain, frame_len);
}

FrameDecoder::Attempt FrameDecoder::attempt(std::size_t pos) const {
  return fec_.enabled ? attempt_fec(pos) : attempt_plain(pos);
}

std::optional<Decoded> FrameDecoder::step(bool at_end) {
  while (true) {
    const auto cand = find_candidate();
    if (!cand) {
      // Keep a possible partial magic at the tail.
      const std::size_t keep = kMagic.size() - 1;
      if (buf_.size() - pos_ > keep) pos_ = buf_.size() - keep;
      compact();
      return std::nullopt;
    }
    pos_ = cand->pos;
    const std::size_t offset = base_ + pos_;
    Attempt a = attempt(pos_);

    if (a.kind == Attempt::Kind::Ok) {
      pos_ += a.frame_len;
      compact();
      return std::move(a.packet);
    }
    if (a.kind == Attempt::Kind::NeedMore) {
      if (!at_end) return std::nullopt;
      ++pos_;
      if (cand->exact) return FrameError{FrameErrc::Truncated, offset};
      continue;
    }
    pos_ += a.skip_frame ? a.frame_len : 1;
    if (cand->exact) return FrameError{a.error, offset};
  }
}

std::optional<Decoded> FrameDecoder::next() { return step(false); }

std::vector<Decoded> FrameDecoder::finish() {
  std::vector<Decoded> out;
  while (auto d = step(true)) out.push_back(std::move(*d));
  base_ += buf_.size();
  buf_.clear();
  pos_ = 0;
  return out;
}

void FrameDecoder::compact() {
  if (pos_ > 4096 && pos_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
    base_ += pos_;
    pos_ = 0;
  }
}

std::vector<Decoded> decode_stream(ByteView stream, const FecConfig& fec) {
  FrameDecoder decoder(fec);
  decoder.feed(stream);
  return decoder.finish();
}

}  // namespace lifeserver::callosum
