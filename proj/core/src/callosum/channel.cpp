#include "lifeserver/callosum/channel.hpp"

#include <algorithm>
#include <cctype>

namespace lifeserver::callosum {

const char* to_string(Direction d) {
  return d == Direction::PublicToPrivate ? "public->private" : "private->public";
}

const char* to_string(ChannelMode m) { return m == ChannelMode::Diode ? "diode" : "duplex"; }

ChannelMode channel_mode_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "diode") return ChannelMode::Diode;
  if (lower == "duplex") return ChannelMode::Duplex;
  throw std::invalid_argument("channel mode must be 'diode' or 'duplex', got '" + s + "'");
}

namespace {

void inject(const ErrorModel& model, std::mt19937_64& rng, ByteView bytes, Bytes& out) {
  if (model.corrupt_p <= 0.0 && model.drop_p <= 0.0) {
    out.insert(out.end(), bytes.begin(), bytes.end());
    return;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> flip(1, 255);
  for (std::uint8_t b : bytes) {
    if (model.drop_p > 0.0 && u(rng) < model.drop_p) continue;
    if (model.corrupt_p > 0.0 && u(rng) < model.corrupt_p) {
      b ^= static_cast<std::uint8_t>(flip(rng));
    }
    out.push_back(b);
  }
}

constexpr std::uint64_t kReverseSeedMix = 0x9E3779B97F4A7C15ull;

}  // namespace

MemoryLink::MemoryLink(ErrorModel model) : model_(model) {
  forward_.rng.seed(model.seed);
  reverse_.rng.seed(model.seed ^ kReverseSeedMix);
}

void MemoryLink::transmit(Direction dir, ByteView bytes) {
  if (closed_) throw ChannelError(ChannelErrc::ChannelClosed, "link closed");
  Lane& l = lane(dir);
  std::lock_guard lock(l.mu);
  inject(model_, l.rng, bytes, l.pending);
}

Bytes MemoryLink::receive(Direction dir) {
  Lane& l = lane(dir);
  std::lock_guard lock(l.mu);
  Bytes out;
  out.swap(l.pending);
  return out;
}

NoisyLink::NoisyLink(std::shared_ptr<Link> inner, ErrorModel model)
    : inner_(std::move(inner)), model_(model) {
  forward_rng_.seed(model.seed);
  reverse_rng_.seed(model.seed ^ kReverseSeedMix);
}

void NoisyLink::transmit(Direction dir, ByteView bytes) {
  Bytes noisy;
  {
    std::lock_guard lock(mu_);
    inject(model_, dir == Direction::PublicToPrivate ? forward_rng_ : reverse_rng_, bytes, noisy);
  }
  inner_->transmit(dir, noisy);
}

Channel::Channel(std::shared_ptr<Link> link, ChannelMode mode)
    : link_(std::move(link)), mode_(mode) {}

std::size_t Channel::send(Direction dir, ByteView bytes) {
  if (closed_ || !link_->connected()) {
    throw ChannelError(ChannelErrc::ChannelClosed, "channel closed");
  }
  const bool reverse = dir == Direction::PrivateToPublic;
  std::lock_guard writer(reverse ? reverse_writer_ : forward_writer_);
  // Checked under the writer lock so a concurrent lockdown cannot race a send.
  if (reverse && mode_.load() == ChannelMode::Diode) {
    throw ChannelError(ChannelErrc::DirectionViolation,
                       "diode mode forbids private->public transmission");
  }
  link_->transmit(dir, bytes);
  (reverse ? reverse_bytes_ : forward_bytes_) += bytes.size();
  return bytes.size();
}

Bytes Channel::receive(Direction dir) { return link_->receive(dir); }

void Channel::set_mode(ChannelMode mode, bool unlock) {
  std::scoped_lock lock(forward_writer_, reverse_writer_);
  if (mode_.load() == ChannelMode::Diode && mode == ChannelMode::Duplex && !unlock) {
    throw ChannelError(ChannelErrc::ModeLocked, "leaving diode mode requires an explicit unlock");
  }
  mode_.store(mode);
}

std::uint64_t Channel::wire_bytes(Direction dir) const noexcept {
  return dir == Direction::PublicToPrivate ? forward_bytes_.load() : reverse_bytes_.load();
}

bool Channel::is_open() const { return !closed_ && link_->connected(); }

void Channel::close() {
  closed_ = true;
  link_->close();
}

std::shared_ptr<Channel> simulate_channel(const ErrorModel& model, ChannelMode mode) {
  return std::make_shared<Channel>(std::make_shared<MemoryLink>(model), mode);
}

}  // namespace lifeserver::callosum
