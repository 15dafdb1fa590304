#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>

#include "lifeserver/common/bytes.hpp"

namespace lifeserver::callosum {

enum class Direction { PublicToPrivate, PrivateToPublic };
enum class ChannelMode { Diode, Duplex };

const char* to_string(Direction d);
const char* to_string(ChannelMode m);
ChannelMode channel_mode_from_string(const std::string& s);  // "diode" | "duplex", any case

enum class ChannelErrc { DirectionViolation, ChannelClosed, ModeLocked };

class ChannelError : public std::runtime_error {
 public:
  ChannelError(ChannelErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ChannelErrc code() const noexcept { return code_; }

 private:
  ChannelErrc code_;
};

/// Per-byte error injection applied to every transmission.
struct ErrorModel {
  double corrupt_p = 0.0;  // byte replaced by a different value
  double drop_p = 0.0;     // byte removed from the stream
  std::uint64_t seed = 0;
};

/// Physical transport under a Channel. A link never enforces direction;
/// that is the Channel's job.
class Link {
 public:
  virtual ~Link() = default;
  /// Puts bytes on the wire in `dir`; throws ChannelError(ChannelClosed).
  virtual void transmit(Direction dir, ByteView bytes) = 0;
  /// Takes whatever has arrived at the receiving end of `dir`.
  virtual Bytes receive(Direction dir) = 0;
  virtual bool connected() const = 0;
  virtual void close() = 0;
};

/// In-process wire pair with deterministic error injection. Each direction
/// draws from its own generator seeded from ErrorModel::seed, so identical
/// seeds and inputs give identical output.
class MemoryLink final : public Link {
 public:
  explicit MemoryLink(ErrorModel model = {});

  void transmit(Direction dir, ByteView bytes) override;
  Bytes receive(Direction dir) override;
  bool connected() const override { return !closed_; }
  void close() override { closed_ = true; }

 private:
  struct Lane {
    std::mutex mu;
    Bytes pending;
    std::mt19937_64 rng;
  };
  Lane& lane(Direction dir) { return dir == Direction::PublicToPrivate ? forward_ : reverse_; }

  ErrorModel model_;
  Lane forward_;
  Lane reverse_;
  std::atomic<bool> closed_{false};
};

/// Applies an ErrorModel to another link's transmissions, for simulating a
/// noisy wire over a real transport.
class NoisyLink final : public Link {
 public:
  NoisyLink(std::shared_ptr<Link> inner, ErrorModel model);

  void transmit(Direction dir, ByteView bytes) override;
  Bytes receive(Direction dir) override { return inner_->receive(dir); }
  bool connected() const override { return inner_->connected(); }
  void close() override { inner_->close(); }

 private:
  std::shared_ptr<Link> inner_;
  ErrorModel model_;
  std::mutex mu_;
  std::mt19937_64 forward_rng_;
  std::mt19937_64 reverse_rng_;
};

/// The inter-node channel: a link plus the software data diode.
///
/// In Diode mode a private->public send is refused before any byte reaches
/// the link, and the per-direction wire counters record exactly what did.
/// Switching Duplex -> Diode is always allowed; Diode -> Duplex only with
/// `unlock`.
class Channel {
 public:
  Channel(std::shared_ptr<Link> link, ChannelMode mode);

  /// Returns bytes written. Throws ChannelError(DirectionViolation) or
  /// ChannelError(ChannelClosed).
  std::size_t send(Direction dir, ByteView bytes);
  Bytes receive(Direction dir);

  ChannelMode mode() const noexcept { return mode_.load(); }
  /// Throws ChannelError(ModeLocked) for Diode -> Duplex without unlock.
  void set_mode(ChannelMode mode, bool unlock = false);

  std::uint64_t wire_bytes(Direction dir) const noexcept;
  bool is_open() const;
  void close();

 private:
  std::shared_ptr<Link> link_;
  std::atomic<ChannelMode> mode_;
  std::atomic<std::uint64_t> forward_bytes_{0};
  std::atomic<std::uint64_t> reverse_bytes_{0};
  std::mutex forward_writer_;
  std::mutex reverse_writer_;
  std::atomic<bool> closed_{false};
};

/// An in-process channel over a MemoryLink with the given error model.
std::shared_ptr<Channel> simulate_channel(const ErrorModel& model,
                                          ChannelMode mode = ChannelMode::Duplex);

}  // namespace lifeserver::callosum
