#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <vector>

#include "lifeserver/callosum/channel.hpp"
#include "lifeserver/callosum/frame.hpp"
#include "lifeserver/callosum/router.hpp"
#include "lifeserver/sealed/envelope.hpp"
#include "lifeserver/store/sense_store.hpp"

namespace lifeserver::node {

inline constexpr const char* kNodeKeyFile = "node.key";

/// Loads the X25519 secret from `<data_dir>/node.key`, creating it (mode
/// 0600) on first use.
sealed::KeyPair load_or_create_node_key(const std::filesystem::path& data_dir,
                                        const sealed::EntropySource& entropy = sealed::system_entropy());

/// The isolated node: owns the key, the sealed store and feature extraction.
/// It only ever talks through the channels attached to it, and in Diode mode
/// those refuse everything it tries to send.
class PrivateNode {
 public:
  struct Stats {
    std::uint64_t packets = 0;
    std::uint64_t frame_errors = 0;
    std::uint64_t refused_sends = 0;
    std::uint64_t envelopes = 0;
    std::uint64_t open_failures = 0;
    std::int64_t last_heartbeat = 0;
  };

  PrivateNode(std::filesystem::path data_dir, callosum::FecConfig fec,
              const sealed::EntropySource& entropy = sealed::system_entropy());

  const sealed::KeyPair& keys() const noexcept { return keys_; }

  /// Adds a connection from a public node. In Duplex mode the key is
  /// announced on it straight away.
  void attach(std::shared_ptr<callosum::Channel> channel);

  /// Drains every attached channel; returns packets handled.
  std::size_t pump();

  /// Sends KeyAnnounce on every channel; false if any refused it.
  bool announce_key();

  /// Applies to every attached channel and to ones attached later.
  void set_mode(callosum::ChannelMode mode, bool unlock = false);
  callosum::ChannelMode mode() const noexcept { return mode_.load(); }

  store::SenseStore& sealed_store() noexcept { return sealed_; }
  store::DerivedStore& derived() noexcept { return derived_; }
  Stats stats() const;
  std::size_t sessions() const;

 private:
  struct Session {
    std::shared_ptr<callosum::Channel> channel;
    callosum::FrameDecoder decoder;
  };

  bool reply(Session& s, callosum::MsgType type, std::uint64_t correlation_id, Bytes payload);
  void on_sense_forward(const callosum::Packet& p);
  void on_envelope(const callosum::Packet& p);
  void on_query(const callosum::Packet& p);
  void store_sealed(store::SenseRecord record);

  std::filesystem::path data_dir_;
  callosum::FecConfig fec_;
  sealed::KeyPair keys_;
  store::SenseStore sealed_;
  store::DerivedStore derived_;
  callosum::Router router_;
  std::atomic<callosum::ChannelMode> mode_{callosum::ChannelMode::Duplex};

  mutable std::mutex mu_;  // sessions, stats, and everything the handlers touch
  std::vector<std::unique_ptr<Session>> sessions_;
  Session* current_ = nullptr;  // session whose packet is being routed
  Stats stats_;
};

}  // namespace lifeserver::node
