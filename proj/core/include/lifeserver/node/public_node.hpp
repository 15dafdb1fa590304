#pragma once

#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lifeserver/callosum/channel.hpp"
#include "lifeserver/callosum/frame.hpp"
#include "lifeserver/gateway/gateway.hpp"
#include "lifeserver/mind/engine.hpp"
#include "lifeserver/node/config.hpp"
#include "lifeserver/node/messages.hpp"
#include "lifeserver/store/sense_store.hpp"

namespace lifeserver::node {

inline constexpr const char* kAnnouncedKeyFile = "announced_key.json";

/// The Internet-facing node: Sense/Act gateway, Mind engine, public store and
/// ledger. Sealed records leave through the attached channel; while it is
/// down they wait in memory (ciphertext only) and ingest reports ChannelDown.
class PublicNode final : public mind::RecordSource {
 public:
  PublicNode(const NodeConfig& config, vdp::Fetcher fetcher);

  gateway::Gateway& gateway() noexcept { return *gateway_; }
  mind::Engine& engine() noexcept { return *engine_; }
  store::SenseStore& store() noexcept { return store_; }
  store::DerivedStore& imported() noexcept { return imported_; }
  store::Ledger& ledger() noexcept { return ledger_; }

  void attach(std::shared_ptr<callosum::Channel> channel);
  void detach();
  bool channel_up() const;

  /// Handles whatever the private node sent and retries queued forwards.
  /// Returns packets handled.
  std::size_t pump();
  void request_derived();
  void send_heartbeat();

  std::optional<AnnouncedKey> announced_key() const;
  std::size_t pending_forwards() const;

  /// Conditions an operator should hear about at startup.
  std::vector<std::string> startup_warnings(callosum::ChannelMode mode) const;

  std::vector<store::SenseRecord> candidates(const store::RecordFilter& filter) const override;

 private:
  void forward(const store::SenseRecord& record);
  bool send_locked(callosum::MsgType type, Bytes payload);
  void flush_pending_locked();
  void on_packet(const callosum::Packet& p);

  std::filesystem::path data_dir_;
  callosum::FecConfig fec_;
  store::SenseStore store_;
  store::DerivedStore imported_;
  store::Ledger ledger_;
  std::unique_ptr<gateway::Gateway> gateway_;
  std::unique_ptr<mind::Engine> engine_;

  mutable std::mutex chan_mu_;
  std::shared_ptr<callosum::Channel> channel_;
  std::optional<callosum::FrameDecoder> decoder_;
  std::deque<Bytes> pending_;  // SenseForward payloads
  std::uint64_t next_correlation_ = 1;
  std::size_t derived_cursor_ = 0;
  std::optional<AnnouncedKey> key_;
};

}  // namespace lifeserver::node
