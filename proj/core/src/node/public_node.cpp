#include "lifeserver/node/public_node.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "lifeserver/common/random.hpp"

namespace lifeserver::node {

using callosum::Direction;
using callosum::MsgType;
using callosum::Packet;

PublicNode::PublicNode(const NodeConfig& config, vdp::Fetcher fetcher)
    : data_dir_(config.data_dir),
      fec_(config.channel.fec),
      store_(data_dir_ / store::kPublicSenseFile),
      imported_(data_dir_ / store::kDerivedFile),
      ledger_(data_dir_ / store::kLedgerFile),
      decoder_(config.channel.fec) {
  gateway::PairingOptions pairing;
  pairing.operator_code = config.pairing_code;
  gateway_ = std::make_unique<gateway::Gateway>(
      data_dir_, store_, [this](const store::SenseRecord& r) { forward(r); }, pairing);

  mind::EngineConfig ec;
  ec.k_min = config.k_min;
  ec.min_fee = config.min_fee;
  ec.retention_ppm = config.retention_ppm;
  ec.limits = config.limits;
  engine_ = std::make_unique<mind::Engine>(ec, *this, ledger_, std::move(fetcher));

  if (std::ifstream in(data_dir_ / kAnnouncedKeyFile); in) {
    try {
      key_ = announced_key_from_json(nlohmann::json::parse(in));
    } catch (const std::exception& e) {
      spdlog::warn("ignoring {}: {}", kAnnouncedKeyFile, e.what());
    }
  }
}

void PublicNode::attach(std::shared_ptr<callosum::Channel> channel) {
  std::lock_guard lock(chan_mu_);
  channel_ = std::move(channel);
  decoder_.emplace(fec_);
  flush_pending_locked();
}

void PublicNode::detach() {
  std::lock_guard lock(chan_mu_);
  channel_.reset();
}

bool PublicNode::channel_up() const {
  std::lock_guard lock(chan_mu_);
  return channel_ && channel_->is_open();
}

bool PublicNode::send_locked(MsgType type, Bytes payload) {
  if (!channel_ || !channel_->is_open()) return false;
  Packet p;
  p.type = type;
  p.correlation_id = next_correlation_++;
  p.payload = std::move(payload);
  try {
    channel_->send(Direction::PublicToPrivate, callosum::encode_frame(p, fec_));
    return true;
  } catch (const callosum::ChannelError& e) {
    spdlog::debug("public node: {} not sent: {}", to_string(type), e.what());
    return false;
  }
}

void PublicNode::flush_pending_locked() {
  while (!pending_.empty() && send_locked(MsgType::SenseForward, pending_.front())) pending_.pop_front();
}

void PublicNode::forward(const store::SenseRecord& record) {
  Bytes payload = encode_sense_forward(record);
  std::lock_guard lock(chan_mu_);
  flush_pending_locked();
  if (pending_.empty() && send_locked(MsgType::SenseForward, payload)) return;
  pending_.push_back(std::move(payload));
  throw gateway::GatewayError(gateway::GatewayErrc::ChannelDown,
                              "private node unreachable; delivery deferred", record.record_id);
}

std::size_t PublicNode::pump() {
  std::vector<Packet> packets;
  {
    std::lock_guard lock(chan_mu_);
    if (!channel_) return 0;
    const Bytes in = channel_->receive(Direction::PrivateToPublic);
    if (!in.empty()) decoder_->feed(in);
    while (auto d = decoder_->next()) {
      if (const auto* p = std::get_if<Packet>(&*d)) {
        packets.push_back(std::move(*p));
      } else {
        spdlog::debug("public node: frame error {}", to_string(std::get<callosum::FrameError>(*d).code));
      }
    }
    flush_pending_locked();
  }
  for (const auto& p : packets) {
    try {
      on_packet(p);
    } catch (const std::exception& e) {
      spdlog::warn("public node: dropped {} packet: {}", to_string(p.type), e.what());
    }
  }
  return packets.size();
}

void PublicNode::on_packet(const Packet& p) {
  switch (p.type) {
    case MsgType::KeyAnnounce: {
      auto key = decode_key_announce(p.payload);
      std::lock_guard lock(chan_mu_);
      if (key_ && key_->key_id == key.key_id) return;
      const auto tmp = data_dir_ / (std::string(kAnnouncedKeyFile) + ".tmp");
      {
        std::ofstream out(tmp, std::ios::trunc);
        out << to_json(key).dump(2) << "\n";
        if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
      }
      std::filesystem::rename(tmp, data_dir_ / kAnnouncedKeyFile);
      spdlog::info("public node: private key {} announced", to_hex(key.key_id));
      key_ = std::move(key);
      return;
    }
    case MsgType::QueryResponse: {
      const auto e = decode_derived_export(p.payload);
      std::lock_guard lock(chan_mu_);
      if (e.after != derived_cursor_) return;  // answer to a request we already moved past
      for (const auto& r : e.records) {
        if (!imported_.contains(r.record_id)) imported_.append(r);
      }
      derived_cursor_ = e.next;
      return;
    }
    default:
      spdlog::warn("public node: unexpected {} from the private node", to_string(p.type));
  }
}

void PublicNode::request_derived() {
  std::lock_guard lock(chan_mu_);
  send_locked(MsgType::QueryRequest, encode_derived_request(derived_cursor_));
}

void PublicNode::send_heartbeat() {
  std::lock_guard lock(chan_mu_);
  send_locked(MsgType::Heartbeat, encode_heartbeat(now_ms()));
}

std::optional<AnnouncedKey> PublicNode::announced_key() const {
  std::lock_guard lock(chan_mu_);
  return key_;
}

std::size_t PublicNode::pending_forwards() const {
  std::lock_guard lock(chan_mu_);
  return pending_.size();
}

std::vector<std::string> PublicNode::startup_warnings(callosum::ChannelMode mode) const {
  std::vector<std::string> out;
  if (mode == callosum::ChannelMode::Diode && !announced_key()) {
    out.push_back(
        "channel is in diode mode and no private key has been announced: sealed ingestion will queue "
        "until the node is provisioned (unlock, provision, lock)");
  }
  return out;
}

std::vector<store::SenseRecord> PublicNode::candidates(const store::RecordFilter& filter) const {
  std::vector<store::SenseRecord> out;
  for (auto& r : store_.query(filter)) {
    if (r.privacy != store::Privacy::Sealed) out.push_back(std::move(r));
  }

  // Features of a sealed record are presented as one record standing in for
  // it, with the stub's type, source and time.
  std::map<std::string, std::map<std::string, store::FieldValue>> by_origin;
  for (const auto& d : imported_.all()) by_origin[d.origin_record_id].emplace(d.feature_name, d.feature_value);
  for (auto& [origin, features] : by_origin) {
    const auto stub = store_.get(origin);
    if (!stub) continue;
    store::SenseRecord view;
    view.record_id = origin;
    view.source_id = stub->source_id;
    view.source_vdp = stub->source_vdp;
    view.timestamp = stub->timestamp;
    view.record_type = stub->record_type;
    view.privacy = store::Privacy::Private;
    view.fields = std::move(features);
    if (filter.matches(view)) out.push_back(std::move(view));
  }
  return out;
}

}  // namespace lifeserver::node
