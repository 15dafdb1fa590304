#include "lifeserver/node/private_node.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <system_error>

#include <spdlog/spdlog.h>

#include "lifeserver/common/random.hpp"
#include "lifeserver/mind/features.hpp"
#include "lifeserver/node/messages.hpp"

namespace lifeserver::node {

using callosum::Direction;
using callosum::MsgType;
using callosum::Packet;

sealed::KeyPair load_or_create_node_key(const std::filesystem::path& data_dir,
                                        const sealed::EntropySource& entropy) {
  std::filesystem::create_directories(data_dir);
  const auto path = data_dir / kNodeKeyFile;

  if (const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC); fd >= 0) {
    std::uint8_t buf[sealed::kSecretKeySize];
    const auto n = ::read(fd, buf, sizeof buf);
    ::close(fd);
    if (n != static_cast<ssize_t>(sizeof buf)) {
      sealed::wipe(buf);
      throw std::runtime_error(path.string() + " is not a " + std::to_string(sizeof buf) + "-byte key");
    }
    auto keys = sealed::keypair_from_secret(buf);
    sealed::wipe(buf);
    return keys;
  }

  auto keys = sealed::generate_keypair(entropy);
  const auto tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
  if (fd < 0) throw std::system_error(errno, std::generic_category(), "create " + tmp);
  const auto secret = keys.private_key.bytes();
  const bool ok = ::write(fd, secret.data(), secret.size()) == static_cast<ssize_t>(secret.size()) &&
                  ::fsync(fd) == 0;
  ::close(fd);
  if (!ok) throw std::system_error(errno, std::generic_category(), "write " + tmp);
  std::filesystem::rename(tmp, path);
  return keys;
}

PrivateNode::PrivateNode(std::filesystem::path data_dir, callosum::FecConfig fec,
                         const sealed::EntropySource& entropy)
    : data_dir_(std::move(data_dir)),
      fec_(fec),
      keys_(load_or_create_node_key(data_dir_, entropy)),
      sealed_(data_dir_ / store::kPrivateSenseFile),
      derived_(data_dir_ / store::kDerivedFile) {
  router_.on(MsgType::SenseForward, [this](const Packet& p) { on_sense_forward(p); });
  router_.on(MsgType::SealedEnvelopeMsg, [this](const Packet& p) { on_envelope(p); });
  router_.on(MsgType::QueryRequest, [this](const Packet& p) { on_query(p); });
  router_.on(MsgType::Heartbeat, [this](const Packet& p) { stats_.last_heartbeat = decode_heartbeat(p.payload); });
}

void PrivateNode::attach(std::shared_ptr<callosum::Channel> channel) {
  std::lock_guard lock(mu_);
  channel->set_mode(mode_.load(), true);
  sessions_.push_back(std::make_unique<Session>(Session{std::move(channel), callosum::FrameDecoder(fec_)}));
  if (mode_.load() == callosum::ChannelMode::Duplex) {
    reply(*sessions_.back(), MsgType::KeyAnnounce, 0, encode_key_announce(keys_));
  }
}

bool PrivateNode::reply(Session& s, MsgType type, std::uint64_t correlation_id, Bytes payload) {
  Packet p;
  p.type = type;
  p.correlation_id = correlation_id;
  p.payload = std::move(payload);
  try {
    s.channel->send(Direction::PrivateToPublic, callosum::encode_frame(p, fec_));
    return true;
  } catch (const callosum::ChannelError& e) {
    ++stats_.refused_sends;
    spdlog::debug("private node: {} not sent: {}", to_string(type), e.what());
    return false;
  }
}

std::size_t PrivateNode::pump() {
  std::lock_guard lock(mu_);
  std::size_t handled = 0;
  for (auto& s : sessions_) {
    const Bytes in = s->channel->receive(Direction::PublicToPrivate);
    if (!in.empty()) s->decoder.feed(in);
    current_ = s.get();
    while (auto d = s->decoder.next()) {
      if (const auto* err = std::get_if<callosum::FrameError>(&*d)) {
        ++stats_.frame_errors;
        spdlog::debug("private node: frame error {} at {}", to_string(err->code), err->offset);
        continue;
      }
      ++stats_.packets;
      ++handled;
      try {
        router_.route(std::get<Packet>(*d));
      } catch (const std::exception& e) {
        spdlog::warn("private node: dropped {} packet: {}", to_string(std::get<Packet>(*d).type), e.what());
      }
    }
    current_ = nullptr;
  }
  std::erase_if(sessions_, [](const auto& s) { return !s->channel->is_open() && s->decoder.buffered() == 0; });
  return handled;
}

bool PrivateNode::announce_key() {
  std::lock_guard lock(mu_);
  bool all = !sessions_.empty();
  for (auto& s : sessions_) all = reply(*s, MsgType::KeyAnnounce, 0, encode_key_announce(keys_)) && all;
  return all;
}

void PrivateNode::set_mode(callosum::ChannelMode mode, bool unlock) {
  std::lock_guard lock(mu_);
  if (mode_.load() == callosum::ChannelMode::Diode && mode == callosum::ChannelMode::Duplex && !unlock) {
    throw callosum::ChannelError(callosum::ChannelErrc::ModeLocked, "leaving diode mode requires an explicit unlock");
  }
  // Lock the channels before the node flag, so nothing can slip out between.
  for (auto& s : sessions_) s->channel->set_mode(mode, unlock);
  mode_.store(mode);
}

PrivateNode::Stats PrivateNode::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::size_t PrivateNode::sessions() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

void PrivateNode::store_sealed(store::SenseRecord record) {
  const std::string id = record.record_id;
  if (!sealed_.contains(id)) sealed_.append(record);
  ++stats_.envelopes;
  if (!derived_.for_origin(id).empty()) return;
  try {
    for (auto& f : mind::extract_features(keys_, *record.sealed_payload, id, record.timestamp)) {
      derived_.append(std::move(f));
    }
  } catch (const sealed::SealError& e) {
    ++stats_.open_failures;
    spdlog::warn("private node: envelope for {} not opened: {}", id, e.what());
  }
}

void PrivateNode::on_sense_forward(const Packet& p) {
  auto f = decode_sense_forward(p.payload);
  store::SenseRecord record = std::move(f.stub);
  record.sealed_stub = false;
  record.sealed_payload = std::move(f.envelope);
  store_sealed(std::move(record));
}

void PrivateNode::on_envelope(const Packet& p) {
  // A bare envelope has no metadata to store; only its features are kept.
  const auto env = sealed::parse_envelope(p.payload);
  const std::string origin = "envelope-" + std::to_string(p.correlation_id);
  if (!derived_.for_origin(origin).empty()) return;
  try {
    for (auto& f : mind::extract_features(keys_, env, origin, now_ms())) derived_.append(std::move(f));
  } catch (const sealed::SealError& e) {
    ++stats_.open_failures;
    spdlog::warn("private node: bare envelope not opened: {}", e.what());
  }
}

void PrivateNode::on_query(const Packet& p) {
  const auto after = decode_derived_request(p.payload);
  if (!after || !current_) return;
  DerivedExport e;
  e.after = *after;
  const auto all = derived_.all();
  // Bounded so one response stays far below the frame payload limit.
  constexpr std::size_t kBatch = 512;
  std::size_t i = *after;
  for (; i < all.size() && e.records.size() < kBatch; ++i) {
    if (mind::is_exportable(all[i].feature_name)) e.records.push_back(all[i]);
  }
  e.next = std::max(i, *after);
  reply(*current_, MsgType::QueryResponse, p.correlation_id, encode_derived_export(e));
}

}  // namespace lifeserver::node
