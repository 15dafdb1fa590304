#include "lifeserver/node/deployment.hpp"

namespace lifeserver::node {

Deployment::Deployment(const NodeConfig& public_config, const NodeConfig& private_config,
                       vdp::Fetcher fetcher)
    : private_config_(private_config) {
  const auto mode = effective_mode(private_config);
  channel_ = callosum::simulate_channel(public_config.channel.error, mode);
  private_ = std::make_unique<PrivateNode>(private_config.data_dir, private_config.channel.fec);
  private_->set_mode(mode, true);
  public_ = std::make_unique<PublicNode>(public_config, std::move(fetcher));
  public_->attach(channel_);
  private_->attach(channel_);
  sync();
}

void Deployment::sync(int max_rounds) {
  std::lock_guard lock(sync_mu_);
  for (int i = 0; i < max_rounds; ++i) {
    const std::size_t moved = private_->pump() + public_->pump();
    if (moved == 0) {
      // One more round catches replies produced by the last packets.
      if (private_->pump() + public_->pump() == 0) return;
    }
  }
}

AnnouncedKey Deployment::provision() {
  if (!private_->announce_key()) {
    throw callosum::ChannelError(callosum::ChannelErrc::DirectionViolation,
                                 "key announcement refused: the channel is in diode mode");
  }
  sync();
  auto key = public_->announced_key();
  if (!key) throw std::runtime_error("key announcement did not arrive");
  return *key;
}

void Deployment::lock() {
  private_->set_mode(callosum::ChannelMode::Diode);
  store_mode(private_config_.data_dir, callosum::ChannelMode::Diode);
}

void Deployment::unlock() {
  private_->set_mode(callosum::ChannelMode::Duplex, true);
  store_mode(private_config_.data_dir, callosum::ChannelMode::Duplex);
}

void Deployment::disconnect() { public_->detach(); }

void Deployment::reconnect() { public_->attach(channel_); }

}  // namespace lifeserver::node
