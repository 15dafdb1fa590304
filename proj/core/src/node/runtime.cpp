#include "lifeserver/node/runtime.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <fstream>
#include <iostream>
#include <thread>

#include <spdlog/spdlog.h>

#include "lifeserver/callosum/tcp_link.hpp"
#include "lifeserver/gateway/http_server.hpp"
#include "lifeserver/node/deployment.hpp"
#include "lifeserver/node/fetcher.hpp"
#include "lifeserver/node/private_node.hpp"
#include "lifeserver/node/public_node.hpp"

namespace lifeserver::node {

using namespace std::chrono_literals;
using callosum::ChannelMode;
using callosum::Direction;

namespace {

constexpr auto kPumpInterval = 10ms;
constexpr auto kHousekeepingInterval = 1s;
constexpr auto kModePollInterval = 250ms;

bool stopping(const RunOptions& o) { return o.stop && o.stop->load(); }

std::ostream& out(const RunOptions& o) { return o.out ? *o.out : std::cout; }

NodeConfig private_config_of(const NodeConfig& config) {
  if (config.role == Role::Private) return config;
  if (!config.private_config) {
    throw ConfigError(ConfigErrc::MissingKey, "private_config", "needed to reach the private node's data");
  }
  NodeConfig p = load_config(*config.private_config);
  if (p.role != Role::Private) {
    throw ConfigError(ConfigErrc::BadValue, "private_config", config.private_config->string() + " is not a private config");
  }
  return p;
}

std::shared_ptr<callosum::Link> with_noise(std::shared_ptr<callosum::Link> link, const callosum::ErrorModel& m) {
  if (m.corrupt_p <= 0.0 && m.drop_p <= 0.0) return link;
  return std::make_shared<callosum::NoisyLink>(std::move(link), m);
}

/// Applies an operator mode change recorded in the data dir.
void follow_mode_file(const std::filesystem::path& data_dir, PrivateNode& node) {
  const auto m = stored_mode(data_dir);
  if (!m || *m == node.mode()) return;
  node.set_mode(*m, true);
  spdlog::info("private node: channel switched to {}", to_string(*m));
}

void serve_public(gateway::HttpServer& http, PublicNode& node, const NodeConfig& config, const RunOptions& o) {
  const auto [host, port] = callosum::split_host_port(config.listen_address);
  http.bind(host, port);
  http.start();
  out(o) << "lifeserver public node listening on " << host << ":" << http.port() << "\n"
         << "pairing code: " << node.gateway().pairing_code() << "\n";
  for (const auto& w : node.startup_warnings(effective_mode(config))) out(o) << "warning: " << w << "\n";
  out(o).flush();
}

void run_public_tcp(const NodeConfig& config, const RunOptions& o) {
  DataDirLock lock(config.data_dir);
  PublicNode node(config, make_fetcher());
  gateway::HttpServer http({&node.gateway(), &node.engine(), [&node]() -> std::optional<nlohmann::json> {
                              auto k = node.announced_key();
                              if (!k) return std::nullopt;
                              return to_json(*k);
                            }});
  try {
    serve_public(http, node, config, o);
  } catch (const gateway::PortInUse& e) {
    throw RuntimeError(RuntimeErrc::PortInUse, e.what());
  }

  const auto [host, port] = callosum::split_host_port(config.channel.endpoint);
  const auto mode = effective_mode(config);
  auto connect = [&, host = host, port = port](std::chrono::milliseconds timeout) {
    try {
      auto link = callosum::TcpLink::connect(host, port, Direction::PublicToPrivate, timeout);
      node.attach(std::make_shared<callosum::Channel>(with_noise(link, config.channel.error), mode));
      spdlog::info("public node: connected to private node at {}", config.channel.endpoint);
      return true;
    } catch (const callosum::ChannelError&) {
      return false;
    }
  };

  if (mode == ChannelMode::Duplex && !node.announced_key()) {
    const auto deadline = std::chrono::steady_clock::now() + o.handshake_timeout;
    bool up = connect(o.handshake_timeout);
    while (up && !node.announced_key() && std::chrono::steady_clock::now() < deadline && !stopping(o)) {
      node.pump();
      std::this_thread::sleep_for(kPumpInterval);
    }
    if (!node.announced_key() && !stopping(o)) {
      throw RuntimeError(RuntimeErrc::ChannelHandshakeTimeout,
                         "no key announcement from the private node at " + config.channel.endpoint);
    }
  }
  if (o.on_ready) o.on_ready(http.port());

  auto next_housekeeping = std::chrono::steady_clock::now();
  while (!stopping(o)) {
    if (!node.channel_up()) connect(200ms);
    node.pump();
    if (std::chrono::steady_clock::now() >= next_housekeeping) {
      node.send_heartbeat();
      node.request_derived();
      next_housekeeping = std::chrono::steady_clock::now() + kHousekeepingInterval;
    }
    std::this_thread::sleep_for(kPumpInterval);
  }
  http.stop();
  node.store().sync();
}

void run_private_tcp(const NodeConfig& config, const RunOptions& o) {
  DataDirLock lock(config.data_dir);
  PrivateNode node(config.data_dir, config.channel.fec);
  node.set_mode(effective_mode(config), true);

  const auto [host, port] = callosum::split_host_port(config.channel.endpoint);
  std::unique_ptr<callosum::TcpListener> listener;
  try {
    listener = std::make_unique<callosum::TcpListener>(host, port);
  } catch (const std::system_error& e) {
    if (e.code() == std::errc::address_in_use) throw RuntimeError(RuntimeErrc::PortInUse, config.channel.endpoint);
    throw;
  }
  out(o) << "lifeserver private node on " << host << ":" << listener->port() << " ("
         << to_string(node.mode()) << "), key " << to_hex(node.keys().key_id) << "\n";
  out(o).flush();
  if (o.on_ready) o.on_ready(listener->port());

  std::jthread acceptor([&](std::stop_token st) {
    while (!st.stop_requested()) {
      if (auto link = listener->accept(Direction::PrivateToPublic, 200ms)) {
        node.attach(std::make_shared<callosum::Channel>(with_noise(link, config.channel.error), node.mode()));
        spdlog::info("private node: public node connected");
      }
    }
  });

  auto next_mode_poll = std::chrono::steady_clock::now();
  while (!stopping(o)) {
    node.pump();
    if (std::chrono::steady_clock::now() >= next_mode_poll) {
      follow_mode_file(config.data_dir, node);
      next_mode_poll = std::chrono::steady_clock::now() + kModePollInterval;
    }
    std::this_thread::sleep_for(kPumpInterval);
  }
  acceptor.request_stop();
}

void run_inprocess(const NodeConfig& config, const RunOptions& o) {
  const NodeConfig priv = private_config_of(config);
  DataDirLock public_lock(config.data_dir);
  DataDirLock private_lock(priv.data_dir);
  Deployment d(config, priv, make_fetcher());
  auto& node = d.public_node();
  gateway::HttpServer http({&node.gateway(), &node.engine(), [&node]() -> std::optional<nlohmann::json> {
                              auto k = node.announced_key();
                              if (!k) return std::nullopt;
                              return to_json(*k);
                            }});
  try {
    serve_public(http, node, config, o);
  } catch (const gateway::PortInUse& e) {
    throw RuntimeError(RuntimeErrc::PortInUse, e.what());
  }
  if (o.on_ready) o.on_ready(http.port());

  auto next_housekeeping = std::chrono::steady_clock::now();
  while (!stopping(o)) {
    follow_mode_file(priv.data_dir, d.private_node());
    if (std::chrono::steady_clock::now() >= next_housekeeping) {
      node.send_heartbeat();
      node.request_derived();
      next_housekeeping = std::chrono::steady_clock::now() + kHousekeepingInterval;
    }
    d.sync();
    std::this_thread::sleep_for(kPumpInterval);
  }
  http.stop();
}

}  // namespace

const char* to_string(RuntimeErrc code) {
  switch (code) {
    case RuntimeErrc::PortInUse: return "PortInUse";
    case RuntimeErrc::DataDirLocked: return "DataDirLocked";
    case RuntimeErrc::ChannelHandshakeTimeout: return "ChannelHandshakeTimeout";
  }
  return "Unknown";
}

RuntimeError::RuntimeError(RuntimeErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

DataDirLock::DataDirLock(const std::filesystem::path& data_dir) {
  std::filesystem::create_directories(data_dir);
  const auto path = data_dir / "LOCK";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw std::system_error(errno, std::generic_category(), "open " + path.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw RuntimeError(RuntimeErrc::DataDirLocked, data_dir.string() + " is in use by another process");
  }
}

DataDirLock::~DataDirLock() {
  if (fd_ >= 0) ::close(fd_);
}

void run_node(const NodeConfig& config, const RunOptions& options) {
  if (config.role == Role::Private) {
    if (config.channel.transport == Transport::InProcess) {
      throw ConfigError(ConfigErrc::BadValue, "channel.transport",
                        "an inprocess private node is started through the public config's private_config");
    }
    run_private_tcp(config, options);
  } else if (config.channel.transport == Transport::InProcess) {
    run_inprocess(config, options);
  } else {
    run_public_tcp(config, options);
  }
}

AnnouncedKey provision_node(const NodeConfig& config, std::chrono::milliseconds timeout) {
  if (config.role == Role::Private) {
    const auto keys = load_or_create_node_key(config.data_dir);
    return {keys.key_id, keys.public_key};
  }

  if (config.channel.transport == Transport::InProcess) {
    const NodeConfig priv = private_config_of(config);
    DataDirLock public_lock(config.data_dir);
    DataDirLock private_lock(priv.data_dir);
    if (effective_mode(priv) == ChannelMode::Diode) {
      throw RuntimeError(RuntimeErrc::ChannelHandshakeTimeout,
                         "the channel is locked in diode mode; run `lifeserver lock --unlock` first");
    }
    Deployment d(config, priv, make_fetcher());
    return d.provision();
  }

  // Only the key file is written, so this can run beside a live public node.
  const auto [host, port] = callosum::split_host_port(config.channel.endpoint);
  std::shared_ptr<callosum::TcpLink> link;
  try {
    link = callosum::TcpLink::connect(host, port, Direction::PublicToPrivate, timeout);
  } catch (const callosum::ChannelError&) {
    throw RuntimeError(RuntimeErrc::ChannelHandshakeTimeout, "private node unreachable at " + config.channel.endpoint);
  }
  callosum::FrameDecoder decoder(config.channel.fec);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    link->wait_readable(50ms);
    const Bytes in = link->receive(Direction::PrivateToPublic);
    if (!in.empty()) decoder.feed(in);
    while (auto d = decoder.next()) {
      const auto* p = std::get_if<callosum::Packet>(&*d);
      if (!p || p->type != callosum::MsgType::KeyAnnounce) continue;
      const auto key = decode_key_announce(p->payload);
      std::filesystem::create_directories(config.data_dir);
      const auto tmp = config.data_dir / (std::string(kAnnouncedKeyFile) + ".tmp");
      {
        std::ofstream f(tmp, std::ios::trunc);
        f << to_json(key).dump(2) << "\n";
        if (!f.flush()) throw std::runtime_error("cannot write " + tmp.string());
      }
      std::filesystem::rename(tmp, config.data_dir / kAnnouncedKeyFile);
      return key;
    }
  }
  throw RuntimeError(RuntimeErrc::ChannelHandshakeTimeout,
                     "no key announcement from " + config.channel.endpoint + " (is the private node in duplex mode?)");
}

std::vector<std::filesystem::path> lock_node(const NodeConfig& config, bool unlock) {
  const auto mode = unlock ? ChannelMode::Duplex : ChannelMode::Diode;
  std::vector<std::filesystem::path> written;
  const NodeConfig priv = private_config_of(config);
  store_mode(priv.data_dir, mode);
  written.push_back(priv.data_dir);
  if (config.role == Role::Public) {
    store_mode(config.data_dir, mode);
    written.push_back(config.data_dir);
  }
  return written;
}

std::string current_pairing_code(const NodeConfig& config) {
  if (config.role != Role::Public) {
    throw ConfigError(ConfigErrc::BadValue, "role", "pairing codes belong to the public node");
  }
  if (auto code = gateway::stored_pairing_code(config.data_dir)) return *code;
  if (config.pairing_code) return *config.pairing_code;
  throw std::runtime_error("no pairing code yet: start the public node once to generate one");
}

}  // namespace lifeserver::node
