#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lifeserver/callosum/channel.hpp"
#include "lifeserver/callosum/packet.hpp"
#include "lifeserver/vdp/document.hpp"

namespace lifeserver::node {

enum class Role { Public, Private };
enum class Transport { InProcess, TcpSim };

const char* to_string(Role r);
const char* to_string(Transport t);

struct ChannelConfig {
  Transport transport = Transport::TcpSim;
  callosum::ChannelMode mode = callosum::ChannelMode::Duplex;
  std::string endpoint = "127.0.0.1:7701";  // private node listens, public node connects
  callosum::FecConfig fec;
  callosum::ErrorModel error;
};

struct NodeConfig {
  Role role = Role::Public;
  std::filesystem::path data_dir;
  ChannelConfig channel;

  // Public role only.
  std::string listen_address = "127.0.0.1:8080";
  std::optional<std::string> pairing_code;
  std::size_t k_min = 5;
  std::uint32_t retention_ppm = 0;
  std::uint64_t min_fee = 0;
  vdp::ResolutionLimits limits;
  /// The private node's config, for transport = inprocess or for `lock`.
  std::optional<std::filesystem::path> private_config;
};

enum class ConfigErrc { MissingKey, BadValue, UnknownKey, Unreadable };

const char* to_string(ConfigErrc code);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ConfigErrc code, std::string key, const std::string& what);
  ConfigErrc code() const noexcept { return code_; }
  const std::string& key() const noexcept { return key_; }

 private:
  ConfigErrc code_;
  std::string key_;
};

/// Parses `key = value` lines; `#` starts a comment. Relative paths resolve
/// against `base_dir`.
///
///   role                  public | private                      (required)
///   data_dir              path                                  (required)
///   listen_address        host:port                             127.0.0.1:8080
///   channel.transport     inprocess | tcp-sim                   tcp-sim
///   channel.mode          duplex | diode                        duplex
///   channel.endpoint      host:port                             127.0.0.1:7701
///   channel.fec.enabled   true | false                          false
///   channel.fec.data_len  1..253                                223
///   channel.fec.parity_len 2..254                               32
///   channel.error.corrupt_p / drop_p   probability              0
///   channel.error.seed    integer                               0
///   pairing_code          text                                  random
///   k_min                 integer >= 1                          5
///   ls_retention          fraction in [0, 1]                    0
///   min_fee               integer                               0
///   vdp.max_depth / vdp.max_docs       integer                  16 / 64
///   private_config        path
///
/// Throws ConfigError naming the offending key.
NodeConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
NodeConfig load_config(const std::filesystem::path& path);

/// The mode stored in `<data_dir>/channel.mode`, if the operator set one.
std::optional<callosum::ChannelMode> stored_mode(const std::filesystem::path& data_dir);
void store_mode(const std::filesystem::path& data_dir, callosum::ChannelMode mode);
/// stored_mode() falling back to the configured mode.
callosum::ChannelMode effective_mode(const NodeConfig& config);

}  // namespace lifeserver::node
