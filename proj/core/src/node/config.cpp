#include "lifeserver/node/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lifeserver/callosum/tcp_link.hpp"

namespace lifeserver::node {

namespace {

constexpr const char* kModeFile = "channel.mode";

const std::set<std::string, std::less<>> kCommonKeys = {
    "role",
    "data_dir",
    "channel.transport",
    "channel.mode",
    "channel.endpoint",
    "channel.fec.enabled",
    "channel.fec.data_len",
    "channel.fec.parity_len",
    "channel.error.corrupt_p",
    "channel.error.drop_p",
    "channel.error.seed",
};

const std::set<std::string, std::less<>> kPublicKeys = {
    "listen_address", "pairing_code", "k_min",         "ls_retention",
    "min_fee",        "vdp.max_depth", "vdp.max_docs", "private_config",
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError(ConfigErrc::BadValue, key, "'" + value + "' is not " + expected);
}

std::uint64_t as_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad(key, v, "a non-negative integer");
  return out;
}

double as_fraction(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  double out = 0;
  in >> out;
  if (!in || !in.eof() || !std::isfinite(out) || out < 0.0 || out > 1.0) bad(key, v, "a number in [0, 1]");
  return out;
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  bad(key, v, "a boolean");
}

std::string as_endpoint(const std::string& key, const std::string& v) {
  try {
    callosum::split_host_port(v);
  } catch (const std::exception&) {
    bad(key, v, "host:port");
  }
  return v;
}

std::filesystem::path as_path(const std::string& v, const std::filesystem::path& base) {
  std::filesystem::path p(v);
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

const char* to_string(Role r) { return r == Role::Public ? "public" : "private"; }
const char* to_string(Transport t) { return t == Transport::InProcess ? "inprocess" : "tcp-sim"; }

const char* to_string(ConfigErrc code) {
  switch (code) {
    case ConfigErrc::MissingKey: return "MissingKey";
    case ConfigErrc::BadValue: return "BadValue";
    case ConfigErrc::UnknownKey: return "UnknownKey";
    case ConfigErrc::Unreadable: return "Unreadable";
  }
  return "Unknown";
}

ConfigError::ConfigError(ConfigErrc code, std::string key, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + (key.empty() ? "" : " '" + key + "'") + ": " + what),
      code_(code),
      key_(std::move(key)) {}

NodeConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(ConfigErrc::BadValue, {}, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (!kCommonKeys.contains(key) && !kPublicKeys.contains(key)) {
      throw ConfigError(ConfigErrc::UnknownKey, key, "not a configuration key");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError(ConfigErrc::BadValue, key, "set twice (line " + std::to_string(line_no) + ")");
    }
  }

  auto required = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) throw ConfigError(ConfigErrc::MissingKey, key, "required");
    return it->second;
  };

  NodeConfig c;
  const auto& role = required("role");
  if (role == "public") {
    c.role = Role::Public;
  } else if (role == "private") {
    c.role = Role::Private;
  } else {
    bad("role", role, "'public' or 'private'");
  }
  c.data_dir = as_path(required("data_dir"), base_dir);

  if (c.role == Role::Private) {
    for (const auto& [k, _] : kv) {
      if (kPublicKeys.contains(k)) throw ConfigError(ConfigErrc::UnknownKey, k, "only valid for role = public");
    }
  }

  for (const auto& [key, v] : kv) {
    if (key == "channel.transport") {
      if (v == "inprocess") {
        c.channel.transport = Transport::InProcess;
      } else if (v == "tcp-sim") {
        c.channel.transport = Transport::TcpSim;
      } else {
        bad(key, v, "'inprocess' or 'tcp-sim'");
      }
    } else if (key == "channel.mode") {
      try {
        c.channel.mode = callosum::channel_mode_from_string(v);
      } catch (const std::invalid_argument&) {
        bad(key, v, "'duplex' or 'diode'");
      }
    } else if (key == "channel.endpoint") {
      c.channel.endpoint = as_endpoint(key, v);
    } else if (key == "channel.fec.enabled") {
      c.channel.fec.enabled = as_bool(key, v);
    } else if (key == "channel.fec.data_len") {
      c.channel.fec.data_len = as_uint(key, v);
    } else if (key == "channel.fec.parity_len") {
      c.channel.fec.parity_len = as_uint(key, v);
    } else if (key == "channel.error.corrupt_p") {
      c.channel.error.corrupt_p = as_fraction(key, v);
    } else if (key == "channel.error.drop_p") {
      c.channel.error.drop_p = as_fraction(key, v);
    } else if (key == "channel.error.seed") {
      c.channel.error.seed = as_uint(key, v);
    } else if (key == "listen_address") {
      c.listen_address = as_endpoint(key, v);
    } else if (key == "pairing_code") {
      if (v.empty()) bad(key, v, "a non-empty code");
      c.pairing_code = v;
    } else if (key == "k_min") {
      c.k_min = as_uint(key, v);
      if (c.k_min == 0) bad(key, v, "at least 1");
    } else if (key == "ls_retention") {
      c.retention_ppm = static_cast<std::uint32_t>(std::llround(as_fraction(key, v) * 1e6));
    } else if (key == "min_fee") {
      c.min_fee = as_uint(key, v);
    } else if (key == "vdp.max_depth") {
      c.limits.max_depth = as_uint(key, v);
    } else if (key == "vdp.max_docs") {
      c.limits.max_documents = as_uint(key, v);
    } else if (key == "private_config") {
      c.private_config = as_path(v, base_dir);
    }
  }

  try {
    c.channel.fec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ConfigErrc::BadValue, "channel.fec", e.what());
  }
  return c;
}

NodeConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(ConfigErrc::Unreadable, {}, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::optional<callosum::ChannelMode> stored_mode(const std::filesystem::path& data_dir) {
  std::ifstream in(data_dir / kModeFile);
  if (!in) return std::nullopt;
  std::string word;
  in >> word;
  try {
    return callosum::channel_mode_from_string(word);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

void store_mode(const std::filesystem::path& data_dir, callosum::ChannelMode mode) {
  std::filesystem::create_directories(data_dir);
  const auto tmp = data_dir / (std::string(kModeFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << callosum::to_string(mode) << "\n";
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, data_dir / kModeFile);
}

callosum::ChannelMode effective_mode(const NodeConfig& config) {
  return stored_mode(config.data_dir).value_or(config.channel.mode);
}

}  // namespace lifeserver::node
