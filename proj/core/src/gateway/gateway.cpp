#include "lifeserver/gateway/gateway.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "lifeserver/common/random.hpp"
#include "lifeserver/sealed/envelope.hpp"

namespace lifeserver::gateway {

using nlohmann::json;

namespace {

constexpr const char* kPairingFile = "pairing.json";
constexpr const char* kClientsFile = "clients.json";

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string token_hash(const std::string& token) { return sealed::sha256_hex(as_bytes(token)); }

const char* kind_name(ControlKind k) {
  switch (k) {
    case ControlKind::Boolean: return "boolean";
    case ControlKind::IntegerRange: return "range";
    case ControlKind::Enumerated: return "enum";
  }
  return "?";
}

}  // namespace

const char* to_string(GatewayErrc code) {
  switch (code) {
    case GatewayErrc::PairingRejected: return "PairingRejected";
    case GatewayErrc::Unauthenticated: return "Unauthenticated";
    case GatewayErrc::SchemaViolation: return "SchemaViolation";
    case GatewayErrc::ChannelDown: return "ChannelDown";
    case GatewayErrc::UnknownDevice: return "UnknownDevice";
    case GatewayErrc::UnknownControl: return "UnknownControl";
    case GatewayErrc::ValueOutOfDomain: return "ValueOutOfDomain";
  }
  return "Unknown";
}

GatewayError::GatewayError(GatewayErrc code, const std::string& what, std::string record_id)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code),
      record_id_(std::move(record_id)) {}

bool ControlSchema::accepts(const ControlValue& v) const {
  switch (kind) {
    case ControlKind::Boolean: return std::holds_alternative<bool>(v);
    case ControlKind::IntegerRange: {
      const auto* i = std::get_if<std::int64_t>(&v);
      return i && *i >= lo && *i <= hi;
    }
    case ControlKind::Enumerated: {
      const auto* s = std::get_if<std::string>(&v);
      return s && std::find(values.begin(), values.end(), *s) != values.end();
    }
  }
  return false;
}

Gateway::Gateway(std::filesystem::path data_dir, store::SenseStore& public_store,
                 SealedForwarder forward, PairingOptions pairing)
    : data_dir_(std::move(data_dir)),
      store_(public_store),
      forward_(std::move(forward)),
      pairing_(std::move(pairing)),
      clock_([] { return now_ms(); }) {
  std::filesystem::create_directories(data_dir_);
  std::lock_guard lock(auth_mu_);

  if (std::ifstream in(data_dir_ / kPairingFile); in) {
    const json j = json::parse(in);
    code_ = j.at("code").get<std::string>();
    code_issued_at_ = j.at("issued_at").get<std::int64_t>();
  } else {
    code_ = pairing_.operator_code.value_or(random_hex(5));
    code_issued_at_ = clock_();
    save_pairing_locked();
  }

  if (std::ifstream in(data_dir_ / kClientsFile); in) {
    for (const auto& c : json::parse(in)) {
      clients_.push_back({c.at("client_id").get<std::string>(), c.at("token_sha256").get<std::string>(),
                          c.at("created_at").get<std::int64_t>(), c.at("revoked").get<bool>()});
    }
  }
}

void Gateway::save_pairing_locked() const {
  write_atomically(data_dir_ / kPairingFile,
                   json{{"code", code_}, {"issued_at", code_issued_at_}}.dump() + "\n");
}

void Gateway::save_clients_locked() const {
  json arr = json::array();
  for (const auto& c : clients_) {
    arr.push_back({{"client_id", c.client_id},
                   {"token_sha256", c.token_hash},
                   {"created_at", c.created_at},
                   {"revoked", c.revoked}});
  }
  write_atomically(data_dir_ / kClientsFile, arr.dump(2) + "\n");
}

void Gateway::rotate_code_locked() {
  code_ = random_hex(5);
  code_issued_at_ = clock_();
  save_pairing_locked();
}

std::string Gateway::pairing_code() const {
  std::lock_guard lock(auth_mu_);
  return code_;
}

ClientCredential Gateway::pair_client(const std::string& code) {
  std::lock_guard lock(auth_mu_);
  const std::int64_t now = clock_();
  if (now - code_issued_at_ > std::chrono::duration_cast<std::chrono::milliseconds>(pairing_.validity).count()) {
    rotate_code_locked();
    throw GatewayError(GatewayErrc::PairingRejected, "pairing code expired");
  }
  if (code.empty() || code != code_) {
    throw GatewayError(GatewayErrc::PairingRejected, "wrong pairing code");
  }

  ClientCredential cred{random_hex(8), random_hex(32), now, false};
  clients_.push_back({cred.client_id, token_hash(cred.token), cred.created_at, false});
  save_clients_locked();
  rotate_code_locked();
  return cred;
}

void Gateway::revoke(const std::string& client_id) {
  std::lock_guard lock(auth_mu_);
  for (auto& c : clients_) {
    if (c.client_id == client_id) c.revoked = true;
  }
  save_clients_locked();
}

std::optional<std::string> Gateway::authenticate(const std::string& token) const {
  if (token.empty()) return std::nullopt;
  const std::string h = token_hash(token);
  std::lock_guard lock(auth_mu_);
  for (const auto& c : clients_) {
    if (!c.revoked && c.token_hash == h) return c.client_id;
  }
  return std::nullopt;
}

void Gateway::require_auth(const std::string& token) const {
  if (!authenticate(token)) throw GatewayError(GatewayErrc::Unauthenticated, "missing or invalid token");
}

std::string Gateway::ingest(const std::string& token, store::SenseRecord record) {
  require_auth(token);
  if (!record.record_id.empty()) {
    throw GatewayError(GatewayErrc::SchemaViolation, "record_id is assigned by the server");
  }
  if (record.sealed_stub) throw GatewayError(GatewayErrc::SchemaViolation, "clients cannot send stubs");
  record.record_id = random_hex(16);
  try {
    store::validate(record);
  } catch (const store::StoreError& e) {
    throw GatewayError(GatewayErrc::SchemaViolation, e.detail());
  }

  if (record.privacy != store::Privacy::Sealed) {
    try {
      return store_.append(std::move(record));
    } catch (const store::StoreError& e) {
      if (e.code() == store::StoreErrc::SchemaViolation) {
        throw GatewayError(GatewayErrc::SchemaViolation, e.detail());
      }
      throw;
    }
  }

  // Only metadata stays on the public node.
  store::SenseRecord stub = record;
  stub.sealed_payload.reset();
  stub.sealed_stub = true;
  store_.append(stub);
  try {
    forward_(record);
  } catch (const GatewayError& e) {
    throw GatewayError(e.code(), e.what(), record.record_id);
  }
  return record.record_id;
}

std::string Gateway::register_device(const std::string& token, DeviceDescriptor d) {
  require_auth(token);
  if (d.name.empty()) throw GatewayError(GatewayErrc::SchemaViolation, "device needs a name");
  std::set<std::string> names;
  for (const auto& c : d.controls) {
    if (c.name.empty() || !names.insert(c.name).second) {
      throw GatewayError(GatewayErrc::SchemaViolation, "control names must be non-empty and unique");
    }
    if (c.kind == ControlKind::IntegerRange && c.lo > c.hi) {
      throw GatewayError(GatewayErrc::SchemaViolation, "control '" + c.name + "' has lo > hi");
    }
    if (c.kind == ControlKind::Enumerated && c.values.empty()) {
      throw GatewayError(GatewayErrc::SchemaViolation, "control '" + c.name + "' has no values");
    }
    if (!c.accepts(c.current_value)) {
      throw GatewayError(GatewayErrc::ValueOutOfDomain, "current value of '" + c.name + "' is outside its domain");
    }
  }
  d.device_id = random_hex(8);
  std::lock_guard lock(registry_mu_);
  queues_[d.device_id];
  devices_.emplace(d.device_id, d);
  return d.device_id;
}

std::string Gateway::set_control(const std::string& token, const std::string& device_id,
                                 const std::string& control, const ControlValue& value) {
  require_auth(token);
  std::lock_guard lock(registry_mu_);
  const auto dev = devices_.find(device_id);
  if (dev == devices_.end()) throw GatewayError(GatewayErrc::UnknownDevice, device_id);
  auto& controls = dev->second.controls;
  const auto c = std::find_if(controls.begin(), controls.end(),
                              [&](const ControlSchema& s) { return s.name == control; });
  if (c == controls.end()) throw GatewayError(GatewayErrc::UnknownControl, control);
  if (!c->accepts(value)) {
    throw GatewayError(GatewayErrc::ValueOutOfDomain, to_json(value).dump() + " for '" + control + "'");
  }
  c->current_value = value;
  ControlCommand cmd{random_hex(8), device_id, control, value, now_ms(), CommandState::Pending};
  queues_[device_id].push_back(cmd);
  return cmd.command_id;
}

std::vector<ControlCommand> Gateway::poll_commands(const std::string& token, const std::string& device_id) {
  require_auth(token);
  std::lock_guard lock(registry_mu_);
  const auto q = queues_.find(device_id);
  if (q == queues_.end()) throw GatewayError(GatewayErrc::UnknownDevice, device_id);
  std::vector<ControlCommand> out(q->second.begin(), q->second.end());
  q->second.clear();
  for (auto& c : out) c.state = CommandState::Delivered;
  return out;
}

std::optional<DeviceDescriptor> Gateway::device(const std::string& device_id) const {
  std::lock_guard lock(registry_mu_);
  const auto it = devices_.find(device_id);
  if (it == devices_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> stored_pairing_code(const std::filesystem::path& data_dir) {
  std::ifstream in(data_dir / kPairingFile);
  if (!in) return std::nullopt;
  return json::parse(in).at("code").get<std::string>();
}

json to_json(const ControlValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

ControlValue control_value_from_json(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  throw GatewayError(GatewayErrc::SchemaViolation, "control values are booleans, integers or strings");
}

json to_json(const DeviceDescriptor& d) {
  json controls = json::array();
  for (const auto& c : d.controls) {
    json cj{{"name", c.name}, {"kind", kind_name(c.kind)}, {"current", to_json(c.current_value)}};
    if (c.kind == ControlKind::IntegerRange) {
      cj["lo"] = c.lo;
      cj["hi"] = c.hi;
    }
    if (c.kind == ControlKind::Enumerated) cj["values"] = c.values;
    controls.push_back(std::move(cj));
  }
  return json{{"device_id", d.device_id}, {"name", d.name}, {"controls", std::move(controls)}};
}

DeviceDescriptor device_from_json(const json& j) {
  try {
    DeviceDescriptor d;
    d.name = j.at("name").get<std::string>();
    for (const auto& cj : j.value("controls", json::array())) {
      ControlSchema c;
      c.name = cj.at("name").get<std::string>();
      const auto kind = cj.at("kind").get<std::string>();
      if (kind == "boolean") {
        c.kind = ControlKind::Boolean;
        c.current_value = cj.contains("current") ? control_value_from_json(cj["current"]) : ControlValue{false};
      } else if (kind == "range") {
        c.kind = ControlKind::IntegerRange;
        c.lo = cj.at("lo").get<std::int64_t>();
        c.hi = cj.at("hi").get<std::int64_t>();
        c.current_value = cj.contains("current") ? control_value_from_json(cj["current"]) : ControlValue{c.lo};
      } else if (kind == "enum") {
        c.kind = ControlKind::Enumerated;
        c.values = cj.at("values").get<std::vector<std::string>>();
        c.current_value = cj.contains("current")
                              ? control_value_from_json(cj["current"])
                              : ControlValue{c.values.empty() ? std::string{} : c.values.front()};
      } else {
        throw GatewayError(GatewayErrc::SchemaViolation, "unknown control kind '" + kind + "'");
      }
      d.controls.push_back(std::move(c));
    }
    return d;
  } catch (const json::exception& e) {
    throw GatewayError(GatewayErrc::SchemaViolation, e.what());
  }
}

json to_json(const ControlCommand& c) {
  return json{{"command_id", c.command_id},
              {"device_id", c.device_id},
              {"control", c.control},
              {"value", to_json(c.value)},
              {"issued_at", c.issued_at},
              {"state", c.state == CommandState::Pending ? "pending" : "delivered"}};
}

}  // namespace lifeserver::gateway
