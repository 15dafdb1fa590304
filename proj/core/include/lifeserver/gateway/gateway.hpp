#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lifeserver/store/sense_store.hpp"

namespace lifeserver::gateway {

struct ClientCredential {
  std::string client_id;
  std::string token;  // only returned at pairing time; stored hashed
  std::int64_t created_at = 0;
  bool revoked = false;
};

enum class ControlKind { Boolean, IntegerRange, Enumerated };

using ControlValue = std::variant<bool, std::int64_t, std::string>;

struct ControlSchema {
  std::string name;
  ControlKind kind = ControlKind::Boolean;
  std::int64_t lo = 0;  // IntegerRange bounds, inclusive
  std::int64_t hi = 0;
  std::vector<std::string> values;  // Enumerated
  ControlValue current_value;

  bool accepts(const ControlValue& v) const;
};

struct DeviceDescriptor {
  std::string device_id;
  std::string name;
  std::vector<ControlSchema> controls;
};

enum class CommandState { Pending, Delivered };

struct ControlCommand {
  std::string command_id;
  std::string device_id;
  std::string control;
  ControlValue value;
  std::int64_t issued_at = 0;
  CommandState state = CommandState::Pending;
};

enum class GatewayErrc {
  PairingRejected,
  Unauthenticated,
  SchemaViolation,
  ChannelDown,
  UnknownDevice,
  UnknownControl,
  ValueOutOfDomain,
};

const char* to_string(GatewayErrc code);

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrc code, const std::string& what, std::string record_id = {});
  GatewayErrc code() const noexcept { return code_; }
  /// For ChannelDown: the record that was accepted but whose delivery is deferred.
  const std::string& record_id() const noexcept { return record_id_; }

 private:
  GatewayErrc code_;
  std::string record_id_;
};

/// Hands a sealed record (with envelope) to the private node. Throws
/// GatewayError(ChannelDown) when the record could only be queued.
using SealedForwarder = std::function<void(const store::SenseRecord&)>;

struct PairingOptions {
  std::optional<std::string> operator_code;  // first code; random when absent
  std::chrono::seconds validity{600};
};

/// The public node's Sense and Act surface plus explicit client pairing.
///
/// Pairing uses one setup code at a time. A code is single-use: consuming
/// it, or letting it expire, rotates to a fresh random code.
class Gateway {
 public:
  Gateway(std::filesystem::path data_dir, store::SenseStore& public_store, SealedForwarder forward,
          PairingOptions pairing = {});

  std::string pairing_code() const;
  /// Throws GatewayError(PairingRejected).
  ClientCredential pair_client(const std::string& code);
  void revoke(const std::string& client_id);
  /// Client id for a live token.
  std::optional<std::string> authenticate(const std::string& token) const;

  /// Stores public/private records; for sealed records stores a metadata stub
  /// and forwards the envelope. Throws GatewayError(Unauthenticated |
  /// SchemaViolation | ChannelDown).
  std::string ingest(const std::string& token, store::SenseRecord record);

  std::string register_device(const std::string& token, DeviceDescriptor descriptor);
  std::string set_control(const std::string& token, const std::string& device_id,
                          const std::string& control, const ControlValue& value);
  /// Returns and drains the pending queue, oldest first.
  std::vector<ControlCommand> poll_commands(const std::string& token, const std::string& device_id);
  std::optional<DeviceDescriptor> device(const std::string& device_id) const;

  /// Testing hook: the clock used for pairing expiry.
  void set_clock(std::function<std::int64_t()> now_ms) { clock_ = std::move(now_ms); }

 private:
  struct StoredClient {
    std::string client_id;
    std::string token_hash;
    std::int64_t created_at;
    bool revoked;
  };

  void require_auth(const std::string& token) const;
  void rotate_code_locked();
  void save_pairing_locked() const;
  void save_clients_locked() const;

  std::filesystem::path data_dir_;
  store::SenseStore& store_;
  SealedForwarder forward_;
  PairingOptions pairing_;
  std::function<std::int64_t()> clock_;

  mutable std::mutex auth_mu_;
  std::string code_;
  std::int64_t code_issued_at_ = 0;
  std::vector<StoredClient> clients_;

  mutable std::mutex registry_mu_;
  std::map<std::string, DeviceDescriptor> devices_;
  std::map<std::string, std::deque<ControlCommand>> queues_;
};

/// The live pairing code persisted under `data_dir`, without opening a node.
std::optional<std::string> stored_pairing_code(const std::filesystem::path& data_dir);

nlohmann::json to_json(const ControlValue& v);
ControlValue control_value_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DeviceDescriptor& d);
/// {"name": ..., "controls": [{"name","kind":"boolean"|"range"|"enum","lo","hi","values","current"}]}
DeviceDescriptor device_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ControlCommand& c);

}  // namespace lifeserver::gateway
