#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lifeserver/common/bytes.hpp"
#include "lifeserver/sealed/envelope.hpp"
#include "lifeserver/store/records.hpp"

namespace lifeserver::node {

// Payloads carried between the two nodes.
//
//   SenseForward   u32 meta_len | meta JSON (the public stub) | envelope bytes
//   KeyAnnounce    {"key_id": hex, "public_key": hex}
//   QueryRequest   {"op": "derived_export", "after": n}
//   QueryResponse  {"op": "derived_export", "after": n, "next": m, "records": [...]}
//   Heartbeat      u64 sender clock in ms

struct SenseForward {
  store::SenseRecord stub;  // metadata only
  sealed::SealedEnvelope envelope;
};

Bytes encode_sense_forward(const store::SenseRecord& sealed_record);
/// Throws std::invalid_argument on a malformed payload.
SenseForward decode_sense_forward(ByteView payload);

struct AnnouncedKey {
  sealed::KeyId key_id{};
  Bytes public_key;
};

Bytes encode_key_announce(const sealed::KeyPair& keys);
/// Throws std::invalid_argument, including when key_id does not match the key.
AnnouncedKey decode_key_announce(ByteView payload);
nlohmann::json to_json(const AnnouncedKey& key);
AnnouncedKey announced_key_from_json(const nlohmann::json& j);

struct DerivedExport {
  std::size_t after = 0;
  std::size_t next = 0;  // cursor for the following request
  std::vector<store::DerivedRecord> records;
};

Bytes encode_derived_request(std::size_t after);
/// nullopt for a request this build does not understand.
std::optional<std::size_t> decode_derived_request(ByteView payload);
Bytes encode_derived_export(const DerivedExport& e);
DerivedExport decode_derived_export(ByteView payload);

Bytes encode_heartbeat(std::int64_t now_ms);
std::int64_t decode_heartbeat(ByteView payload);

}  // namespace lifeserver::node
