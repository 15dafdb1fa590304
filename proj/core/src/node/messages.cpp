#include "lifeserver/node/messages.hpp"

#include <algorithm>
#include <stdexcept>

namespace lifeserver::node {

using nlohmann::json;

namespace {

json parse_json(ByteView payload) {
  try {
    return json::parse(payload.begin(), payload.end());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("payload is not JSON: ") + e.what());
  }
}

Bytes dump(const json& j) { return to_bytes(j.dump()); }

}  // namespace

Bytes encode_sense_forward(const store::SenseRecord& r) {
  if (!r.sealed_payload) throw std::invalid_argument("sense forward needs a sealed payload");
  store::SenseRecord stub = r;
  stub.sealed_payload.reset();
  stub.sealed_stub = true;
  const std::string meta = store::to_json(stub).dump();
  const Bytes env = sealed::serialize_envelope(*r.sealed_payload);

  Bytes out;
  out.reserve(4 + meta.size() + env.size());
  put_u32_be(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  out.insert(out.end(), env.begin(), env.end());
  return out;
}

SenseForward decode_sense_forward(ByteView payload) {
  if (payload.size() < 4) throw std::invalid_argument("sense forward too short");
  const std::uint32_t meta_len = get_u32_be(payload.data());
  if (payload.size() - 4 < meta_len) throw std::invalid_argument("sense forward meta overruns payload");
  SenseForward f;
  try {
    f.stub = store::sense_record_from_json(parse_json(payload.subspan(4, meta_len)));
    f.envelope = sealed::parse_envelope(payload.subspan(4 + meta_len));
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument(e.what());
  }
  if (f.stub.record_id.empty()) throw std::invalid_argument("sense forward without record_id");
  return f;
}

Bytes encode_key_announce(const sealed::KeyPair& keys) {
  return dump(json{{"key_id", to_hex(keys.key_id)}, {"public_key", to_hex(keys.public_key)}});
}

AnnouncedKey announced_key_from_json(const json& j) {
  try {
    AnnouncedKey k;
    const Bytes id = from_hex(j.at("key_id").get<std::string>());
    k.public_key = from_hex(j.at("public_key").get<std::string>());
    if (id.size() != sealed::kKeyIdSize || k.public_key.size() != sealed::kPublicKeySize) {
      throw std::invalid_argument("wrong key sizes");
    }
    std::copy(id.begin(), id.end(), k.key_id.begin());
    if (sealed::derive_key_id(k.public_key) != k.key_id) {
      throw std::invalid_argument("key_id does not match public_key");
    }
    return k;
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("bad key announcement: ") + e.what());
  }
}

AnnouncedKey decode_key_announce(ByteView payload) { return announced_key_from_json(parse_json(payload)); }

json to_json(const AnnouncedKey& key) {
  return json{{"key_id", to_hex(key.key_id)}, {"public_key", to_hex(key.public_key)}};
}

Bytes encode_derived_request(std::size_t after) {
  return dump(json{{"op", "derived_export"}, {"after", after}});
}

std::optional<std::size_t> decode_derived_request(ByteView payload) {
  const json j = parse_json(payload);
  if (!j.is_object() || j.value("op", "") != "derived_export") return std::nullopt;
  const auto& after = j.at("after");
  if (!after.is_number_unsigned()) throw std::invalid_argument("after must be a non-negative integer");
  return after.get<std::size_t>();
}

Bytes encode_derived_export(const DerivedExport& e) {
  json records = json::array();
  for (const auto& r : e.records) records.push_back(store::to_json(r));
  return dump(json{{"op", "derived_export"}, {"after", e.after}, {"next", e.next}, {"records", std::move(records)}});
}

DerivedExport decode_derived_export(ByteView payload) {
  const json j = parse_json(payload);
  try {
    DerivedExport e;
    e.after = j.at("after").get<std::size_t>();
    e.next = j.at("next").get<std::size_t>();
    for (const auto& r : j.at("records")) e.records.push_back(store::derived_record_from_json(r));
    return e;
  } catch (const std::exception& ex) {
    throw std::invalid_argument(std::string("bad derived export: ") + ex.what());
  }
}

Bytes encode_heartbeat(std::int64_t now_ms) {
  Bytes out;
  put_u64_be(out, static_cast<std::uint64_t>(now_ms));
  return out;
}

std::int64_t decode_heartbeat(ByteView payload) {
  if (payload.size() != 8) throw std::invalid_argument("heartbeat must be 8 bytes");
  return static_cast<std::int64_t>(get_u64_be(payload.data()));
}

}  // namespace lifeserver::node
