#include "lifeserver/store/records.hpp"

#include <cmath>

#include "lifeserver/vdp/codec.hpp"

namespace lifeserver::store {

using nlohmann::json;

const char* to_string(Privacy p) {
  switch (p) {
    case Privacy::Public: return "public";
    case Privacy::Private: return "private";
    case Privacy::Sealed: return "sealed";
  }
  return "unknown";
}

Privacy privacy_from_string(const std::string& s) {
  if (s == "public") return Privacy::Public;
  if (s == "private") return Privacy::Private;
  if (s == "sealed") return Privacy::Sealed;
  throw StoreError(StoreErrc::SchemaViolation, "privacy must be public, private or sealed");
}

const char* to_string(StoreErrc code) {
  switch (code) {
    case StoreErrc::DuplicateId: return "DuplicateId";
    case StoreErrc::StorageFull: return "StorageFull";
    case StoreErrc::SchemaViolation: return "SchemaViolation";
    case StoreErrc::BadPredicate: return "BadPredicate";
    case StoreErrc::Corrupt: return "Corrupt";
    case StoreErrc::Io: return "Io";
  }
  return "Unknown";
}

StoreError::StoreError(StoreErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

void validate(const SenseRecord& r) {
  auto fail = [](const std::string& why) { throw StoreError(StoreErrc::SchemaViolation, why); };
  if (r.source_id.empty()) fail("source_id is empty");
  if (r.record_type.empty()) fail("record_type is empty");
  if (r.timestamp <= 0) fail("timestamp must be positive");
  if (const auto* url = std::get_if<std::string>(&r.source_vdp); url && url->empty()) {
    fail("source_vdp url is empty");
  }
  for (const auto& [name, value] : r.fields) {
    if (name.empty()) fail("field with empty name");
    if (const auto* d = std::get_if<double>(&value); d && !std::isfinite(*d)) {
      fail("field '" + name + "' is not finite");
    }
  }
  if (r.privacy == Privacy::Sealed) {
    if (!r.fields.empty()) fail("sealed records carry no fields");
    if (r.sealed_payload.has_value() == r.sealed_stub) {
      fail("a sealed record holds either an envelope or is a stub");
    }
  } else if (r.sealed_payload || r.sealed_stub) {
    fail("only sealed records carry an envelope");
  }
}

json to_json(const FieldValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

FieldValue field_value_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw StoreError(StoreErrc::SchemaViolation, "field values are numbers or strings");
}

json to_json(const SourceVdp& v) {
  if (const auto* url = std::get_if<std::string>(&v)) return *url;
  return json::parse(vdp::serialize_vdp(std::get<vdp::VdpDocument>(v)));
}

SourceVdp source_vdp_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object()) {
    try {
      return vdp::parse_vdp(j.dump());
    } catch (const vdp::VdpError& e) {
      throw StoreError(StoreErrc::SchemaViolation, std::string("source_vdp: ") + e.what());
    }
  }
  throw StoreError(StoreErrc::SchemaViolation, "source_vdp must be a document or a URL");
}

json to_json(const vdp::CryptoAddress& a) { return json{{a.scheme, a.address}}; }

vdp::CryptoAddress crypto_address_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1 || !j.begin().value().is_string()) {
    throw StoreError(StoreErrc::SchemaViolation, "address must be {\"<scheme>\": \"<address>\"}");
  }
  return {j.begin().key(), j.begin().value().get<std::string>()};
}

json to_json(const SenseRecord& r) {
  json j;
  j["record_id"] = r.record_id;
  j["source_id"] = r.source_id;
  j["source_vdp"] = to_json(r.source_vdp);
  j["timestamp"] = r.timestamp;
  j["record_type"] = r.record_type;
  j["privacy"] = to_string(r.privacy);
  json fields = json::object();
  for (const auto& [k, v] : r.fields) fields[k] = to_json(v);
  j["fields"] = std::move(fields);
  if (r.sealed_payload) j["sealed_payload"] = to_base64(sealed::serialize_envelope(*r.sealed_payload));
  if (r.sealed_stub) j["sealed_stub"] = true;
  return j;
}

SenseRecord sense_record_from_json(const json& j) {
  static const std::set<std::string> known = {"record_id", "source_id",   "source_vdp",
                                               "timestamp", "record_type", "privacy",
                                               "fields",    "sealed_payload", "sealed_stub"};
  if (!j.is_object()) throw StoreError(StoreErrc::SchemaViolation, "record must be an object");
  for (const auto& [k, _] : j.items()) {
    if (!known.contains(k)) throw StoreError(StoreErrc::SchemaViolation, "unknown key '" + k + "'");
  }
  auto text = [&](const char* key, bool required) -> std::string {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) throw StoreError(StoreErrc::SchemaViolation, std::string("missing ") + key);
      return {};
    }
    if (!it->is_string()) throw StoreError(StoreErrc::SchemaViolation, std::string(key) + " must be text");
    return it->get<std::string>();
  };

  SenseRecord r;
  r.record_id = text("record_id", false);
  r.source_id = text("source_id", true);
  r.record_type = text("record_type", true);
  r.privacy = privacy_from_string(text("privacy", true));
  if (!j.contains("source_vdp")) throw StoreError(StoreErrc::SchemaViolation, "missing source_vdp");
  r.source_vdp = source_vdp_from_json(j.at("source_vdp"));
  const auto ts = j.find("timestamp");
  if (ts == j.end() || !ts->is_number_integer()) {
    throw StoreError(StoreErrc::SchemaViolation, "timestamp must be integer milliseconds");
  }
  r.timestamp = ts->get<std::int64_t>();
  if (const auto f = j.find("fields"); f != j.end()) {
    if (!f->is_object()) throw StoreError(StoreErrc::SchemaViolation, "fields must be an object");
    for (const auto& [k, v] : f->items()) r.fields.emplace(k, field_value_from_json(v));
  }
  if (const auto s = j.find("sealed_payload"); s != j.end() && !s->is_null()) {
    if (!s->is_string()) throw StoreError(StoreErrc::SchemaViolation, "sealed_payload must be base64");
    try {
      r.sealed_payload = sealed::parse_envelope(from_base64(s->get<std::string>()));
    } catch (const std::exception& e) {
      throw StoreError(StoreErrc::SchemaViolation, std::string("sealed_payload: ") + e.what());
    }
  }
  if (const auto s = j.find("sealed_stub"); s != j.end()) {
    if (!s->is_boolean()) throw StoreError(StoreErrc::SchemaViolation, "sealed_stub must be boolean");
    r.sealed_stub = s->get<bool>();
  }
  return r;
}

json to_json(const DerivedRecord& r) {
  return json{{"record_id", r.record_id},
              {"origin_record_id", r.origin_record_id},
              {"feature_name", r.feature_name},
              {"feature_value", to_json(r.feature_value)},
              {"timestamp", r.timestamp}};
}

DerivedRecord derived_record_from_json(const json& j) {
  try {
    DerivedRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    r.origin_record_id = j.at("origin_record_id").get<std::string>();
    r.feature_name = j.at("feature_name").get<std::string>();
    r.feature_value = field_value_from_json(j.at("feature_value"));
    r.timestamp = j.at("timestamp").get<std::int64_t>();
    return r;
  } catch (const json::exception& e) {
    throw StoreError(StoreErrc::SchemaViolation, e.what());
  }
}

json to_json(const LedgerEntry& e) {
  json j{{"tx_id", e.tx_id},
         {"timestamp", e.timestamp},
         {"kind", e.kind == LedgerKind::FeeReceived ? "fee_received" : "payment_instruction"},
         {"amount", e.amount},
         {"query_ref", e.query_ref},
         {"path", e.path}};
  j["counterparty"] = e.counterparty ? to_json(*e.counterparty) : json(nullptr);
  return j;
}

LedgerEntry ledger_entry_from_json(const json& j) {
  try {
    LedgerEntry e;
    e.tx_id = j.at("tx_id").get<std::string>();
    e.timestamp = j.at("timestamp").get<std::int64_t>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "fee_received") e.kind = LedgerKind::FeeReceived;
    else if (kind == "payment_instruction") e.kind = LedgerKind::PaymentInstruction;
    else throw StoreError(StoreErrc::SchemaViolation, "unknown ledger kind " + kind);
    e.amount = j.at("amount").get<std::uint64_t>();
    e.query_ref = j.at("query_ref").get<std::string>();
    e.path = j.value("path", std::vector<std::string>{});
    if (const auto c = j.find("counterparty"); c != j.end() && !c->is_null()) {
      e.counterparty = crypto_address_from_json(*c);
    }
    return e;
  } catch (const json::exception& ex) {
    throw StoreError(StoreErrc::SchemaViolation, ex.what());
  }
}

Comparator comparator_from_string(const std::string& s) {
  if (s == "<") return Comparator::Lt;
  if (s == "<=" || s == "≤") return Comparator::Le;
  if (s == "=" || s == "==") return Comparator::Eq;
  if (s == ">=" || s == "≥") return Comparator::Ge;
  if (s == ">") return Comparator::Gt;
  if (s == "!=" || s == "≠") return Comparator::Ne;
  throw StoreError(StoreErrc::BadPredicate, "unknown comparator '" + s + "'");
}

const char* to_string(Comparator c) {
  switch (c) {
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Eq: return "=";
    case Comparator::Ge: return ">=";
    case Comparator::Gt: return ">";
    case Comparator::Ne: return "!=";
  }
  return "?";
}

bool compare(const FieldValue& lhs, Comparator op, const FieldValue& rhs) {
  if (lhs.index() != rhs.index()) {
    throw StoreError(StoreErrc::BadPredicate, "comparing a number with text");
  }
  const auto cmp = lhs <=> rhs;
  switch (op) {
    case Comparator::Lt: return cmp < 0;
    case Comparator::Le: return cmp <= 0;
    case Comparator::Eq: return cmp == 0;
    case Comparator::Ge: return cmp >= 0;
    case Comparator::Gt: return cmp > 0;
    case Comparator::Ne: return cmp != 0;
  }
  return false;
}

void RecordFilter::validate() const {
  if (start > end) throw StoreError(StoreErrc::BadPredicate, "time range start is after end");
  for (const auto& p : predicates) {
    if (p.field.empty()) throw StoreError(StoreErrc::BadPredicate, "predicate without a field");
    const bool ordering = p.op != Comparator::Eq && p.op != Comparator::Ne;
    if (ordering && std::holds_alternative<std::string>(p.value)) {
      throw StoreError(StoreErrc::BadPredicate,
                       "comparator " + std::string(to_string(p.op)) + " needs a numeric constant for '" +
                           p.field + "'");
    }
  }
}

bool RecordFilter::matches(const SenseRecord& r) const {
  if (r.timestamp < start || r.timestamp > end) return false;
  if (!record_types.empty() && !record_types.contains(r.record_type)) return false;
  for (const auto& p : predicates) {
    const auto it = r.fields.find(p.field);
    if (it == r.fields.end()) return false;
    if (it->second.index() != p.value.index()) {
      throw StoreError(StoreErrc::BadPredicate,
                       "field '" + p.field + "' of record " + r.record_id + " has the other type");
    }
    if (!compare(it->second, p.op, p.value)) return false;
  }
  return true;
}

}  // namespace lifeserver::store
