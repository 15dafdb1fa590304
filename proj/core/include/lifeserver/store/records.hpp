#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lifeserver/sealed/envelope.hpp"
#include "lifeserver/vdp/document.hpp"

namespace lifeserver::store {

enum class Privacy { Public, Private, Sealed };

const char* to_string(Privacy p);
Privacy privacy_from_string(const std::string& s);

using FieldValue = std::variant<double, std::string>;

/// Inline attribution document or the URL where the source publishes one.
using SourceVdp = std::variant<vdp::VdpDocument, std::string>;

/// One unit of ingested personal data.
///
/// Sealed records carry no fields. On the private node they hold the
/// envelope; on the public node they are metadata-only stubs (`sealed_stub`).
struct SenseRecord {
  std::string record_id;
  std::string source_id;
  SourceVdp source_vdp;
  std::int64_t timestamp = 0;  // UTC milliseconds
  std::string record_type;
  Privacy privacy = Privacy::Public;
  std::map<std::string, FieldValue> fields;
  std::optional<sealed::SealedEnvelope> sealed_payload;
  bool sealed_stub = false;

  bool operator==(const SenseRecord&) const = default;
};

/// A whitelisted feature the private node extracted from a sealed record.
struct DerivedRecord {
  std::string record_id;
  std::string origin_record_id;
  std::string feature_name;
  FieldValue feature_value;
  std::int64_t timestamp = 0;

  bool operator==(const DerivedRecord&) const = default;
};

enum class LedgerKind { FeeReceived, PaymentInstruction };

struct LedgerEntry {
  std::string tx_id;
  std::int64_t timestamp = 0;
  LedgerKind kind = LedgerKind::FeeReceived;
  std::optional<vdp::CryptoAddress> counterparty;
  std::uint64_t amount = 0;
  std::string query_ref;
  std::vector<std::string> path;  // VDP branch ids for payment instructions

  bool operator==(const LedgerEntry&) const = default;
};

enum class StoreErrc { DuplicateId, StorageFull, SchemaViolation, BadPredicate, Corrupt, Io };

const char* to_string(StoreErrc code);

class StoreError : public std::runtime_error {
 public:
  StoreError(StoreErrc code, const std::string& what);
  StoreErrc code() const noexcept { return code_; }
  /// The message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  StoreErrc code_;
  std::string detail_;
};

/// Throws StoreError(SchemaViolation) naming the broken invariant.
void validate(const SenseRecord& record);

nlohmann::json to_json(const FieldValue& v);
FieldValue field_value_from_json(const nlohmann::json& j);  // number or string

nlohmann::json to_json(const SourceVdp& v);
SourceVdp source_vdp_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SenseRecord& r);
SenseRecord sense_record_from_json(const nlohmann::json& j);  // throws SchemaViolation

nlohmann::json to_json(const DerivedRecord& r);
DerivedRecord derived_record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LedgerEntry& e);
LedgerEntry ledger_entry_from_json(const nlohmann::json& j);

nlohmann::json to_json(const vdp::CryptoAddress& a);  // {"<scheme>": "<address>"}
vdp::CryptoAddress crypto_address_from_json(const nlohmann::json& j);

enum class Comparator { Lt, Le, Eq, Ge, Gt, Ne };

/// Accepts "<", "<=", "=", ">=", ">", "!=" and the symbols ≤ ≥ ≠.
Comparator comparator_from_string(const std::string& s);
const char* to_string(Comparator c);

struct FieldPredicate {
  std::string field;
  Comparator op = Comparator::Eq;
  FieldValue value;
};

/// Conjunction of record type, inclusive time range and field predicates.
/// An empty type set admits every type. A record lacking a predicate's field
/// does not match.
struct RecordFilter {
  std::set<std::string> record_types;
  std::int64_t start = std::numeric_limits<std::int64_t>::min();
  std::int64_t end = std::numeric_limits<std::int64_t>::max();
  std::vector<FieldPredicate> predicates;

  /// Throws StoreError(BadPredicate) for start > end, an empty field name or
  /// an ordering comparator on a text constant.
  void validate() const;

  /// Throws StoreError(BadPredicate) when a record's field has the other type
  /// than the predicate constant.
  bool matches(const SenseRecord& r) const;
};

bool compare(const FieldValue& lhs, Comparator op, const FieldValue& rhs);

}  // namespace lifeserver::store
