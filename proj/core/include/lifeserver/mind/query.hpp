#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lifeserver/store/records.hpp"
#include "lifeserver/vdp/document.hpp"

namespace lifeserver::mind {

enum class AggregateOp { Count, Sum, Mean, Min, Max };

const char* to_string(AggregateOp op);

struct Aggregate {
  AggregateOp op = AggregateOp::Count;
  std::string field;  // empty for count
};

/// A declarative MQL query. Enterprises describe what they want computed;
/// they never see the records it is computed from.
struct MindQuery {
  std::set<std::string> record_types;
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::vector<store::FieldPredicate> predicates;
  Aggregate aggregate;
  std::optional<std::string> group_by;
  std::uint64_t offered_fee = 0;
  vdp::CryptoAddress enterprise_payout_address;
};

using InsightResult = std::variant<double, std::map<std::string, double>>;

struct Insight {
  AggregateOp op = AggregateOp::Count;
  InsightResult result;
  std::size_t matched_count = 0;
  vdp::VdpDocument attribution;
  std::uint64_t fee_charged = 0;
  std::string query_ref;
};

enum class MindErrc {
  InsufficientData,
  FeeTooLow,
  BadPredicate,
  BadQuery,
  UnknownQueryRef,
  FeeMismatch,
  AlreadySettled,
  ResolutionFailed,
};

const char* to_string(MindErrc code);

class MindError : public std::runtime_error {
 public:
  MindError(MindErrc code, const std::string& what);
  MindErrc code() const noexcept { return code_; }

 private:
  MindErrc code_;
};

/// Wire form:
///
///   {"record_types": ["heart_rate"], "time_range": [0, 1700000000000],
///    "predicates": [{"field": "bpm", "op": ">=", "value": 40}],
///    "aggregate": {"op": "mean", "field": "bpm"}, "group_by": "activity",
///    "offered_fee": 1000, "enterprise_payout_address": {"bitcoin": "1..."}}
///
/// Throws MindError(BadQuery | BadPredicate).
MindQuery parse_query(const nlohmann::json& j);
nlohmann::json to_json(const MindQuery& q);

/// result, matched_count, fee_charged, attribution (inline document), query_ref.
nlohmann::json to_json(const Insight& insight);

}  // namespace lifeserver::mind
