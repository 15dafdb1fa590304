#include "lifeserver/mind/query.hpp"

#include "lifeserver/vdp/codec.hpp"

namespace lifeserver::mind {

using nlohmann::json;

const char* to_string(AggregateOp op) {
  switch (op) {
    case AggregateOp::Count: return "count";
    case AggregateOp::Sum: return "sum";
    case AggregateOp::Mean: return "mean";
    case AggregateOp::Min: return "min";
    case AggregateOp::Max: return "max";
  }
  return "?";
}

const char* to_string(MindErrc code) {
  switch (code) {
    case MindErrc::InsufficientData: return "InsufficientData";
    case MindErrc::FeeTooLow: return "FeeTooLow";
    case MindErrc::BadPredicate: return "BadPredicate";
    case MindErrc::BadQuery: return "BadQuery";
    case MindErrc::UnknownQueryRef: return "UnknownQueryRef";
    case MindErrc::FeeMismatch: return "FeeMismatch";
    case MindErrc::AlreadySettled: return "AlreadySettled";
    case MindErrc::ResolutionFailed: return "ResolutionFailed";
  }
  return "Unknown";
}

MindError::MindError(MindErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

AggregateOp aggregate_op(const std::string& s) {
  if (s == "count") return AggregateOp::Count;
  if (s == "sum") return AggregateOp::Sum;
  if (s == "mean") return AggregateOp::Mean;
  if (s == "min") return AggregateOp::Min;
  if (s == "max") return AggregateOp::Max;
  throw MindError(MindErrc::BadQuery, "unknown aggregate '" + s + "'");
}

json result_json(AggregateOp op, double v) {
  if (op == AggregateOp::Count) return static_cast<std::uint64_t>(v);
  return v;
}

}  // namespace

MindQuery parse_query(const json& j) {
  static const std::set<std::string> known = {"record_types", "time_range", "predicates",
                                              "aggregate",    "group_by",   "offered_fee",
                                              "enterprise_payout_address"};
  MindQuery q;
  try {
    if (!j.is_object()) throw MindError(MindErrc::BadQuery, "query must be an object");
    for (const auto& [k, _] : j.items()) {
      if (!known.contains(k)) throw MindError(MindErrc::BadQuery, "unknown key '" + k + "'");
    }
    for (const auto& t : j.at("record_types")) q.record_types.insert(t.get<std::string>());
    const auto& range = j.at("time_range");
    if (!range.is_array() || range.size() != 2) {
      throw MindError(MindErrc::BadQuery, "time_range must be [start, end]");
    }
    q.start = range[0].get<std::int64_t>();
    q.end = range[1].get<std::int64_t>();
    if (q.start > q.end) throw MindError(MindErrc::BadQuery, "time_range start is after end");

    if (const auto p = j.find("predicates"); p != j.end()) {
      for (const auto& pj : *p) {
        store::FieldPredicate pred;
        pred.field = pj.at("field").get<std::string>();
        try {
          pred.op = store::comparator_from_string(pj.at("op").get<std::string>());
          pred.value = store::field_value_from_json(pj.at("value"));
          store::RecordFilter probe;
          probe.predicates = {pred};
          probe.validate();
        } catch (const store::StoreError& e) {
          throw MindError(MindErrc::BadPredicate, e.detail());
        }
        q.predicates.push_back(std::move(pred));
      }
    }

    const auto& agg = j.at("aggregate");
    if (agg.is_string()) {
      q.aggregate.op = aggregate_op(agg.get<std::string>());
    } else {
      q.aggregate.op = aggregate_op(agg.at("op").get<std::string>());
      q.aggregate.field = agg.value("field", std::string{});
    }
    if (q.aggregate.op != AggregateOp::Count && q.aggregate.field.empty()) {
      throw MindError(MindErrc::BadQuery, std::string(to_string(q.aggregate.op)) + " needs a field");
    }

    if (const auto g = j.find("group_by"); g != j.end() && !g->is_null()) {
      q.group_by = g->get<std::string>();
    }
    const auto& fee = j.at("offered_fee");
    if (!fee.is_number_unsigned()) {
      throw MindError(MindErrc::BadQuery, "offered_fee must be a non-negative integer");
    }
    q.offered_fee = fee.get<std::uint64_t>();
    q.enterprise_payout_address = store::crypto_address_from_json(j.at("enterprise_payout_address"));
  } catch (const json::exception& e) {
    throw MindError(MindErrc::BadQuery, e.what());
  } catch (const store::StoreError& e) {
    throw MindError(MindErrc::BadQuery, e.detail());
  }
  return q;
}

json to_json(const MindQuery& q) {
  json preds = json::array();
  for (const auto& p : q.predicates) {
    preds.push_back({{"field", p.field}, {"op", store::to_string(p.op)}, {"value", store::to_json(p.value)}});
  }
  json agg{{"op", to_string(q.aggregate.op)}};
  if (!q.aggregate.field.empty()) agg["field"] = q.aggregate.field;
  json j{{"record_types", q.record_types},
         {"time_range", {q.start, q.end}},
         {"predicates", std::move(preds)},
         {"aggregate", std::move(agg)},
         {"offered_fee", q.offered_fee},
         {"enterprise_payout_address", store::to_json(q.enterprise_payout_address)}};
  if (q.group_by) j["group_by"] = *q.group_by;
  return j;
}

json to_json(const Insight& in) {
  json result;
  if (const auto* scalar = std::get_if<double>(&in.result)) {
    result = result_json(in.op, *scalar);
  } else {
    result = json::object();
    for (const auto& [group, v] : std::get<std::map<std::string, double>>(in.result)) {
      result[group] = result_json(in.op, v);
    }
  }
  return json{{"aggregate", to_string(in.op)},
              {"result", std::move(result)},
              {"matched_count", in.matched_count},
              {"fee_charged", in.fee_charged},
              {"attribution", json::parse(vdp::serialize_vdp(in.attribution))},
              {"query_ref", in.query_ref}};
}

}  // namespace lifeserver::mind
