#pragma once

// Random stores and MQL queries, plus a deliberately naive oracle that scans
// every record. Field values are small integers so sums are exact in double.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lifeserver/mind/query.hpp"
#include "support/records.hpp"

namespace lifeserver::testing {

inline const std::vector<std::string> kTypes = {"heart_rate", "steps", "sleep"};
inline const std::vector<std::string> kActivities = {"walk", "run", "rest", "cycle"};

inline std::vector<store::SenseRecord> random_store(std::mt19937_64& rng, std::size_t n,
                                                    std::size_t sources = 8) {
  std::vector<store::SenseRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& type = kTypes[rng() % kTypes.size()];
    std::map<std::string, store::FieldValue> fields;
    if (rng() % 10 != 0) fields["value"] = static_cast<double>(rng() % 201);
    if (rng() % 10 != 0) fields["activity"] = kActivities[rng() % kActivities.size()];
    if (rng() % 3 == 0) fields["quality"] = static_cast<double>(rng() % 5);
    auto r = make_record("src" + std::to_string(rng() % sources), type,
                         static_cast<std::int64_t>(rng() % 100000), std::move(fields),
                         rng() % 4 == 0 ? store::Privacy::Private : store::Privacy::Public);
    r.record_id = "r" + std::to_string(i);
    out.push_back(std::move(r));
  }
  return out;
}

inline mind::MindQuery random_query(std::mt19937_64& rng) {
  mind::MindQuery q;
  for (const auto& t : kTypes) {
    if (rng() % 2) q.record_types.insert(t);
  }
  q.start = static_cast<std::int64_t>(rng() % 60000);
  q.end = q.start + static_cast<std::int64_t>(rng() % 60000);
  static const store::Comparator ops[] = {store::Comparator::Lt, store::Comparator::Le,
                                          store::Comparator::Eq, store::Comparator::Ge,
                                          store::Comparator::Gt, store::Comparator::Ne};
  const int preds = static_cast<int>(rng() % 3);
  for (int i = 0; i < preds; ++i) {
    if (rng() % 3 == 0) {
      q.predicates.push_back({"activity", rng() % 2 ? store::Comparator::Eq : store::Comparator::Ne,
                              kActivities[rng() % kActivities.size()]});
    } else {
      q.predicates.push_back({rng() % 2 ? "value" : "quality", ops[rng() % 6],
                              static_cast<double>(rng() % 201)});
    }
  }
  static const mind::AggregateOp aggs[] = {mind::AggregateOp::Count, mind::AggregateOp::Sum,
                                           mind::AggregateOp::Mean, mind::AggregateOp::Min,
                                           mind::AggregateOp::Max};
  q.aggregate.op = aggs[rng() % 5];
  if (q.aggregate.op != mind::AggregateOp::Count) q.aggregate.field = "value";
  if (rng() % 3 == 0) q.group_by = "activity";
  q.enterprise_payout_address = {"bitcoin", "1Enterprise"};
  return q;
}

struct OracleAnswer {
  bool insufficient = false;
  std::size_t matched = 0;
  std::optional<double> scalar;
  std::map<std::string, double> groups;
  std::size_t suppressed = 0;  // groups that matched but stayed below k_min
};

inline bool oracle_compare(const store::FieldValue& a, store::Comparator op, const store::FieldValue& b) {
  if (a.index() != b.index()) return false;
  const bool lt = a < b;
  const bool eq = a == b;
  switch (op) {
    case store::Comparator::Lt: return lt;
    case store::Comparator::Le: return lt || eq;
    case store::Comparator::Eq: return eq;
    case store::Comparator::Ge: return !lt;
    case store::Comparator::Gt: return !lt && !eq;
    case store::Comparator::Ne: return !eq;
  }
  return false;
}

inline OracleAnswer oracle(const std::vector<store::SenseRecord>& records, const mind::MindQuery& q,
                           std::size_t k_min) {
  struct Hit {
    double value;
    std::string group;
  };
  std::vector<Hit> hits;
  for (const auto& r : records) {
    if (r.privacy == store::Privacy::Sealed) continue;
    if (!q.record_types.empty() && !q.record_types.count(r.record_type)) continue;
    if (r.timestamp < q.start || r.timestamp > q.end) continue;
    bool ok = true;
    for (const auto& p : q.predicates) {
      const auto it = r.fields.find(p.field);
      if (it == r.fields.end() || !oracle_compare(it->second, p.op, p.value)) ok = false;
    }
    if (!ok) continue;
    Hit h{0.0, {}};
    if (!q.aggregate.field.empty()) {
      const auto it = r.fields.find(q.aggregate.field);
      if (it == r.fields.end()) continue;
      h.value = std::get<double>(it->second);
    }
    if (q.group_by) {
      const auto it = r.fields.find(*q.group_by);
      if (it == r.fields.end()) continue;
      h.group = std::get<std::string>(it->second);
    }
    hits.push_back(h);
  }

  auto fold = [&](const std::vector<double>& vs) {
    double sum = 0;
    for (double v : vs) sum += v;
    switch (q.aggregate.op) {
      case mind::AggregateOp::Count: return static_cast<double>(vs.size());
      case mind::AggregateOp::Sum: return sum;
      case mind::AggregateOp::Mean: return sum / static_cast<double>(vs.size());
      case mind::AggregateOp::Min: return *std::min_element(vs.begin(), vs.end());
      case mind::AggregateOp::Max: return *std::max_element(vs.begin(), vs.end());
    }
    return 0.0;
  };

  OracleAnswer a;
  a.matched = hits.size();
  if (hits.size() < k_min) {
    a.insufficient = true;
    return a;
  }
  if (!q.group_by) {
    std::vector<double> vs;
    for (const auto& h : hits) vs.push_back(h.value);
    a.scalar = fold(vs);
    return a;
  }
  std::map<std::string, std::vector<double>> by_group;
  for (const auto& h : hits) by_group[h.group].push_back(h.value);
  for (const auto& [g, vs] : by_group) {
    if (vs.size() >= k_min) {
      a.groups[g] = fold(vs);
    } else {
      ++a.suppressed;
    }
  }
  a.insufficient = a.groups.empty();
  return a;
}

inline bool close_enough(mind::AggregateOp op, double got, double want) {
  if (op != mind::AggregateOp::Mean) return got == want;
  return std::fabs(got - want) <= 1e-9 * std::max(1.0, std::fabs(want));
}

}  // namespace lifeserver::testing
