#include "lifeserver/mind/engine.hpp"

#include <algorithm>
#include <limits>

#include "lifeserver/common/random.hpp"
#include "lifeserver/vdp/attribution.hpp"
#include "lifeserver/vdp/distribute.hpp"

namespace lifeserver::mind {
namespace {

__extension__ typedef unsigned __int128 u128;

struct Accumulator {
  std::size_t count = 0;
  long double sum = 0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void add(double v) {
    ++count;
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
  }

  double value(AggregateOp op) const {
    switch (op) {
      case AggregateOp::Count: return static_cast<double>(count);
      case AggregateOp::Sum: return static_cast<double>(sum);
      case AggregateOp::Mean: return static_cast<double>(sum / static_cast<long double>(count));
      case AggregateOp::Min: return min;
      case AggregateOp::Max: return max;
    }
    return 0;
  }
};

std::string group_key(const store::FieldValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return store::to_json(v).dump();
}

vdp::VdpNode payee_node(const store::SourceVdp& source) {
  if (const auto* url = std::get_if<std::string>(&source)) return vdp::ExternalRef{*url};
  return std::get<vdp::VdpDocument>(source).root;
}

}  // namespace

Engine::Engine(EngineConfig config, const RecordSource& source, store::Ledger& ledger,
               vdp::Fetcher fetcher)
    : config_(std::move(config)), source_(source), ledger_(ledger), fetcher_(std::move(fetcher)) {
  if (config_.k_min < 1) throw std::invalid_argument("k_min must be at least 1");
  if (config_.retention_ppm > kPpm) throw std::invalid_argument("retention above 100%");
}

Insight Engine::execute(const MindQuery& query) {
  if (query.offered_fee < config_.min_fee) {
    throw MindError(MindErrc::FeeTooLow, "offered " + std::to_string(query.offered_fee) +
                                             ", minimum is " + std::to_string(config_.min_fee));
  }
  if (query.start > query.end) throw MindError(MindErrc::BadQuery, "time range start is after end");
  if (query.aggregate.op != AggregateOp::Count && query.aggregate.field.empty()) {
    throw MindError(MindErrc::BadQuery, "aggregate needs a field");
  }

  store::RecordFilter filter{query.record_types, query.start, query.end, query.predicates};
  std::vector<store::SenseRecord> candidates;
  try {
    filter.validate();
    candidates = source_.candidates(filter);
  } catch (const store::StoreError& e) {
    throw MindError(MindErrc::BadPredicate, e.detail());
  }

  struct Match {
    const store::SenseRecord* record;
    double value;
    std::string group;
  };
  std::vector<Match> matched;
  for (const auto& r : candidates) {
    if (r.privacy == store::Privacy::Sealed) continue;
    Match m{&r, 0.0, {}};
    if (query.aggregate.op != AggregateOp::Count) {
      const auto it = r.fields.find(query.aggregate.field);
      if (it == r.fields.end()) continue;
      const auto* d = std::get_if<double>(&it->second);
      if (!d) {
        throw MindError(MindErrc::BadPredicate,
                        "aggregate field '" + query.aggregate.field + "' is not numeric");
      }
      m.value = *d;
    }
    if (query.group_by) {
      const auto it = r.fields.find(*query.group_by);
      if (it == r.fields.end()) continue;
      m.group = group_key(it->second);
    }
    matched.push_back(std::move(m));
  }

  if (matched.size() < config_.k_min) {
    throw MindError(MindErrc::InsufficientData, std::to_string(matched.size()) +
                                                    " matching records, need " +
                                                    std::to_string(config_.k_min));
  }

  Insight insight;
  insight.op = query.aggregate.op;
  insight.matched_count = matched.size();
  insight.fee_charged = query.offered_fee;

  std::vector<const Match*> released;
  if (!query.group_by) {
    Accumulator acc;
    for (const auto& m : matched) {
      acc.add(m.value);
      released.push_back(&m);
    }
    insight.result = acc.value(query.aggregate.op);
  } else {
    std::map<std::string, std::vector<const Match*>> groups;
    for (const auto& m : matched) groups[m.group].push_back(&m);
    std::map<std::string, double> result;
    for (const auto& [key, members] : groups) {
      if (members.size() < config_.k_min) continue;  // suppressed
      Accumulator acc;
      for (const auto* m : members) {
        acc.add(m->value);
        released.push_back(m);
      }
      result[key] = acc.value(query.aggregate.op);
    }
    if (result.empty()) {
      throw MindError(MindErrc::InsufficientData, "every group is below the disclosure threshold");
    }
    insight.result = std::move(result);
  }

  // Weight each source by the records it contributed to what is released.
  std::map<std::string, vdp::Contribution> contributions;
  for (const auto* m : released) {
    auto [it, inserted] = contributions.try_emplace(m->record->source_id,
                                                    vdp::Contribution{0, payee_node(m->record->source_vdp)});
    ++it->second.weight;
  }
  insight.attribution = vdp::build_attribution_vdp(contributions, "data sources behind one insight");
  insight.query_ref = random_hex(16);

  std::lock_guard lock(issued_mu_);
  issued_.emplace(insight.query_ref, Issued{insight, query.enterprise_payout_address});
  return insight;
}

std::vector<store::LedgerEntry> Engine::settle(const Insight& insight, std::uint64_t fee) {
  if (fee != insight.fee_charged) {
    throw MindError(MindErrc::FeeMismatch, "paid " + std::to_string(fee) + ", charged " +
                                               std::to_string(insight.fee_charged));
  }
  std::lock_guard settle_lock(settle_mu_);
  for (const auto& e : ledger_.read(insight.query_ref)) {
    if (e.kind == store::LedgerKind::FeeReceived) {
      throw MindError(MindErrc::AlreadySettled, "query " + insight.query_ref + " is settled");
    }
  }

  std::optional<vdp::CryptoAddress> enterprise;
  {
    std::lock_guard lock(issued_mu_);
    if (const auto it = issued_.find(insight.query_ref); it != issued_.end()) {
      enterprise = it->second.enterprise;
    }
  }

  const std::uint64_t retention = static_cast<std::uint64_t>(
      static_cast<u128>(fee) * config_.retention_ppm / kPpm);
  std::vector<vdp::PaymentInstruction> payments;
  try {
    const auto resolved = vdp::resolve(insight.attribution, fetcher_, config_.limits);
    payments = vdp::distribute(resolved, fee - retention);
  } catch (const vdp::VdpError& e) {
    throw MindError(MindErrc::ResolutionFailed, e.what());
  }

  const std::int64_t now = now_ms();
  std::vector<store::LedgerEntry> entries;
  entries.push_back({random_hex(16), now, store::LedgerKind::FeeReceived, enterprise, fee,
                     insight.query_ref, {}});
  std::uint64_t booked = 0;
  for (const auto& p : payments) {
    entries.push_back({random_hex(16), now, store::LedgerKind::PaymentInstruction, p.address,
                       p.amount, insight.query_ref, p.path});
    booked += p.amount;
  }
  if (retention > 0) {
    entries.push_back({random_hex(16), now, store::LedgerKind::PaymentInstruction, std::nullopt,
                       retention, insight.query_ref, {"ls_retention"}});
    booked += retention;
  }
  if (booked != fee) throw std::logic_error("settlement does not conserve the fee");

  ledger_.append_all(entries);
  return entries;
}

std::vector<store::LedgerEntry> Engine::settle(const std::string& query_ref, std::uint64_t fee) {
  const auto insight = issued(query_ref);
  if (!insight) throw MindError(MindErrc::UnknownQueryRef, "no insight " + query_ref);
  return settle(*insight, fee);
}

std::optional<Insight> Engine::issued(const std::string& query_ref) const {
  std::lock_guard lock(issued_mu_);
  const auto it = issued_.find(query_ref);
  if (it == issued_.end()) return std::nullopt;
  return it->second.insight;
}

}  // namespace lifeserver::mind
