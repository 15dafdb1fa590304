#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lifeserver/mind/query.hpp"
#include "lifeserver/store/sense_store.hpp"
#include "lifeserver/vdp/resolve.hpp"

namespace lifeserver::mind {

inline constexpr std::uint32_t kPpm = 1'000'000;

struct EngineConfig {
  std::size_t k_min = 5;
  std::uint64_t min_fee = 0;
  std::uint32_t retention_ppm = 0;  // share of each fee the node keeps, parts per million
  vdp::ResolutionLimits limits;
};

/// The records a query may see. Implementations must never hand out sealed
/// payloads.
class RecordSource {
 public:
  virtual ~RecordSource() = default;
  virtual std::vector<store::SenseRecord> candidates(const store::RecordFilter& filter) const = 0;
};

/// Runs MQL queries and settles their fees through the attribution VDP.
class Engine {
 public:
  Engine(EngineConfig config, const RecordSource& source, store::Ledger& ledger, vdp::Fetcher fetcher);

  /// Throws MindError(InsufficientData | FeeTooLow | BadPredicate | BadQuery).
  Insight execute(const MindQuery& query);

  /// Books the fee and one payment instruction per attribution payee (plus
  /// the node's retention when non-zero) in a single ledger write. Nothing is
  /// written if any step fails. Throws MindError(FeeMismatch |
  /// AlreadySettled | ResolutionFailed).
  std::vector<store::LedgerEntry> settle(const Insight& insight, std::uint64_t fee);

  /// Settles an insight this engine issued. Throws MindError(UnknownQueryRef).
  std::vector<store::LedgerEntry> settle(const std::string& query_ref, std::uint64_t fee);

  std::optional<Insight> issued(const std::string& query_ref) const;
  const EngineConfig& config() const noexcept { return config_; }

 private:
  struct Issued {
    Insight insight;
    vdp::CryptoAddress enterprise;
  };

  EngineConfig config_;
  const RecordSource& source_;
  store::Ledger& ledger_;
  vdp::Fetcher fetcher_;
  mutable std::mutex issued_mu_;
  std::map<std::string, Issued> issued_;
  std::mutex settle_mu_;
};

}  // namespace lifeserver::mind
