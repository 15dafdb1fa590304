#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "lifeserver/store/ndjson_log.hpp"
#include "lifeserver/store/records.hpp"

namespace lifeserver::store {

inline constexpr const char* kPublicSenseFile = "sense.pub.ndjson";
inline constexpr const char* kPrivateSenseFile = "sense.priv.ndjson";
inline constexpr const char* kDerivedFile = "derived.ndjson";
inline constexpr const char* kLedgerFile = "ledger.ndjson";

/// Append-only sense record store with in-memory id and timestamp indexes
/// rebuilt from the file on open. There is deliberately no update or delete.
class SenseStore {
 public:
  explicit SenseStore(std::filesystem::path file, LogOptions options = {});

  /// Assigns a 128-bit id when `record.record_id` is empty. Throws
  /// StoreError(DuplicateId | SchemaViolation | StorageFull).
  std::string append(SenseRecord record);

  std::optional<SenseRecord> get(const std::string& record_id) const;
  bool contains(const std::string& record_id) const;

  /// Records passing `filter`, ordered by timestamp then insertion.
  std::vector<SenseRecord> query(const RecordFilter& filter) const;

  /// Every record in insertion order.
  std::vector<SenseRecord> scan() const;

  std::size_t size() const;
  const std::filesystem::path& file() const { return log_->path(); }
  void sync() { log_->sync(); }

 private:
  void index(SenseRecord record);

  mutable std::shared_mutex mu_;
  std::vector<SenseRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::multimap<std::int64_t, std::size_t> by_time_;
  std::unique_ptr<NdjsonLog> log_;
};

/// Features extracted on the private node, or imported by the public node.
class DerivedStore {
 public:
  explicit DerivedStore(std::filesystem::path file, LogOptions options = {});

  /// Throws StoreError(DuplicateId | StorageFull).
  std::string append(DerivedRecord record);
  std::vector<DerivedRecord> all() const;
  std::vector<DerivedRecord> for_origin(const std::string& origin_record_id) const;
  bool contains(const std::string& record_id) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<DerivedRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unique_ptr<NdjsonLog> log_;
};

/// Settlement ledger. Every append is fsync'd; a batch lands in one write.
class Ledger {
 public:
  explicit Ledger(std::filesystem::path file, LogOptions options = {SyncPolicy::EveryAppend});

  void append(const LedgerEntry& entry);
  /// All-or-nothing from the reader's point of view.
  void append_all(const std::vector<LedgerEntry>& entries);

  /// Entries for one settlement in append order; empty for unknown refs.
  std::vector<LedgerEntry> read(const std::string& query_ref) const;
  std::vector<LedgerEntry> all() const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<LedgerEntry> entries_;
  std::unique_ptr<NdjsonLog> log_;
};

}  // namespace lifeserver::store
