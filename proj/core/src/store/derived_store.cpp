#include "lifeserver/store/sense_store.hpp"

#include <mutex>

#include "lifeserver/common/random.hpp"

namespace lifeserver::store {

DerivedStore::DerivedStore(std::filesystem::path file, LogOptions options) {
  log_ = std::make_unique<NdjsonLog>(std::move(file), options,
                                     [this](std::string_view line, std::size_t line_no) {
                                       try {
                                         auto r = derived_record_from_json(nlohmann::json::parse(line));
                                         by_id_.emplace(r.record_id, records_.size());
                                         records_.push_back(std::move(r));
                                       } catch (const std::exception& e) {
                                         throw StoreError(StoreErrc::Corrupt,
                                                          "line " + std::to_string(line_no) + ": " + e.what());
                                       }
                                     });
}

std::string DerivedStore::append(DerivedRecord record) {
  if (record.record_id.empty()) record.record_id = random_hex(16);
  if (record.origin_record_id.empty() || record.feature_name.empty()) {
    throw StoreError(StoreErrc::SchemaViolation, "derived record needs an origin and a feature name");
  }
  const std::string line = to_json(record).dump();
  std::unique_lock lock(mu_);
  if (by_id_.contains(record.record_id)) {
    throw StoreError(StoreErrc::DuplicateId, "derived record " + record.record_id + " already stored");
  }
  log_->append(line);
  by_id_.emplace(record.record_id, records_.size());
  records_.push_back(record);
  return record.record_id;
}

std::vector<DerivedRecord> DerivedStore::all() const {
  std::shared_lock lock(mu_);
  return records_;
}

std::vector<DerivedRecord> DerivedStore::for_origin(const std::string& origin_record_id) const {
  std::shared_lock lock(mu_);
  std::vector<DerivedRecord> out;
  for (const auto& r : records_) {
    if (r.origin_record_id == origin_record_id) out.push_back(r);
  }
  return out;
}

bool DerivedStore::contains(const std::string& record_id) const {
  std::shared_lock lock(mu_);
  return by_id_.contains(record_id);
}

std::size_t DerivedStore::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

}  // namespace lifeserver::store
