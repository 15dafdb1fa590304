#include "lifeserver/store/sense_store.hpp"

#include <mutex>

#include "lifeserver/common/random.hpp"

namespace lifeserver::store {

SenseStore::SenseStore(std::filesystem::path file, LogOptions options) {
  log_ = std::make_unique<NdjsonLog>(std::move(file), options,
                                     [this](std::string_view line, std::size_t line_no) {
                                       SenseRecord r;
                                       try {
                                         r = sense_record_from_json(nlohmann::json::parse(line));
                                       } catch (const std::exception& e) {
                                         throw StoreError(StoreErrc::Corrupt,
                                                          "line " + std::to_string(line_no) + ": " + e.what());
                                       }
                                       index(std::move(r));
                                     });
}

void SenseStore::index(SenseRecord record) {
  const std::size_t i = records_.size();
  by_id_.emplace(record.record_id, i);
  by_time_.emplace(record.timestamp, i);
  records_.push_back(std::move(record));
}

std::string SenseStore::append(SenseRecord record) {
  if (record.record_id.empty()) record.record_id = random_hex(16);
  validate(record);
  const std::string line = to_json(record).dump();

  std::unique_lock lock(mu_);
  if (by_id_.contains(record.record_id)) {
    throw StoreError(StoreErrc::DuplicateId, "record " + record.record_id + " already stored");
  }
  log_->append(line);
  std::string id = record.record_id;
  index(std::move(record));
  return id;
}

std::optional<SenseRecord> SenseStore::get(const std::string& record_id) const {
  std::shared_lock lock(mu_);
  const auto it = by_id_.find(record_id);
  if (it == by_id_.end()) return std::nullopt;
  return records_[it->second];
}

bool SenseStore::contains(const std::string& record_id) const {
  std::shared_lock lock(mu_);
  return by_id_.contains(record_id);
}

std::vector<SenseRecord> SenseStore::query(const RecordFilter& filter) const {
  filter.validate();
  std::shared_lock lock(mu_);
  std::vector<SenseRecord> out;
  const auto first = by_time_.lower_bound(filter.start);
  const auto last = by_time_.upper_bound(filter.end);
  for (auto it = first; it != last; ++it) {
    const SenseRecord& r = records_[it->second];
    if (filter.matches(r)) out.push_back(r);
  }
  return out;
}

std::vector<SenseRecord> SenseStore::scan() const {
  std::shared_lock lock(mu_);
  return records_;
}

std::size_t SenseStore::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

}  // namespace lifeserver::store
