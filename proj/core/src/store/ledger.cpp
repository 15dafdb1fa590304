#include "lifeserver/store/sense_store.hpp"

#include <mutex>

namespace lifeserver::store {

Ledger::Ledger(std::filesystem::path file, LogOptions options) {
  log_ = std::make_unique<NdjsonLog>(std::move(file), options,
                                     [this](std::string_view line, std::size_t line_no) {
                                       try {
                                         entries_.push_back(ledger_entry_from_json(nlohmann::json::parse(line)));
                                       } catch (const std::exception& e) {
                                         throw StoreError(StoreErrc::Corrupt,
                                                          "line " + std::to_string(line_no) + ": " + e.what());
                                       }
                                     });
}

void Ledger::append(const LedgerEntry& entry) { append_all({entry}); }

void Ledger::append_all(const std::vector<LedgerEntry>& entries) {
  std::vector<std::string> lines;
  lines.reserve(entries.size());
  for (const auto& e : entries) lines.push_back(to_json(e).dump());
  std::unique_lock lock(mu_);
  log_->append(lines);
  entries_.insert(entries_.end(), entries.begin(), entries.end());
}

std::vector<LedgerEntry> Ledger::read(const std::string& query_ref) const {
  std::shared_lock lock(mu_);
  std::vector<LedgerEntry> out;
  for (const auto& e : entries_) {
    if (e.query_ref == query_ref) out.push_back(e);
  }
  return out;
}

std::vector<LedgerEntry> Ledger::all() const {
  std::shared_lock lock(mu_);
  return entries_;
}

std::size_t Ledger::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

}  // namespace lifeserver::store
