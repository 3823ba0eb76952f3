#include <istream>
#include <ostream>

#include "json.hpp"
#include "medexchain/ledger.hpp"

namespace medexchain::ledger {

bool AuditFilter::matches(const AuditEntry& e) const {
  if (kind && e.kind != *kind) return false;
  if (party && e.party != *party) return false;
  if (outcome && e.outcome != *outcome) return false;
  if (id && e.id != *id) return false;
  return true;
}

std::uint64_t AuditLog::append(std::string_view kind, std::string_view party,
                               std::int64_t timestamp_ms, std::string_view outcome,
                               const Digest& id) {
  std::lock_guard lock(mu_);
  std::uint64_t seq = entries_.empty() ? 1 : entries_.back().seq + 1;
  entries_.push_back(AuditEntry{seq, std::string(kind), std::string(party), timestamp_ms,
                                std::string(outcome), id});
  return seq;
}

std::vector<AuditEntry> AuditLog::query(const AuditFilter& filter) const {
  std::lock_guard lock(mu_);
  std::vector<AuditEntry> out;
  for (const auto& e : entries_) {
    if (filter.matches(e)) out.push_back(e);
  }
  return out;
}

std::size_t AuditLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void AuditLog::write_jsonl(std::ostream& out) const {
  std::lock_guard lock(mu_);
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["seq"] = e.seq;
    j["kind"] = e.kind;
    j["party"] = e.party;
    j["timestamp_ms"] = e.timestamp_ms;
    j["outcome"] = e.outcome;
    j["id_hex"] = to_hex(e.id);
    out << j.dump() << '\n';
  }
}

void AuditLog::load_jsonl(std::istream& in) {
  std::string line;
  std::vector<AuditEntry> loaded;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      loaded.push_back(AuditEntry{j.at("seq").get<std::uint64_t>(), j.at("kind").get<std::string>(),
                                  j.at("party").get<std::string>(),
                                  j.at("timestamp_ms").get<std::int64_t>(),
                                  j.at("outcome").get<std::string>(),
                                  digest_from_hex(j.at("id_hex").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::malformed_encoding, std::string("bad audit line: ") + e.what());
    }
  }
  std::lock_guard lock(mu_);
  for (auto& e : loaded) {
    if (!entries_.empty() && e.seq <= entries_.back().seq) {
      throw Error(Errc::malformed_encoding, "audit sequence numbers must increase");
    }
    entries_.push_back(std::move(e));
  }
}

}  // namespace medexchain::ledger
