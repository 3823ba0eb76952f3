#include <fstream>

#include "json.hpp"
#include "medexchain/codec.hpp"
#include "medexchain/ledger.hpp"

namespace medexchain::ledger {

namespace {

std::string chain_party(scheme::ChainTag tag) { return std::string("chain-") + scheme::to_string(tag); }

}  // namespace

Relay::Relay(scheme::GroupPtr grp, ContentStore& store, Clock clock)
    : group_(std::move(grp)), store_(store), clock_(std::move(clock)) {}

RegistrationReceipt Relay::register_chain(scheme::ChainTag tag, const Digest& params_digest) {
  std::lock_guard lock(mu_);
  if (registered_.count(tag)) {
    throw Error(Errc::duplicate_registration, "chain " + chain_party(tag) + " is already registered");
  }
  registered_.insert(tag);
  auto now = clock_();
  auto seq = audit_.append(audit_kind::register_chain, chain_party(tag), now, outcome::ok, params_digest);
  return RegistrationReceipt{tag, params_digest, seq, now};
}

bool Relay::is_registered(scheme::ChainTag tag) const {
  std::lock_guard lock(mu_);
  return registered_.count(tag) != 0;
}

Digest Relay::reencrypt(scheme::ChainTag requesting_chain, std::string_view requester,
                        const scheme::SanitizedCiphertext& ct, const scheme::SanitizedReKey& rk,
                        std::optional<ByteView> payload) {
  if (!is_registered(requesting_chain)) {
    throw Error(Errc::unregistered_chain, chain_party(requesting_chain) + " is not registered");
  }
  auto wire = scheme::encode_wire(scheme::reenc(ct, rk));

  std::lock_guard lock(mu_);
  auto data2 = store_.put(wire);
  std::optional<Address> payload_address;
  if (payload) payload_address = store_.put(*payload);
  records_.emplace(data2, payload_address);
  audit_.append(audit_kind::share, requester, clock_(), outcome::ok, data2);
  return data2;
}

RelayRecord Relay::fetch(const Digest& data2, std::string_view requester) {
  std::lock_guard lock(mu_);
  auto it = records_.find(data2);
  if (it == records_.end()) {
    audit_.append(audit_kind::fetch, requester, clock_(), outcome::refused, data2);
    throw Error(Errc::not_found, "no re-encrypted ciphertext under " + to_hex(data2));
  }
  auto wire = store_.get(data2);
  if (!wire) throw Error(Errc::internal_consistency, "relay record missing from the store");
  RelayRecord record;
  record.ciphertext = scheme::decode_reciphertext(group_, *wire);
  if (it->second) {
    record.payload = store_.get(*it->second);
    if (!record.payload) throw Error(Errc::internal_consistency, "relay payload missing from the store");
  }
  audit_.append(audit_kind::fetch, requester, clock_(), outcome::ok, data2);
  return record;
}

void Relay::record_refusal(std::string_view requester, const Digest& id) {
  audit_.append(audit_kind::share, requester, clock_(), outcome::refused, id);
}

std::vector<AuditEntry> Relay::audit_query(const AuditFilter& filter) const { return audit_.query(filter); }

void Relay::save_state(const std::filesystem::path& path) const {
  std::lock_guard lock(mu_);
  nlohmann::ordered_json j;
  auto& chains = j["registered"] = nlohmann::ordered_json::array();
  for (auto tag : registered_) chains.push_back(scheme::to_string(tag));
  auto& records = j["records"] = nlohmann::ordered_json::array();
  for (const auto& [data2, payload] : records_) {
    nlohmann::ordered_json r{{"data2", to_hex(data2)}};
    if (payload) r["payload"] = to_hex(*payload);
    records.push_back(std::move(r));
  }
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
}

void Relay::load_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::lock_guard lock(mu_);
  try {
    auto j = nlohmann::json::parse(in);
    registered_.clear();
    for (const auto& c : j.at("registered")) {
      auto name = c.get<std::string>();
      if (name == "A") registered_.insert(scheme::ChainTag::A);
      else if (name == "B") registered_.insert(scheme::ChainTag::B);
      else throw Error(Errc::malformed_encoding, "unknown chain " + name);
    }
    records_.clear();
    for (const auto& r : j.at("records")) {
      std::optional<Address> payload;
      if (r.contains("payload")) payload = digest_from_hex(r["payload"].get<std::string>());
      records_.emplace(digest_from_hex(r.at("data2").get<std::string>()), payload);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_encoding, std::string("bad relay state: ") + e.what());
  }
}

}  // namespace medexchain::ledger
