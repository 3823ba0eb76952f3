#include <fstream>

#include "json.hpp"
#include "medexchain/codec.hpp"
#include "medexchain/digest.hpp"
#include "medexchain/ledger.hpp"

namespace medexchain::ledger {

std::string_view message(Refusal r) noexcept {
  return r == Refusal::access_limit ? kAccessLimitReached : kTargetMissing;
}

namespace {

std::string chain_party(scheme::ChainTag tag) { return std::string("chain-") + scheme::to_string(tag); }

Digest access_digest(std::string_view requester, std::int64_t timestamp_ms, const CiphertextId& id) {
  Bytes buf;
  append_u16_be(buf, static_cast<std::uint16_t>(requester.size()));
  append(buf, as_bytes(requester));
  append_u64_be(buf, static_cast<std::uint64_t>(timestamp_ms));
  append(buf, id);
  return sha256(buf);
}

}  // namespace

ChainNode::ChainNode(scheme::ChainTag tag, scheme::GroupPtr grp, ContentStore& store,
                     std::size_t max_access_count, Clock clock)
    : tag_(tag),
      group_(std::move(grp)),
      store_(store),
      max_access_count_(max_access_count),
      clock_(std::move(clock)) {
  if (max_access_count_ == 0) throw Error(Errc::invalid_scalar, "max_access_count must be positive");
}

void ChainNode::record_registration(const RegistrationReceipt& receipt) {
  if (receipt.tag != tag_) throw Error(Errc::wrong_chain, "registration receipt is for another chain");
  std::lock_guard lock(mu_);
  if (registration_) throw Error(Errc::duplicate_registration, "node already registered");
  registration_ = receipt;
  append_tx(receipt.params_digest, "register");
}

bool ChainNode::registered() const {
  std::lock_guard lock(mu_);
  return registration_.has_value();
}

void ChainNode::append_tx(const Digest& digest, std::string_view kind) {
  std::uint64_t height = tx_log_.empty() ? 1 : tx_log_.back().height + 1;
  tx_log_.push_back(TxRecord{height, digest, std::string(kind)});
}

StoreReceipt ChainNode::store_ciphertext(const scheme::SanitizedCiphertext& ct,
                                         std::optional<ByteView> payload) {
  auto wire = scheme::encode_wire(ct);
  std::lock_guard lock(mu_);
  if (!registration_) throw Error(Errc::unregistered_chain, "node is not registered with the relay");

  StoreReceipt receipt;
  receipt.add1 = store_.put(wire);
  receipt.data1 = receipt.add1;
  if (payload) receipt.payload = store_.put(*payload);

  auto [it, inserted] = index_.try_emplace(receipt.data1, IndexEntry{receipt.add1, receipt.payload});
  if (!inserted && it->second.payload != receipt.payload) {
    throw Error(Errc::internal_consistency, "ciphertext already indexed with a different payload");
  }
  append_tx(receipt.data1, "store");
  audit_.append(audit_kind::store, chain_party(tag_), clock_(), outcome::ok, receipt.data1);
  return receipt;
}

FetchResult ChainNode::contract_fetch(const CiphertextId& data1, std::string_view requester,
                                      std::int64_t timestamp_ms) {
  std::lock_guard lock(mu_);
  FetchResult result;
  auto refuse = [&](Refusal r) {
    result.refusal = r;
    audit_.append(audit_kind::contract, requester, timestamp_ms, outcome::refused, data1);
    return result;
  };

  auto counted = access_counts_.find(std::string(requester));
  std::size_t access_count = counted == access_counts_.end() ? 0 : counted->second;
  if (access_count >= max_access_count_) return refuse(Refusal::access_limit);

  auto it = index_.find(data1);
  if (it == index_.end()) return refuse(Refusal::target_missing);

  auto wire = store_.get(it->second.ciphertext);
  if (!wire) throw Error(Errc::internal_consistency, "indexed ciphertext missing from the store");
  FetchGrant grant;
  grant.ciphertext = scheme::decode_sanitized_ciphertext(group_, *wire);
  grant.address = it->second.ciphertext;
  if (it->second.payload) {
    grant.payload = store_.get(*it->second.payload);
    if (!grant.payload) throw Error(Errc::internal_consistency, "indexed payload missing from the store");
  }

  access_list_.push_back(AccessRecord{std::string(requester), timestamp_ms, data1});
  ++access_counts_[std::string(requester)];
  append_tx(access_digest(requester, timestamp_ms, data1), "access");
  audit_.append(audit_kind::contract, requester, timestamp_ms, outcome::ok, data1);
  result.grant = std::move(grant);
  return result;
}

std::optional<IndexEntry> ChainNode::lookup(const CiphertextId& data1) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(data1);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ChainNode::access_count(std::string_view requester) const {
  std::lock_guard lock(mu_);
  auto it = access_counts_.find(std::string(requester));
  return it == access_counts_.end() ? 0 : it->second;
}

std::vector<AccessRecord> ChainNode::access_list() const {
  std::lock_guard lock(mu_);
  return access_list_;
}

std::vector<TxRecord> ChainNode::tx_log() const {
  std::lock_guard lock(mu_);
  return tx_log_;
}

void ChainNode::save_state(const std::filesystem::path& path) const {
  std::lock_guard lock(mu_);
  nlohmann::ordered_json j;
  j["chain"] = scheme::to_string(tag_);
  if (registration_) {
    j["registration"] = {{"params_digest", to_hex(registration_->params_digest)},
                         {"seq", registration_->seq},
                         {"timestamp_ms", registration_->timestamp_ms}};
  }
  auto& tx = j["tx_log"] = nlohmann::ordered_json::array();
  for (const auto& t : tx_log_) {
    tx.push_back({{"height", t.height}, {"digest", to_hex(t.digest)}, {"kind", t.kind}});
  }
  auto& index = j["index"] = nlohmann::ordered_json::array();
  for (const auto& [id, entry] : index_) {
    nlohmann::ordered_json e{{"data1", to_hex(id)}, {"add1", to_hex(entry.ciphertext)}};
    if (entry.payload) e["payload"] = to_hex(*entry.payload);
    index.push_back(std::move(e));
  }
  auto& access = j["access_list"] = nlohmann::ordered_json::array();
  for (const auto& a : access_list_) {
    access.push_back({{"requester", a.requester}, {"timestamp_ms", a.timestamp_ms}, {"data1", to_hex(a.id)}});
  }
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
}

void ChainNode::load_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_encoding, std::string("bad node state: ") + e.what());
  }

  std::lock_guard lock(mu_);
  if (j.at("chain").get<std::string>() != scheme::to_string(tag_)) {
    throw Error(Errc::wrong_chain, "state file belongs to another chain");
  }
  try {
    registration_.reset();
    if (j.contains("registration")) {
      const auto& r = j["registration"];
      registration_ = RegistrationReceipt{tag_, digest_from_hex(r.at("params_digest").get<std::string>()),
                                          r.at("seq").get<std::uint64_t>(),
                                          r.at("timestamp_ms").get<std::int64_t>()};
    }
    tx_log_.clear();
    for (const auto& t : j.at("tx_log")) {
      tx_log_.push_back(TxRecord{t.at("height").get<std::uint64_t>(),
                                 digest_from_hex(t.at("digest").get<std::string>()),
                                 t.at("kind").get<std::string>()});
    }
    index_.clear();
    for (const auto& e : j.at("index")) {
      IndexEntry entry{digest_from_hex(e.at("add1").get<std::string>()), std::nullopt};
      if (e.contains("payload")) entry.payload = digest_from_hex(e["payload"].get<std::string>());
      index_.emplace(digest_from_hex(e.at("data1").get<std::string>()), entry);
    }
    access_list_.clear();
    access_counts_.clear();
    for (const auto& a : j.at("access_list")) {
      AccessRecord rec{a.at("requester").get<std::string>(), a.at("timestamp_ms").get<std::int64_t>(),
                       digest_from_hex(a.at("data1").get<std::string>())};
      ++access_counts_[rec.requester];
      access_list_.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_encoding, std::string("bad node state: ") + e.what());
  }
}

}  // namespace medexchain::ledger
