#pragma once

// In-process stand-ins for the chains and the content-addressed PHR store.
//
// Each ChainNode and the Relay guard their state with one mutex, so every
// operation on a given node is atomic with respect to the others. Logs are
// append-only; index entries never change once written.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "medexchain/scheme.hpp"

namespace medexchain::ledger {

using Address = Digest;
using CiphertextId = Digest;

/// Milliseconds since the Unix epoch.
using Clock = std::function<std::int64_t()>;
std::int64_t system_clock_ms();

// ---- content store ----

class ContentStore {
 public:
  ContentStore() = default;
  /// Backs the store with one file per blob, named by the hex digest.
  explicit ContentStore(std::filesystem::path dir);

  Address put(ByteView data);
  std::optional<Bytes> get(const Address& address) const;
  bool contains(const Address& address) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<Address, Bytes, DigestHash> blobs_;
  std::optional<std::filesystem::path> dir_;
};

// ---- audit ----

struct AuditEntry {
  std::uint64_t seq = 0;
  std::string kind;
  std::string party;
  std::int64_t timestamp_ms = 0;
  std::string outcome;
  Digest id{};
};

struct AuditFilter {
  std::optional<std::string> kind;
  std::optional<std::string> party;
  std::optional<std::string> outcome;
  std::optional<Digest> id;

  bool matches(const AuditEntry& e) const;
};

namespace outcome {
inline constexpr std::string_view ok = "ok";
inline constexpr std::string_view refused = "refused";
}  // namespace outcome

class AuditLog {
 public:
  std::uint64_t append(std::string_view kind, std::string_view party, std::int64_t timestamp_ms,
                       std::string_view outcome, const Digest& id);
  std::vector<AuditEntry> query(const AuditFilter& filter = {}) const;
  std::size_t size() const;

  /// One JSON object per line: {seq, kind, party, timestamp_ms, outcome, id_hex}.
  void write_jsonl(std::ostream& out) const;
  /// Appends entries read from `in`, keeping their sequence numbers.
  void load_jsonl(std::istream& in);

 private:
  mutable std::mutex mu_;
  std::vector<AuditEntry> entries_;
};

// ---- hospital chain node ----

inline constexpr std::string_view kAccessLimitReached = "Access limit reached!";
inline constexpr std::string_view kTargetMissing = "Target data doesn’t exist";
inline constexpr std::size_t kDefaultMaxAccessCount = 100;

enum class Refusal { access_limit, target_missing };
std::string_view message(Refusal r) noexcept;

struct RegistrationReceipt {
  scheme::ChainTag tag;
  Digest params_digest{};
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
};

struct TxRecord {
  std::uint64_t height = 0;
  Digest digest{};
  std::string kind;
};

struct AccessRecord {
  std::string requester;
  std::int64_t timestamp_ms = 0;
  CiphertextId id{};
};

struct IndexEntry {
  Address ciphertext{};
  std::optional<Address> payload;
};

struct StoreReceipt {
  CiphertextId data1{};
  Address add1{};
  std::optional<Address> payload;
};

struct FetchGrant {
  scheme::SanitizedCiphertext ciphertext;
  Address address{};
  std::optional<Bytes> payload;
};

struct FetchResult {
  std::optional<FetchGrant> grant;
  std::optional<Refusal> refusal;

  bool ok() const { return grant.has_value(); }
};

class ChainNode {
 public:
  ChainNode(scheme::ChainTag tag, scheme::GroupPtr grp, ContentStore& store,
            std::size_t max_access_count = kDefaultMaxAccessCount, Clock clock = system_clock_ms);

  scheme::ChainTag tag() const { return tag_; }
  std::size_t max_access_count() const { return max_access_count_; }

  void record_registration(const RegistrationReceipt& receipt);
  bool registered() const;

  /// Data_1 = SHA-256(wire(ct)) = Add_1. The optional DEM payload is stored
  /// as a separate blob and linked from the index entry.
  StoreReceipt store_ciphertext(const scheme::SanitizedCiphertext& ct,
                                std::optional<ByteView> payload = std::nullopt);

  /// The access-control contract: refuse once `requester` has used up its
  /// allowance on this node, refuse unknown ids, otherwise record the access
  /// and hand out the ciphertext.
  FetchResult contract_fetch(const CiphertextId& data1, std::string_view requester,
                             std::int64_t timestamp_ms);

  std::optional<IndexEntry> lookup(const CiphertextId& data1) const;
  std::size_t access_count(std::string_view requester) const;
  std::vector<AccessRecord> access_list() const;
  std::vector<TxRecord> tx_log() const;
  AuditLog& audit() { return audit_; }
  const AuditLog& audit() const { return audit_; }

  /// JSON snapshot of registration, tx log, index and access list.
  void save_state(const std::filesystem::path& path) const;
  void load_state(const std::filesystem::path& path);

 private:
  void append_tx(const Digest& digest, std::string_view kind);

  scheme::ChainTag tag_;
  scheme::GroupPtr group_;
  ContentStore& store_;
  std::size_t max_access_count_;
  Clock clock_;

  mutable std::mutex mu_;
  std::optional<RegistrationReceipt> registration_;
  std::vector<TxRecord> tx_log_;
  std::unordered_map<CiphertextId, IndexEntry, DigestHash> index_;
  std::vector<AccessRecord> access_list_;
  std::unordered_map<std::string, std::size_t> access_counts_;
  AuditLog audit_;
};

// ---- relay chain ----

struct RelayRecord {
  scheme::ReCiphertext ciphertext;
  std::optional<Bytes> payload;
};

namespace audit_kind {
inline constexpr std::string_view register_chain = "register";
inline constexpr std::string_view share = "share";
inline constexpr std::string_view fetch = "fetch";
inline constexpr std::string_view store = "store";
inline constexpr std::string_view contract = "contract";
}  // namespace audit_kind

class Relay {
 public:
  Relay(scheme::GroupPtr grp, ContentStore& store, Clock clock = system_clock_ms);

  RegistrationReceipt register_chain(scheme::ChainTag tag, const Digest& params_digest);
  bool is_registered(scheme::ChainTag tag) const;

  /// Runs reenc, stores C_DU under Data_2 = SHA-256(wire(C_DU)) and logs one
  /// share entry for `requester`.
  Digest reencrypt(scheme::ChainTag requesting_chain, std::string_view requester,
                   const scheme::SanitizedCiphertext& ct, const scheme::SanitizedReKey& rk,
                   std::optional<ByteView> payload = std::nullopt);

  /// Errc::not_found for unknown ids. Does not consume the record.
  RelayRecord fetch(const Digest& data2, std::string_view requester);

  /// Logs a refused share request reported by a hospital chain.
  void record_refusal(std::string_view requester, const Digest& id);

  std::vector<AuditEntry> audit_query(const AuditFilter& filter = {}) const;
  AuditLog& audit() { return audit_; }

  void save_state(const std::filesystem::path& path) const;
  void load_state(const std::filesystem::path& path);

 private:
  scheme::GroupPtr group_;
  ContentStore& store_;
  Clock clock_;

  mutable std::mutex mu_;
  std::set<scheme::ChainTag> registered_;
  std::unordered_map<Digest, std::optional<Address>, DigestHash> records_;
  AuditLog audit_;
};

}  // namespace medexchain::ledger
