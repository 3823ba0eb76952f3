#pragma once

// A complete simulated deployment of both hospital chains and the relay, with
// a driver that runs the M1..M8 exchange between fresh actor sessions.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "medexchain/crf.hpp"
#include "medexchain/ledger.hpp"
#include "medexchain/protocol.hpp"

namespace medexchain::protocol {

enum class OutcomeKind { success, refusal, freshness_reject, timeout };
const char* to_string(OutcomeKind kind) noexcept;

struct Outcome {
  OutcomeKind kind = OutcomeKind::success;
  std::string reason;
  std::optional<MessageKind> failed_at;
  std::vector<MessageKind> verified;
  std::optional<Digest> data2;
  std::optional<scheme::ReCiphertext> reciphertext;
  std::optional<Bytes> dem_payload;
  std::optional<scheme::PlainMessage> plaintext;
  std::chrono::nanoseconds elapsed{0};

  bool ok() const { return kind == OutcomeKind::success; }
};

struct WorldConfig {
  group::GroupProfile profile = group::GroupProfile::transparent_80();
  std::size_t max_access_count = ledger::kDefaultMaxAccessCount;
  std::int64_t freshness_window_ms = kDefaultMaxSkewMs;
  TransportConfig transport;
  /// Directory-backed content stores and CRF journal when set.
  std::optional<std::filesystem::path> data_dir;
  /// Register both chains with the relay on construction. Turn off when the
  /// relay and node state is restored from disk afterwards.
  bool register_chains = true;
  Clock clock = ledger::system_clock_ms;
};

struct WorldSecrets {
  scheme::MasterSecrets chain_a;
  scheme::MasterSecrets chain_b;

  static WorldSecrets generate(const group::Group& grp, RandomSource& rng);
};

struct Upload {
  Digest data1{};
  scheme::GT message;
  std::optional<Bytes> dem_payload;
};

class World {
 public:
  World(WorldConfig config, WorldSecrets secrets, RandomSource& rng = SystemRandom::instance());
  explicit World(WorldConfig config, RandomSource& rng = SystemRandom::instance());

  const WorldConfig& config() const { return config_; }
  const scheme::GroupPtr& group() const { return group_; }
  const WorldSecrets& secrets() const { return secrets_; }
  const scheme::ChainParams& chain_a() const { return chain_a_; }
  const scheme::ChainParams& chain_b() const { return chain_b_; }
  crf::CrfA& crf_a() { return *crf_a_; }
  crf::CrfB& crf_b() { return *crf_b_; }
  ledger::ChainNode& node_a() { return *node_a_; }
  ledger::ChainNode& node_b() { return *node_b_; }
  ledger::Relay& relay() { return *relay_; }
  Transport& transport() { return transport_; }
  FreshnessRegistry& freshness() { return freshness_; }
  RandomSource& rng() { return rng_; }

  /// Hospital A issues sk_DO, CRF_A sanitizes it.
  scheme::OwnerKeys provision_owner(std::string_view id);
  /// Hospital B issues D_DU, CRF_B sanitizes it, the user finishes with r.
  scheme::UserKeys provision_user(std::string_view id);
  void add_owner(scheme::OwnerKeys keys);
  void add_user(scheme::UserKeys keys);
  scheme::OwnerKeys owner(std::string_view id) const;
  scheme::UserKeys user(std::string_view id) const;

  /// Encrypts a fresh M for `owner_id`, wraps `phr` under it, sanitizes
  /// through CRF_A and stores the result on chain A.
  Upload upload(std::string_view owner_id, ByteView phr);
  Upload upload_message(std::string_view owner_id, const scheme::GT& m,
                        std::optional<ByteView> phr = std::nullopt);

  /// M1..M8: share, then fetch and decrypt.
  Outcome orchestrate_share(std::string_view owner_id, std::string_view user_id, const Digest& data1);
  /// M1..M6: ends with Data_2 known to the user.
  Outcome share(std::string_view owner_id, std::string_view user_id, const Digest& data1);
  /// M7..M8: fetch C_DU for `data2` and decrypt it.
  Outcome fetch(std::string_view owner_id, std::string_view user_id, const Digest& data2);

  /// Runs an exchange starting at `first` between caller-built actors.
  Outcome drive(const std::vector<Actor*>& actors, Bytes first);

  Peers peers(std::string_view owner_id, std::string_view user_id) const;
  ActorContext context_for(ActorRole role, std::string_view name);

 private:
  WorldConfig config_;
  RandomSource& rng_;
  scheme::GroupPtr group_;
  WorldSecrets secrets_;
  scheme::ChainParams chain_a_;
  scheme::ChainParams chain_b_;
  std::unique_ptr<ledger::ContentStore> store_a_;
  std::unique_ptr<ledger::ContentStore> store_b_;
  std::unique_ptr<ledger::ContentStore> store_relay_;
  std::unique_ptr<crf::CrfA> crf_a_;
  std::unique_ptr<crf::CrfB> crf_b_;
  std::unique_ptr<ledger::ChainNode> node_a_;
  std::unique_ptr<ledger::ChainNode> node_b_;
  std::unique_ptr<ledger::Relay> relay_;
  Transport transport_;
  FreshnessRegistry freshness_;

  mutable std::shared_mutex registry_mu_;
  std::unordered_map<std::string, scheme::OwnerKeys> owners_;
  std::unordered_map<std::string, scheme::UserKeys> users_;
};

}  // namespace medexchain::protocol
