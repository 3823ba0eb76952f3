#pragma once

// Envelopes M1..M8 with freshness checking, and the four actor state
// machines of the sharing workflow.
//
//   M1  DU -> DO         sealed access request (session key under pk_DO)
//   M2  DO -> HospitalA  permission: Data_1 and RK (sanitized in transit)
//   M3  HospitalA -> Relay  C_DO' and RK'
//   M4  Relay -> HospitalA  Data_2
//   M5  HospitalA -> DO  Data_2
//   M6  DO -> DU         Data_2
//   M7  DU -> Relay      fetch request for Data_2
//   M8  Relay -> DU      C_DU

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "medexchain/crf.hpp"
#include "medexchain/ledger.hpp"
#include "medexchain/scheme.hpp"

namespace medexchain::protocol {

using ledger::Clock;

enum class MessageKind : std::uint8_t { M1 = 1, M2, M3, M4, M5, M6, M7, M8 };
enum class ActorRole : std::uint8_t { DO = 1, DU, HospitalA, Relay };

const char* to_string(MessageKind kind) noexcept;
const char* to_string(ActorRole role) noexcept;
/// request_1 .. request_4 / respond_1 .. respond_4
std::string_view role_tag(MessageKind kind) noexcept;

using ActorId = std::array<std::uint8_t, 8>;
using Nonce = std::array<std::uint8_t, 16>;

ActorId make_actor_id(ActorRole role, std::string_view name);

// ---- field schema ----

enum class FieldTag : std::uint8_t {
  label,
  sealed_key,
  sealed_body,
  pk_do,
  pk_du,
  du_identity,
  data1,
  data2,
  rekey,
  sanitized_ciphertext,
  reciphertext,
  dem_payload,
  token_t1,
  token_t2,
  timestamp,
  nonce,
};

enum class FieldClass : std::uint8_t {
  label,
  public_key,
  identity,
  identifier,
  ciphertext,
  rekey,
  sealed,
  token,
  freshness,
  // Never allowed in a schema.
  secret_key,
  master_secret,
  randomness,
  rekey_secret,
};

struct FieldSpec {
  FieldTag tag;
  FieldClass cls;
  std::string_view name;
};

constexpr bool is_secret(FieldClass c) {
  return c == FieldClass::secret_key || c == FieldClass::master_secret ||
         c == FieldClass::randomness || c == FieldClass::rekey_secret;
}

std::span<const FieldSpec> schema(MessageKind kind);
/// Inner layout of M1's sealed body.
std::span<const FieldSpec> sealed_request_schema();
/// True when no schema, including the sealed M1 body, admits a secret field.
bool schemas_are_public();

// ---- envelope ----

struct Envelope {
  MessageKind kind = MessageKind::M1;
  ActorId sender{};
  ActorId recipient{};
  std::int64_t timestamp_ms = 0;
  Nonce nonce{};
  std::vector<Bytes> fields;
};

/// kind(1) || sender(8) || recipient(8) || T(8, BE ms) || N(16) || u32-prefixed fields
Bytes encode_envelope(const Envelope& env);
/// Errc::malformed_encoding on bad framing, unknown kind or wrong field count.
Envelope decode_envelope(ByteView wire);

/// u32-length-prefixed field list, as used in envelopes and the sealed M1 body.
Bytes pack_fields(const std::vector<Bytes>& fields);
std::vector<Bytes> unpack_fields(ByteView data, std::size_t count);

/// Field encoders. Secret key material has no encoder.
template <class T>
concept PublicField = !scheme::is_secret_material_v<std::remove_cvref_t<T>>;

Bytes field(std::string_view s);
Bytes field(const Digest& d);
Bytes field(const scheme::G1& x);
Bytes field(const scheme::UserPublicKey& pk);
Bytes field(const scheme::OriginalCiphertext& ct);
Bytes field(const scheme::SanitizedCiphertext& ct);
Bytes field(const scheme::ReKey& rk);
Bytes field(const scheme::SanitizedReKey& rk);
Bytes field(const scheme::ReCiphertext& ct);
template <PublicField T>
Bytes encode_field(const T& value) {
  return field(value);
}

// ---- freshness ----

enum class Rejection {
  stale_timestamp,
  replayed_nonce,
  malformed_fields,
  wrong_state,
  identity_verification,
  unknown_identifier,
  misrouted,
};
const char* to_string(Rejection r) noexcept;

inline constexpr std::int64_t kDefaultMaxSkewMs = 300'000;

class FreshnessPolicy {
 public:
  explicit FreshnessPolicy(std::int64_t max_skew_ms = kDefaultMaxSkewMs,
                           Clock clock = ledger::system_clock_ms);

  std::int64_t max_skew_ms() const { return max_skew_ms_; }
  /// Read-only check of timestamp skew and nonce reuse.
  std::optional<Rejection> check(MessageKind kind, std::int64_t timestamp_ms, const Nonce& nonce) const;
  /// Check and record atomically. Each (kind, nonce) is accepted at most once
  /// while it is cached; entries expire after twice the skew window.
  std::optional<Rejection> accept(MessageKind kind, std::int64_t timestamp_ms, const Nonce& nonce);
  std::size_t cached() const;

 private:
  using Key = std::array<std::uint8_t, 17>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  static Key key_of(MessageKind kind, const Nonce& nonce);
  std::optional<Rejection> check_locked(const Key& key, std::int64_t timestamp_ms, std::int64_t now) const;
  void expire_locked(std::int64_t now);

  std::int64_t max_skew_ms_;
  Clock clock_;
  mutable std::mutex mu_;
  std::unordered_set<Key, KeyHash> seen_;
  std::deque<std::pair<std::int64_t, Key>> expiry_;
};

/// One nonce cache per actor identity, shared by every session of that actor.
class FreshnessRegistry {
 public:
  explicit FreshnessRegistry(std::int64_t max_skew_ms = kDefaultMaxSkewMs,
                             Clock clock = ledger::system_clock_ms);
  std::shared_ptr<FreshnessPolicy> policy_for(const ActorId& id);

 private:
  std::int64_t max_skew_ms_;
  Clock clock_;
  std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<FreshnessPolicy>> policies_;
};

// ---- transport ----

struct TransportConfig {
  std::int64_t latency_ms = 0;
  double drop_probability = 0.0;
  std::uint64_t seed = 0x6d656478;
};

class Transport {
 public:
  explicit Transport(TransportConfig config = {});

  const TransportConfig& config() const { return config_; }
  /// Blocks for the configured latency, then hands the bytes back for
  /// delivery; nullopt means the message was dropped.
  std::optional<Bytes> send(Bytes wire);
  std::uint64_t delivered() const;
  std::uint64_t dropped() const;

 private:
  TransportConfig config_;
  mutable std::mutex mu_;
  std::mt19937_64 drop_rng_;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
};

// ---- actors ----

struct Step {
  std::optional<Bytes> reply;
  std::optional<Rejection> rejection;
  std::optional<ledger::Refusal> refusal;
  std::string detail;

  bool accepted() const { return !rejection && !refusal; }
};

struct ActorContext {
  std::shared_ptr<FreshnessPolicy> freshness;
  Clock clock = ledger::system_clock_ms;
  RandomSource* rng = &SystemRandom::instance();
};

class Actor {
 public:
  Actor(ActorRole role, std::string name, ActorContext ctx);
  virtual ~Actor() = default;
  Actor(const Actor&) = delete;
  Actor& operator=(const Actor&) = delete;

  ActorRole role() const { return role_; }
  const std::string& name() const { return name_; }
  const ActorId& id() const { return id_; }

  /// Processes one envelope: decode, routing, freshness, state, then the
  /// role-specific handler. Rejected envelopes leave the state untouched.
  Step receive(ByteView wire);

  std::string state_name() const;
  std::vector<MessageKind> consumed() const;

 protected:
  virtual bool expects(MessageKind kind) const = 0;
  virtual Step handle(const Envelope& env) = 0;
  virtual std::string state_name_locked() const = 0;

  /// Envelope addressed to `to` with a fresh timestamp and nonce.
  Envelope stamp(MessageKind kind, const ActorId& to) const;
  Bytes emit(MessageKind kind, const ActorId& to, std::vector<Bytes> fields) const;
  std::int64_t now() const { return ctx_.clock(); }
  RandomSource& rng() const { return *ctx_.rng; }

  mutable std::mutex mu_;

 private:
  ActorRole role_;
  std::string name_;
  ActorId id_;
  ActorContext ctx_;
  std::vector<MessageKind> consumed_;
};

struct Peers {
  ActorId data_owner{};
  ActorId data_user{};
  ActorId hospital_a{};
  ActorId relay{};
};

class DataUserActor final : public Actor {
 public:
  enum class State { idle, awaiting_m6, awaiting_m8, done };

  DataUserActor(scheme::UserKeys keys, scheme::ChainParams chain_a, scheme::G1 pk_do, Peers peers,
                ActorContext ctx);

  /// Emits M1 for `data1`.
  Bytes request(const Digest& data1);
  /// Emits M7 directly, for fetching a Data_2 learned earlier.
  Bytes request_fetch(const Digest& data2);
  /// When false, M6 completes the session and no M7 is sent.
  void set_fetch_after_share(bool fetch);

  State state() const;
  std::optional<Digest> data2() const;
  std::optional<scheme::ReCiphertext> reciphertext() const;
  std::optional<Bytes> dem_payload() const;
  std::optional<scheme::PlainMessage> plaintext() const;

 protected:
  bool expects(MessageKind kind) const override;
  Step handle(const Envelope& env) override;
  std::string state_name_locked() const override;

 private:
  Bytes make_m7_locked(const Digest& data2);

  scheme::UserKeys keys_;
  scheme::ChainParams chain_a_;
  scheme::G1 pk_do_;
  Peers peers_;
  bool fetch_after_share_ = true;
  State state_ = State::idle;
  std::optional<Digest> data2_;
  std::optional<scheme::ReCiphertext> reciphertext_;
  std::optional<Bytes> dem_payload_;
  std::optional<scheme::PlainMessage> plaintext_;
};

class DataOwnerActor final : public Actor {
 public:
  enum class State { awaiting_request, awaiting_m5, done };

  DataOwnerActor(scheme::OwnerKeys keys, scheme::ChainParams chain_a, Peers peers, ActorContext ctx);
  State state() const;

 protected:
  bool expects(MessageKind kind) const override;
  Step handle(const Envelope& env) override;
  std::string state_name_locked() const override;

 private:
  Step handle_m1(const Envelope& env);

  scheme::OwnerKeys keys_;
  scheme::ChainParams chain_a_;
  Peers peers_;
  State state_ = State::awaiting_request;
  std::optional<ActorId> requester_;
};

class HospitalActor final : public Actor {
 public:
  enum class State { awaiting_m2, awaiting_m4, done, refused };

  HospitalActor(ledger::ChainNode& node, ledger::Relay& relay, scheme::GroupPtr grp, Peers peers,
                ActorContext ctx);
  State state() const;

 protected:
  bool expects(MessageKind kind) const override;
  Step handle(const Envelope& env) override;
  std::string state_name_locked() const override;

 private:
  ledger::ChainNode& node_;
  ledger::Relay& relay_;
  scheme::GroupPtr group_;
  Peers peers_;
  State state_ = State::awaiting_m2;
};

class RelayActor final : public Actor {
 public:
  enum class State { awaiting_m3, awaiting_m7, done };

  RelayActor(ledger::Relay& relay, scheme::GroupPtr grp, Peers peers, ActorContext ctx,
             State initial = State::awaiting_m3);
  State state() const;

 protected:
  bool expects(MessageKind kind) const override;
  Step handle(const Envelope& env) override;
  std::string state_name_locked() const override;

 private:
  ledger::Relay& relay_;
  scheme::GroupPtr group_;
  Peers peers_;
  State state_;
};

/// The guard on the DO -> Hospital_A link: rewrites the raw RK in M2 into the
/// sanitized form, keeping the envelope header. Anything else passes through.
Bytes crf_filter_m2(const crf::CrfA& guard, const scheme::GroupPtr& grp, ByteView wire);

}  // namespace medexchain::protocol
