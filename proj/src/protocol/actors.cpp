#include "medexchain/codec.hpp"
#include "medexchain/protocol.hpp"

namespace medexchain::protocol {

namespace {

Step reject(Rejection r, std::string detail) {
  Step s;
  s.rejection = r;
  s.detail = std::move(detail);
  return s;
}

Rejection rejection_for(Errc code) {
  switch (code) {
    case Errc::identity_verification: return Rejection::identity_verification;
    case Errc::not_found:
    case Errc::unknown_ciphertext: return Rejection::unknown_identifier;
    default: return Rejection::malformed_fields;
  }
}

Digest digest_field(const Bytes& f) {
  if (f.size() != std::tuple_size_v<Digest>) throw Error(Errc::malformed_encoding, "identifier must be 32 bytes");
  Digest d;
  std::copy(f.begin(), f.end(), d.begin());
  return d;
}

std::string string_field(const Bytes& f) {
  if (f.empty()) throw Error(Errc::invalid_identity, "identity must be non-empty");
  return std::string(f.begin(), f.end());
}

Bytes u64_field(std::int64_t v) {
  Bytes out;
  append_u64_be(out, static_cast<std::uint64_t>(v));
  return out;
}

std::optional<ByteView> optional_payload(const Bytes& f) {
  if (f.empty()) return std::nullopt;
  return ByteView(f);
}

}  // namespace

// ---- base ----

Actor::Actor(ActorRole role, std::string name, ActorContext ctx)
    : role_(role), name_(std::move(name)), id_(make_actor_id(role, name_)), ctx_(std::move(ctx)) {
  if (!ctx_.freshness) ctx_.freshness = std::make_shared<FreshnessPolicy>(kDefaultMaxSkewMs, ctx_.clock);
  if (!ctx_.rng) ctx_.rng = &SystemRandom::instance();
}

Envelope Actor::stamp(MessageKind kind, const ActorId& to) const {
  Envelope env;
  env.kind = kind;
  env.sender = id_;
  env.recipient = to;
  env.timestamp_ms = ctx_.clock();
  ctx_.rng->fill(env.nonce);
  return env;
}

Bytes Actor::emit(MessageKind kind, const ActorId& to, std::vector<Bytes> fields) const {
  auto env = stamp(kind, to);
  env.fields = std::move(fields);
  return encode_envelope(env);
}

Step Actor::receive(ByteView wire) {
  Envelope env;
  try {
    env = decode_envelope(wire);
  } catch (const Error& e) {
    return reject(Rejection::malformed_fields, e.what());
  }
  if (env.recipient != id_) return reject(Rejection::misrouted, "envelope addressed to another actor");
  if (auto r = ctx_.freshness->check(env.kind, env.timestamp_ms, env.nonce)) {
    return reject(*r, to_string(env.kind));
  }

  std::lock_guard lock(mu_);
  if (!expects(env.kind)) {
    return reject(Rejection::wrong_state,
                  std::string(to_string(env.kind)) + " not expected in state " + state_name_locked());
  }
  if (env.kind != MessageKind::M1 && env.fields.front() != to_bytes(role_tag(env.kind))) {
    return reject(Rejection::malformed_fields, "role tag does not match the message kind");
  }
  if (auto r = ctx_.freshness->accept(env.kind, env.timestamp_ms, env.nonce)) {
    return reject(*r, to_string(env.kind));
  }

  Step s;
  try {
    s = handle(env);
  } catch (const Error& e) {
    return reject(rejection_for(e.code()), e.what());
  }
  if (!s.rejection) consumed_.push_back(env.kind);
  return s;
}

std::string Actor::state_name() const {
  std::lock_guard lock(mu_);
  return state_name_locked();
}

std::vector<MessageKind> Actor::consumed() const {
  std::lock_guard lock(mu_);
  return consumed_;
}

// ---- data user ----

DataUserActor::DataUserActor(scheme::UserKeys keys, scheme::ChainParams chain_a, scheme::G1 pk_do,
                             Peers peers, ActorContext ctx)
    : Actor(ActorRole::DU, std::string(keys.identity.begin(), keys.identity.end()), std::move(ctx)),
      keys_(std::move(keys)),
      chain_a_(std::move(chain_a)),
      pk_do_(std::move(pk_do)),
      peers_(peers) {}

Bytes DataUserActor::request(const Digest& data1) {
  std::lock_guard lock(mu_);
  if (state_ != State::idle) throw Error(Errc::internal_consistency, "data user already has a request in flight");
  const auto& grp = *chain_a_.group;

  // Proof of possession of sk_DU without revealing it: (sk_DU^t, pk1^t).
  auto t = grp.random_nonzero_scalar(rng());
  auto token_t1 = grp.pow(keys_.sk_du, t);
  auto token_t2 = grp.pow(keys_.pk.pk1, t);

  auto env = stamp(MessageKind::M1, peers_.data_owner);
  auto body = pack_fields({field(role_tag(MessageKind::M1)), field(pk_do_), field(keys_.pk),
                           Bytes(keys_.identity), field(data1), field(token_t1), field(token_t2),
                           u64_field(env.timestamp_ms), Bytes(env.nonce.begin(), env.nonce.end())});
  auto session = grp.random_gt(rng());
  env.fields = {field(scheme::sample_enc(session, chain_a_, pk_do_, rng())),
                scheme::hybrid_wrap(body, session, rng())};
  state_ = State::awaiting_m6;
  return encode_envelope(env);
}

Bytes DataUserActor::make_m7_locked(const Digest& data2) {
  state_ = State::awaiting_m8;
  data2_ = data2;
  return emit(MessageKind::M7, peers_.relay,
              {field(role_tag(MessageKind::M7)), field(pk_do_), field(keys_.pk), Bytes(keys_.identity),
               field(data2)});
}

Bytes DataUserActor::request_fetch(const Digest& data2) {
  std::lock_guard lock(mu_);
  if (state_ != State::idle) throw Error(Errc::internal_consistency, "data user already has a request in flight");
  return make_m7_locked(data2);
}

void DataUserActor::set_fetch_after_share(bool fetch) {
  std::lock_guard lock(mu_);
  fetch_after_share_ = fetch;
}

bool DataUserActor::expects(MessageKind kind) const {
  return (state_ == State::awaiting_m6 && kind == MessageKind::M6) ||
         (state_ == State::awaiting_m8 && kind == MessageKind::M8);
}

Step DataUserActor::handle(const Envelope& env) {
  Step s;
  if (env.kind == MessageKind::M6) {
    auto data2 = digest_field(env.fields[1]);
    if (fetch_after_share_) {
      s.reply = make_m7_locked(data2);
    } else {
      data2_ = data2;
      state_ = State::done;
    }
    return s;
  }
  const auto& grp = chain_a_.group;
  auto ct = scheme::decode_reciphertext(grp, env.fields[1]);
  std::optional<Bytes> payload;
  if (!env.fields[2].empty()) payload = env.fields[2];
  auto plain = scheme::dec_message(ct, keys_.sk_du, payload);
  reciphertext_ = std::move(ct);
  dem_payload_ = std::move(payload);
  plaintext_ = std::move(plain);
  state_ = State::done;
  return s;
}

std::string DataUserActor::state_name_locked() const {
  switch (state_) {
    case State::idle: return "idle";
    case State::awaiting_m6: return "awaiting-M6";
    case State::awaiting_m8: return "awaiting-M8";
    case State::done: return "done";
  }
  return "?";
}

DataUserActor::State DataUserActor::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::optional<Digest> DataUserActor::data2() const {
  std::lock_guard lock(mu_);
  return data2_;
}

std::optional<scheme::ReCiphertext> DataUserActor::reciphertext() const {
  std::lock_guard lock(mu_);
  return reciphertext_;
}

std::optional<Bytes> DataUserActor::dem_payload() const {
  std::lock_guard lock(mu_);
  return dem_payload_;
}

std::optional<scheme::PlainMessage> DataUserActor::plaintext() const {
  std::lock_guard lock(mu_);
  return plaintext_;
}

// ---- data owner ----

DataOwnerActor::DataOwnerActor(scheme::OwnerKeys keys, scheme::ChainParams chain_a, Peers peers,
                               ActorContext ctx)
    : Actor(ActorRole::DO, std::string(keys.identity.begin(), keys.identity.end()), std::move(ctx)),
      keys_(std::move(keys)),
      chain_a_(std::move(chain_a)),
      peers_(peers) {}

bool DataOwnerActor::expects(MessageKind kind) const {
  return (state_ == State::awaiting_request && kind == MessageKind::M1) ||
         (state_ == State::awaiting_m5 && kind == MessageKind::M5);
}

Step DataOwnerActor::handle(const Envelope& env) {
  if (env.kind == MessageKind::M1) return handle_m1(env);
  Step s;
  s.reply = emit(MessageKind::M6, requester_.value_or(peers_.data_user),
                 {field(role_tag(MessageKind::M6)), field(digest_field(env.fields[1]))});
  state_ = State::done;
  return s;
}

Step DataOwnerActor::handle_m1(const Envelope& env) {
  const auto& grp = chain_a_.group;
  auto sealed_key = scheme::decode_original_ciphertext(grp, env.fields[0]);
  auto session = scheme::owner_decrypt(sealed_key, keys_.sk_do_sanitized);
  auto body = unpack_fields(scheme::hybrid_unwrap(env.fields[1], session), sealed_request_schema().size());

  if (body[0] != to_bytes(role_tag(MessageKind::M1))) {
    throw Error(Errc::malformed_encoding, "role tag does not match the message kind");
  }
  if (body[7] != u64_field(env.timestamp_ms) || body[8] != Bytes(env.nonce.begin(), env.nonce.end())) {
    throw Error(Errc::malformed_encoding, "sealed T1/N1 differ from the envelope header");
  }
  if (grp->deserialize_g1(body[1]) != keys_.pk_do) {
    throw Error(Errc::malformed_encoding, "request is addressed to another data owner");
  }
  auto pk_du = scheme::decode_user_public_key(grp, body[2]);
  auto du_identity = string_field(body[3]);
  auto data1 = digest_field(body[4]);
  auto token_t1 = grp->deserialize_g1(body[5]);
  auto token_t2 = grp->deserialize_g1(body[6]);

  if (grp->hash_to_g1(as_bytes(du_identity)) != pk_du.pk1) {
    throw Error(Errc::identity_verification, "pk_DU does not belong to " + du_identity);
  }
  if (token_t1.is_identity() || token_t2.is_identity() ||
      grp->pair(grp->generator(), token_t1) != grp->pair(token_t2, pk_du.pk2)) {
    throw Error(Errc::identity_verification, "pk_DU fails the key consistency check");
  }

  auto rk = scheme::sample_rekeygen(keys_.sk_do_sanitized, pk_du, rng());
  Step s;
  s.reply = emit(MessageKind::M2, peers_.hospital_a,
                 {field(role_tag(MessageKind::M2)), field(keys_.pk_do), field(pk_du),
                  to_bytes(du_identity), field(data1), field(rk)});
  requester_ = env.sender;
  state_ = State::awaiting_m5;
  return s;
}

std::string DataOwnerActor::state_name_locked() const {
  switch (state_) {
    case State::awaiting_request: return "awaiting-request";
    case State::awaiting_m5: return "awaiting-M5";
    case State::done: return "done";
  }
  return "?";
}

DataOwnerActor::State DataOwnerActor::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

// ---- hospital A ----

HospitalActor::HospitalActor(ledger::ChainNode& node, ledger::Relay& relay, scheme::GroupPtr grp,
                             Peers peers, ActorContext ctx)
    : Actor(ActorRole::HospitalA, "hospital-a", std::move(ctx)),
      node_(node),
      relay_(relay),
      group_(std::move(grp)),
      peers_(peers) {}

bool HospitalActor::expects(MessageKind kind) const {
  return (state_ == State::awaiting_m2 && kind == MessageKind::M2) ||
         (state_ == State::awaiting_m4 && kind == MessageKind::M4);
}

Step HospitalActor::handle(const Envelope& env) {
  Step s;
  if (env.kind == MessageKind::M4) {
    s.reply = emit(MessageKind::M5, peers_.data_owner,
                   {field(role_tag(MessageKind::M5)), field(digest_field(env.fields[1]))});
    state_ = State::done;
    return s;
  }

  auto pk_do = group_->deserialize_g1(env.fields[1]);
  auto pk_du = scheme::decode_user_public_key(group_, env.fields[2]);
  auto du_identity = string_field(env.fields[3]);
  auto data1 = digest_field(env.fields[4]);
  const auto& rk_wire = env.fields[5];
  auto rk_kind = scheme::peek_kind(rk_wire);
  if (rk_kind != scheme::ObjectKind::rekey && rk_kind != scheme::ObjectKind::sanitized_rekey) {
    throw Error(Errc::malformed_encoding, "M2 does not carry a re-encryption key");
  }

  auto fetched = node_.contract_fetch(data1, du_identity, env.timestamp_ms);
  if (!fetched.ok()) {
    relay_.record_refusal(du_identity, data1);
    s.refusal = fetched.refusal;
    s.detail = std::string(ledger::message(*fetched.refusal));
    state_ = State::refused;
    return s;
  }
  if (rk_kind != scheme::ObjectKind::sanitized_rekey) {
    throw Error(Errc::malformed_encoding, "re-encryption key did not pass the reverse firewall");
  }
  auto rkp = scheme::decode_sanitized_rekey(group_, rk_wire);

  s.reply = emit(MessageKind::M3, peers_.relay,
                 {field(role_tag(MessageKind::M3)), field(pk_do), field(pk_du), to_bytes(du_identity),
                  field(fetched.grant->ciphertext), field(rkp), fetched.grant->payload.value_or(Bytes{})});
  state_ = State::awaiting_m4;
  return s;
}

std::string HospitalActor::state_name_locked() const {
  switch (state_) {
    case State::awaiting_m2: return "awaiting-M2";
    case State::awaiting_m4: return "awaiting-M4";
    case State::done: return "done";
    case State::refused: return "refused";
  }
  return "?";
}

HospitalActor::State HospitalActor::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

// ---- relay ----

RelayActor::RelayActor(ledger::Relay& relay, scheme::GroupPtr grp, Peers peers, ActorContext ctx,
                       State initial)
    : Actor(ActorRole::Relay, "relay", std::move(ctx)),
      relay_(relay),
      group_(std::move(grp)),
      peers_(peers),
      state_(initial) {}

bool RelayActor::expects(MessageKind kind) const {
  return (state_ == State::awaiting_m3 && kind == MessageKind::M3) ||
         (state_ == State::awaiting_m7 && kind == MessageKind::M7);
}

Step RelayActor::handle(const Envelope& env) {
  Step s;
  auto du_identity = string_field(env.fields[3]);
  if (env.kind == MessageKind::M3) {
    auto ct = scheme::decode_sanitized_ciphertext(group_, env.fields[4]);
    auto rkp = scheme::decode_sanitized_rekey(group_, env.fields[5]);
    auto data2 = relay_.reencrypt(scheme::ChainTag::A, du_identity, ct, rkp, optional_payload(env.fields[6]));
    s.reply = emit(MessageKind::M4, env.sender, {field(role_tag(MessageKind::M4)), field(data2)});
    state_ = State::awaiting_m7;
    return s;
  }

  auto record = relay_.fetch(digest_field(env.fields[4]), du_identity);
  s.reply = emit(MessageKind::M8, env.sender,
                 {field(role_tag(MessageKind::M8)), field(record.ciphertext), record.payload.value_or(Bytes{})});
  state_ = State::done;
  return s;
}

std::string RelayActor::state_name_locked() const {
  switch (state_) {
    case State::awaiting_m3: return "awaiting-M3";
    case State::awaiting_m7: return "awaiting-M7";
    case State::done: return "done";
  }
  return "?";
}

RelayActor::State RelayActor::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

// ---- in-transit guard ----

Bytes crf_filter_m2(const crf::CrfA& guard, const scheme::GroupPtr& grp, ByteView wire) {
  auto env = decode_envelope(wire);
  if (env.kind != MessageKind::M2) return Bytes(wire.begin(), wire.end());
  auto& rk_field = env.fields[5];
  if (scheme::peek_kind(rk_field) != scheme::ObjectKind::rekey) return Bytes(wire.begin(), wire.end());

  auto data1 = digest_field(env.fields[4]);
  if (!guard.beta_for(data1)) return Bytes(wire.begin(), wire.end());
  auto pk_do = grp->deserialize_g1(env.fields[1]);
  auto pk_du = scheme::decode_user_public_key(grp, env.fields[2]);
  auto rk = scheme::decode_rekey(grp, rk_field);
  rk_field = field(guard.sanitize_rekey(rk, data1, pk_do, pk_du));
  return encode_envelope(env);
}

}  // namespace medexchain::protocol
