#include "medexchain/world.hpp"

#include <algorithm>

#include "medexchain/codec.hpp"
#include "medexchain/digest.hpp"

namespace medexchain::protocol {

const char* to_string(OutcomeKind kind) noexcept {
  switch (kind) {
    case OutcomeKind::success: return "success";
    case OutcomeKind::refusal: return "refusal";
    case OutcomeKind::freshness_reject: return "freshness-reject";
    case OutcomeKind::timeout: return "timeout";
  }
  return "?";
}

WorldSecrets WorldSecrets::generate(const group::Group& grp, RandomSource& rng) {
  WorldSecrets s;
  s.chain_a = {grp.random_nonzero_scalar(rng), grp.random_nonzero_scalar(rng)};
  s.chain_b = {grp.random_nonzero_scalar(rng), grp.random_nonzero_scalar(rng)};
  return s;
}

namespace {

std::unique_ptr<ledger::ContentStore> make_store(const std::optional<std::filesystem::path>& data_dir,
                                                 const char* name) {
  if (!data_dir) return std::make_unique<ledger::ContentStore>();
  return std::make_unique<ledger::ContentStore>(*data_dir / "store" / name);
}

}  // namespace

World::World(WorldConfig config, RandomSource& rng)
    : World(config, WorldSecrets::generate(*group::Group::create(config.profile), rng), rng) {}

World::World(WorldConfig config, WorldSecrets secrets, RandomSource& rng)
    : config_(std::move(config)),
      rng_(rng),
      group_(group::Group::create(config_.profile)),
      secrets_(std::move(secrets)),
      transport_(config_.transport),
      freshness_(config_.freshness_window_ms, config_.clock) {
  // Secrets may have been created against another Group instance of the same
  // profile; rebind them here.
  auto rebind = [&](const scheme::Scalar& s) { return group_->scalar(s.value()); };
  secrets_.chain_a = {rebind(secrets_.chain_a.hospital_master), rebind(secrets_.chain_a.crf_master)};
  secrets_.chain_b = {rebind(secrets_.chain_b.hospital_master), rebind(secrets_.chain_b.crf_master)};

  chain_a_ = scheme::setup_chain(group_, secrets_.chain_a.hospital_master, secrets_.chain_a.crf_master,
                                 scheme::ChainTag::A);
  chain_b_ = scheme::setup_chain(group_, secrets_.chain_b.hospital_master, secrets_.chain_b.crf_master,
                                 scheme::ChainTag::B);

  store_a_ = make_store(config_.data_dir, "chain-a");
  store_b_ = make_store(config_.data_dir, "chain-b");
  store_relay_ = make_store(config_.data_dir, "relay");

  crf_a_ = std::make_unique<crf::CrfA>(chain_a_, secrets_.chain_a.crf_master, rng_);
  crf_b_ = std::make_unique<crf::CrfB>(group_, secrets_.chain_b.crf_master);
  if (config_.data_dir) {
    std::filesystem::create_directories(*config_.data_dir / "ledger");
    crf_a_->attach_journal(*config_.data_dir / "ledger" / "crf-a-betas.txt");
  }

  node_a_ = std::make_unique<ledger::ChainNode>(scheme::ChainTag::A, group_, *store_a_,
                                                config_.max_access_count, config_.clock);
  node_b_ = std::make_unique<ledger::ChainNode>(scheme::ChainTag::B, group_, *store_b_,
                                                config_.max_access_count, config_.clock);
  relay_ = std::make_unique<ledger::Relay>(group_, *store_relay_, config_.clock);
  if (config_.register_chains) {
    node_a_->record_registration(
        relay_->register_chain(scheme::ChainTag::A, sha256(scheme::encode_file(chain_a_))));
    node_b_->record_registration(
        relay_->register_chain(scheme::ChainTag::B, sha256(scheme::encode_file(chain_b_))));
  }
}

// ---- key registry ----

scheme::OwnerKeys World::provision_owner(std::string_view id) {
  auto pair = scheme::keygen_do(*group_, as_bytes(id), secrets_.chain_a.hospital_master);
  scheme::OwnerKeys keys{to_bytes(id), pair.pk_do, pair.sk_do_raw, crf_a_->sanitize_owner_key(pair.sk_do_raw)};
  add_owner(keys);
  return keys;
}

scheme::UserKeys World::provision_user(std::string_view id) {
  auto d = scheme::partial_key(*group_, as_bytes(id), secrets_.chain_b.hospital_master);
  auto d_sanitized = crf_b_->sanitize_partial_key(d);
  auto keys = scheme::finalize_user_keys(*group_, as_bytes(id), d, d_sanitized,
                                         group_->random_nonzero_scalar(rng_), chain_b_.system_public_key);
  add_user(keys);
  return keys;
}

void World::add_owner(scheme::OwnerKeys keys) {
  std::unique_lock lock(registry_mu_);
  owners_.insert_or_assign(std::string(keys.identity.begin(), keys.identity.end()), std::move(keys));
}

void World::add_user(scheme::UserKeys keys) {
  std::unique_lock lock(registry_mu_);
  users_.insert_or_assign(std::string(keys.identity.begin(), keys.identity.end()), std::move(keys));
}

scheme::OwnerKeys World::owner(std::string_view id) const {
  std::shared_lock lock(registry_mu_);
  auto it = owners_.find(std::string(id));
  if (it == owners_.end()) throw Error(Errc::not_found, "unknown data owner " + std::string(id));
  return it->second;
}

scheme::UserKeys World::user(std::string_view id) const {
  std::shared_lock lock(registry_mu_);
  auto it = users_.find(std::string(id));
  if (it == users_.end()) throw Error(Errc::not_found, "unknown data user " + std::string(id));
  return it->second;
}

// ---- data encryption ----

Upload World::upload(std::string_view owner_id, ByteView phr) {
  return upload_message(owner_id, group_->random_gt(rng_), phr);
}

Upload World::upload_message(std::string_view owner_id, const scheme::GT& m, std::optional<ByteView> phr) {
  auto keys = owner(owner_id);
  Upload up;
  up.message = m;
  if (phr) up.dem_payload = scheme::hybrid_wrap(*phr, m, rng_);
  auto ct = scheme::sample_enc(m, chain_a_, keys.pk_do, rng_);
  auto sanitized = crf_a_->sanitize_ciphertext(ct, keys.pk_do);
  std::optional<ByteView> payload;
  if (up.dem_payload) payload = ByteView(*up.dem_payload);
  auto receipt = node_a_->store_ciphertext(sanitized.ciphertext, payload);
  if (receipt.data1 != sanitized.id) throw Error(Errc::internal_consistency, "Data_1 mismatch");
  up.data1 = receipt.data1;
  return up;
}

// ---- orchestration ----

Peers World::peers(std::string_view owner_id, std::string_view user_id) const {
  return Peers{make_actor_id(ActorRole::DO, owner_id), make_actor_id(ActorRole::DU, user_id),
               make_actor_id(ActorRole::HospitalA, "hospital-a"), make_actor_id(ActorRole::Relay, "relay")};
}

ActorContext World::context_for(ActorRole role, std::string_view name) {
  return ActorContext{freshness_.policy_for(make_actor_id(role, name)), config_.clock, &rng_};
}

Outcome World::drive(const std::vector<Actor*>& actors, Bytes first) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  auto fail = [&](OutcomeKind kind, MessageKind at, std::string reason) {
    out.kind = kind;
    out.failed_at = at;
    out.reason = std::move(reason);
  };

  std::optional<Bytes> next = std::move(first);
  while (next) {
    Envelope header;
    try {
      header = decode_envelope(*next);
    } catch (const Error& e) {
      fail(OutcomeKind::refusal, MessageKind::M1, e.what());
      break;
    }
    auto delivered = transport_.send(std::move(*next));
    next.reset();
    if (!delivered) {
      fail(OutcomeKind::timeout, header.kind, std::string(to_string(header.kind)) + " was dropped");
      break;
    }
    if (header.kind == MessageKind::M2) {
      try {
        delivered = crf_filter_m2(*crf_a_, group_, *delivered);
      } catch (const Error& e) {
        fail(OutcomeKind::refusal, header.kind, e.what());
        break;
      }
    }
    auto target = std::find_if(actors.begin(), actors.end(),
                               [&](const Actor* a) { return a->id() == header.recipient; });
    if (target == actors.end()) {
      fail(OutcomeKind::refusal, header.kind, "no actor for the envelope recipient");
      break;
    }

    auto step = (*target)->receive(*delivered);
    if (step.rejection) {
      bool freshness = *step.rejection == Rejection::stale_timestamp ||
                       *step.rejection == Rejection::replayed_nonce;
      fail(freshness ? OutcomeKind::freshness_reject : OutcomeKind::refusal, header.kind,
           std::string(to_string(*step.rejection)) + ": " + step.detail);
      break;
    }
    out.verified.push_back(header.kind);
    if (step.refusal) {
      fail(OutcomeKind::refusal, header.kind, std::string(ledger::message(*step.refusal)));
      break;
    }
    next = std::move(step.reply);
  }
  out.elapsed = std::chrono::steady_clock::now() - start;
  return out;
}

namespace {

void collect(const DataUserActor& du, Outcome& out) {
  out.data2 = du.data2();
  out.reciphertext = du.reciphertext();
  out.dem_payload = du.dem_payload();
  out.plaintext = du.plaintext();
}

}  // namespace

Outcome World::orchestrate_share(std::string_view owner_id, std::string_view user_id, const Digest& data1) {
  auto owner_keys = owner(owner_id);
  auto user_keys = user(user_id);
  auto p = peers(owner_id, user_id);
  DataUserActor du(user_keys, chain_a_, owner_keys.pk_do, p, context_for(ActorRole::DU, user_id));
  DataOwnerActor owner_actor(owner_keys, chain_a_, p, context_for(ActorRole::DO, owner_id));
  HospitalActor hospital(*node_a_, *relay_, group_, p, context_for(ActorRole::HospitalA, "hospital-a"));
  RelayActor relay(*relay_, group_, p, context_for(ActorRole::Relay, "relay"));

  auto out = drive({&du, &owner_actor, &hospital, &relay}, du.request(data1));
  collect(du, out);
  if (out.ok() && du.state() != DataUserActor::State::done) {
    throw Error(Errc::internal_consistency, "exchange stopped before M8");
  }
  return out;
}

Outcome World::share(std::string_view owner_id, std::string_view user_id, const Digest& data1) {
  auto owner_keys = owner(owner_id);
  auto user_keys = user(user_id);
  auto p = peers(owner_id, user_id);
  DataUserActor du(user_keys, chain_a_, owner_keys.pk_do, p, context_for(ActorRole::DU, user_id));
  du.set_fetch_after_share(false);
  DataOwnerActor owner_actor(owner_keys, chain_a_, p, context_for(ActorRole::DO, owner_id));
  HospitalActor hospital(*node_a_, *relay_, group_, p, context_for(ActorRole::HospitalA, "hospital-a"));
  RelayActor relay(*relay_, group_, p, context_for(ActorRole::Relay, "relay"));

  auto out = drive({&du, &owner_actor, &hospital, &relay}, du.request(data1));
  collect(du, out);
  return out;
}

Outcome World::fetch(std::string_view owner_id, std::string_view user_id, const Digest& data2) {
  auto owner_keys = owner(owner_id);
  auto user_keys = user(user_id);
  auto p = peers(owner_id, user_id);
  DataUserActor du(user_keys, chain_a_, owner_keys.pk_do, p, context_for(ActorRole::DU, user_id));
  RelayActor relay(*relay_, group_, p, context_for(ActorRole::Relay, "relay"),
                   RelayActor::State::awaiting_m7);

  auto out = drive({&du, &relay}, du.request_fetch(data2));
  collect(du, out);
  return out;
}

}  // namespace medexchain::protocol
