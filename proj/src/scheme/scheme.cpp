#include "medexchain/scheme.hpp"

namespace medexchain::scheme {

namespace {

void require_nonzero(const Scalar& s, const char* name, Errc code = Errc::invalid_scalar) {
  if (!s.valid()) throw Error(code, std::string(name) + " is uninitialized");
  if (s.is_zero()) throw Error(code, std::string(name) + " must be nonzero");
}

void require_identity(ByteView id) {
  if (id.empty()) throw Error(Errc::invalid_identity, "identity must be non-empty");
}

void require_chain(const ChainParams& params, ChainTag tag) {
  if (params.tag != tag) {
    throw Error(Errc::wrong_chain, std::string("expected chain ") + to_string(tag) +
                                       " parameters, got " + to_string(params.tag));
  }
}

void require_valid(const G1& x, const char* name) {
  if (!x.valid()) throw Error(Errc::invalid_ciphertext, std::string(name) + " is missing");
}

void require_valid(const GT& x, const char* name) {
  if (!x.valid()) throw Error(Errc::invalid_ciphertext, std::string(name) + " is missing");
}

}  // namespace

const char* to_string(ChainTag tag) noexcept { return tag == ChainTag::A ? "A" : "B"; }

// ---- setup ----

G1 hospital_public_key(const GroupPtr& grp, const Scalar& hospital_master) {
  require_nonzero(hospital_master, "hospital master key", Errc::invalid_master_key);
  return grp->pow(grp->generator(), hospital_master);
}

G1 crf_update_public_key(const G1& hospital_pk, const Scalar& crf_master) {
  require_nonzero(crf_master, "CRF master key", Errc::invalid_master_key);
  return group::pow(hospital_pk, crf_master);
}

ChainParams setup_chain(const GroupPtr& grp, const Scalar& hospital_master,
                        const Scalar& crf_master, ChainTag tag) {
  require_nonzero(crf_master, "CRF master key", Errc::invalid_master_key);
  auto pk = hospital_public_key(grp, hospital_master);
  return ChainParams{grp, crf_update_public_key(pk, crf_master), tag};
}

// ---- key generation ----

OwnerKeyPair keygen_do(const group::Group& grp, ByteView identity, const Scalar& s) {
  require_identity(identity);
  require_nonzero(s, "s", Errc::invalid_master_key);
  G1 pk = grp.hash_to_g1(identity);
  G1 sk = grp.pow(pk, s);
  return {std::move(pk), std::move(sk)};
}

G1 crf_keygen_do(const G1& sk_do_raw, const Scalar& a) {
  require_nonzero(a, "a", Errc::invalid_master_key);
  return group::pow(sk_do_raw, a);
}

OwnerKeys provision_owner(const group::Group& grp, ByteView identity, const Scalar& s,
                          const Scalar& a) {
  auto pair = keygen_do(grp, identity, s);
  auto sanitized = crf_keygen_do(pair.sk_do_raw, a);
  return OwnerKeys{Bytes(identity.begin(), identity.end()), std::move(pair.pk_do),
                   std::move(pair.sk_do_raw), std::move(sanitized)};
}

G1 partial_key(const group::Group& grp, ByteView identity, const Scalar& y) {
  require_identity(identity);
  require_nonzero(y, "y", Errc::invalid_master_key);
  return grp.pow(grp.hash_to_g1(identity), y);
}

G1 crf_partial_key(const G1& partial_raw, const Scalar& b) {
  require_nonzero(b, "b", Errc::invalid_master_key);
  return group::pow(partial_raw, b);
}

UserKeys finalize_user_keys(const group::Group& grp, ByteView identity, const G1& partial_raw,
                            const G1& partial_sanitized, const Scalar& r,
                            const G1& chain_b_public_key) {
  require_identity(identity);
  require_nonzero(r, "r");
  UserKeys keys;
  keys.identity.assign(identity.begin(), identity.end());
  keys.partial_raw = partial_raw;
  keys.partial_sanitized = partial_sanitized;
  keys.user_secret = r;
  keys.sk_du = grp.pow(partial_sanitized, r);
  // H1(ID) is evaluated again here rather than cached from partial_key.
  keys.pk.pk1 = grp.hash_to_g1(identity);
  keys.pk.pk2 = grp.pow(chain_b_public_key, r);
  return keys;
}

UserKeys keygen_du(const group::Group& grp, ByteView identity, const Scalar& y, const Scalar& b,
                   const Scalar& r, const G1& chain_b_public_key) {
  require_nonzero(r, "r");
  auto d = partial_key(grp, identity, y);
  auto d_sanitized = crf_partial_key(d, b);
  return finalize_user_keys(grp, identity, d, d_sanitized, r, chain_b_public_key);
}

bool owner_keys_consistent(const ChainParams& chain_a, const OwnerKeys& keys) {
  const auto& grp = *chain_a.group;
  return grp.pair(grp.generator(), keys.sk_do_sanitized) ==
         grp.pair(chain_a.system_public_key, keys.pk_do);
}

bool user_keys_consistent(const UserKeys& keys) {
  const auto& grp = keys.sk_du.group();
  if (keys.user_secret.valid() && keys.user_secret.is_zero()) return false;
  return grp.pair(keys.pk.pk1, keys.pk.pk2) == grp.pair(grp.generator(), keys.sk_du);
}

// ---- encryption ----

OriginalCiphertext enc(const GT& m, const ChainParams& chain_a, const G1& pk_do,
                       const Scalar& alpha) {
  require_chain(chain_a, ChainTag::A);
  require_nonzero(alpha, "alpha");
  const auto& grp = *chain_a.group;
  G1 c1 = grp.pow(grp.generator(), alpha);
  GT c2 = m * grp.pow(grp.pair(chain_a.system_public_key, pk_do), alpha);
  return {std::move(c1), std::move(c2)};
}

SanitizedCiphertext crf_enc(const OriginalCiphertext& ct, const G1& pk_do,
                            const ChainParams& chain_a, const Scalar& beta) {
  require_chain(chain_a, ChainTag::A);
  require_nonzero(beta, "beta");
  const auto& grp = *chain_a.group;
  SanitizedCiphertext out;
  out.c1p = ct.c1 * grp.pow(grp.generator(), beta);
  // e(PK_A', pk_DO) is recomputed, not shared with enc.
  out.c2p = ct.c2 * grp.pow(grp.pair(chain_a.system_public_key, pk_do), beta);
  out.c3p = grp.pow(pk_do, beta);
  return out;
}

GT owner_decrypt(const OriginalCiphertext& ct, const G1& sk_do_sanitized) {
  require_valid(ct.c1, "c1");
  require_valid(ct.c2, "c2");
  return ct.c2 / group::pair(ct.c1, sk_do_sanitized);
}

// ---- re-encryption ----

ReKey rekeygen(const G1& sk_do_sanitized, const UserPublicKey& pk_du, const Scalar& lambda,
               const GT& x) {
  require_nonzero(lambda, "lambda");
  if (!pk_du.pk1.valid() || !pk_du.pk2.valid() || pk_du.pk1.is_identity() ||
      pk_du.pk2.is_identity()) {
    throw Error(Errc::invalid_element, "degenerate data-user public key (r = 0?)");
  }
  if (!x.valid()) throw Error(Errc::invalid_element, "X is uninitialized");
  const auto& grp = sk_do_sanitized.group();
  ReKey rk;
  rk.rk1 = grp.hash_gt_to_g1(x) / sk_do_sanitized;
  rk.rk2 = grp.pow(grp.generator(), lambda);
  rk.rk3 = x * grp.pow(grp.pair(pk_du.pk1, pk_du.pk2), lambda);
  return rk;
}

SanitizedReKey crf_rekeygen(const ReKey& rk, const G1& pk_do, const UserPublicKey& pk_du,
                            const Scalar& beta) {
  require_nonzero(beta, "beta");
  const auto& grp = pk_do.group();
  SanitizedReKey out;
  out.rk1p = rk.rk1 * grp.pow(pk_do, -beta);
  out.rk2p = rk.rk2 * grp.pow(grp.generator(), beta);
  out.rk3p = rk.rk3 * grp.pow(grp.pair(pk_du.pk1, pk_du.pk2), beta);
  return out;
}

ReCiphertext reenc(const SanitizedCiphertext& ct, const SanitizedReKey& rk) {
  ReCiphertext out;
  out.c1 = ct.c1p;
  out.c2 = ct.c2p * group::pair(ct.c1p, rk.rk1p * ct.c3p);
  out.c3 = rk.rk2p;
  out.c4 = rk.rk3p;
  return out;
}

GT recover_rekey_secret(const ReCiphertext& ct, const G1& sk_du) {
  require_valid(ct.c3, "C3");
  require_valid(ct.c4, "C4");
  if (ct.c3.is_identity()) throw Error(Errc::invalid_ciphertext, "C3 is the identity");
  if (ct.c3.group_ptr() != sk_du.group_ptr() || ct.c4.group_ptr() != sk_du.group_ptr()) {
    throw Error(Errc::invalid_ciphertext, "ciphertext and key use different groups");
  }
  return ct.c4 / group::pair(ct.c3, sk_du);
}

GT dec(const ReCiphertext& ct, const G1& sk_du) {
  require_valid(ct.c1, "C1");
  require_valid(ct.c2, "C2");
  GT x = recover_rekey_secret(ct, sk_du);
  const auto& grp = sk_du.group();
  if (ct.c1.group_ptr() != sk_du.group_ptr() || ct.c2.group_ptr() != sk_du.group_ptr()) {
    throw Error(Errc::invalid_ciphertext, "ciphertext and key use different groups");
  }
  return ct.c2 / grp.pair(ct.c1, grp.hash_gt_to_g1(x));
}

PlainMessage dec_message(const ReCiphertext& ct, const G1& sk_du,
                         const std::optional<Bytes>& dem_payload) {
  PlainMessage out;
  out.group_payload = dec(ct, sk_du);
  if (dem_payload) out.dem_payload = hybrid_unwrap(*dem_payload, out.group_payload);
  return out;
}

// ---- sampling wrappers ----

OriginalCiphertext sample_enc(const GT& m, const ChainParams& chain_a, const G1& pk_do,
                              RandomSource& rng) {
  return enc(m, chain_a, pk_do, chain_a.group->random_nonzero_scalar(rng));
}

ReKey sample_rekeygen(const G1& sk_do_sanitized, const UserPublicKey& pk_du, RandomSource& rng) {
  const auto& grp = sk_do_sanitized.group();
  auto lambda = grp.random_nonzero_scalar(rng);
  auto x = grp.random_gt(rng);
  return rekeygen(sk_do_sanitized, pk_du, lambda, x);
}

}  // namespace medexchain::scheme
