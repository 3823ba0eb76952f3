#pragma once

// IBE (chain A) -> CLC (chain B) proxy re-encryption with reverse-firewall
// sanitization. Every randomized algorithm takes its randomness explicitly;
// the `sample_*` wrappers draw it from a RandomSource.
//
//   setup      PK_A' = g^{s a},  PK_B' = g^{y b}
//   owner      pk_DO = H1(ID), sk_DO = pk^s, sk_DO' = sk_DO^a
//   user       D = H1(ID)^y, D' = D^b, sk_DU = D'^r, pk_DU = (H1(ID), PK_B'^r)
//   enc        (g^alpha, M e(PK_A', pk_DO)^alpha)
//   crf_enc    (c1 g^beta, c2 e(PK_A', pk_DO)^beta, pk_DO^beta)
//   rekeygen   (H2(X)/sk_DO', g^lambda, X e(pk_DU1, pk_DU2)^lambda)
//   crf_rekey  (rk1 pk_DO^-beta, rk2 g^beta, rk3 e(pk_DU1, pk_DU2)^beta)
//   reenc      (c1', c2' e(c1', rk1' c3'), rk2', rk3')
//   dec        X = C4 / e(C3, sk_DU);  M = C2 / e(C1, H2(X))

#include <optional>
#include <type_traits>

#include "medexchain/group.hpp"

namespace medexchain::scheme {

using group::G1;
using group::GroupPtr;
using group::GT;
using group::Scalar;

enum class ChainTag : std::uint8_t { A = 0x0A, B = 0x0B };

const char* to_string(ChainTag tag) noexcept;

struct ChainParams {
  GroupPtr group;
  G1 system_public_key;  // PK_A' or PK_B'
  ChainTag tag = ChainTag::A;
};

struct MasterSecrets {
  Scalar hospital_master;  // s (chain A) or y (chain B)
  Scalar crf_master;       // a (chain A) or b (chain B)
};

struct OwnerKeys {
  Bytes identity;
  G1 pk_do;
  G1 sk_do_raw;
  G1 sk_do_sanitized;
};

struct UserPublicKey {
  G1 pk1;  // H1(ID_DU)
  G1 pk2;  // PK_B'^r
};

struct UserKeys {
  Bytes identity;
  G1 partial_raw;        // D_DU
  G1 partial_sanitized;  // D_DU'
  Scalar user_secret;    // r
  G1 sk_du;
  UserPublicKey pk;
};

struct OriginalCiphertext {
  G1 c1;
  GT c2;
};

struct SanitizedCiphertext {
  G1 c1p;
  GT c2p;
  G1 c3p;
};

struct ReKey {
  G1 rk1;
  G1 rk2;
  GT rk3;
};

struct SanitizedReKey {
  G1 rk1p;
  G1 rk2p;
  GT rk3p;
};

struct ReCiphertext {
  G1 c1;
  GT c2;
  G1 c3;
  GT c4;
};

struct PlainMessage {
  GT group_payload;
  std::optional<Bytes> dem_payload;
};

/// Types that must never be placed on the wire.
template <class T>
inline constexpr bool is_secret_material_v = false;
template <>
inline constexpr bool is_secret_material_v<Scalar> = true;
template <>
inline constexpr bool is_secret_material_v<MasterSecrets> = true;
template <>
inline constexpr bool is_secret_material_v<OwnerKeys> = true;
template <>
inline constexpr bool is_secret_material_v<UserKeys> = true;

// ---- setup ----

G1 hospital_public_key(const GroupPtr& grp, const Scalar& hospital_master);
G1 crf_update_public_key(const G1& hospital_pk, const Scalar& crf_master);
ChainParams setup_chain(const GroupPtr& grp, const Scalar& hospital_master,
                        const Scalar& crf_master, ChainTag tag);

// ---- key generation ----

struct OwnerKeyPair {
  G1 pk_do;
  G1 sk_do_raw;
};

OwnerKeyPair keygen_do(const group::Group& grp, ByteView identity, const Scalar& s);
G1 crf_keygen_do(const G1& sk_do_raw, const Scalar& a);
OwnerKeys provision_owner(const group::Group& grp, ByteView identity, const Scalar& s,
                          const Scalar& a);

G1 partial_key(const group::Group& grp, ByteView identity, const Scalar& y);
G1 crf_partial_key(const G1& partial_raw, const Scalar& b);
UserKeys finalize_user_keys(const group::Group& grp, ByteView identity, const G1& partial_raw,
                            const G1& partial_sanitized, const Scalar& r,
                            const G1& chain_b_public_key);
UserKeys keygen_du(const group::Group& grp, ByteView identity, const Scalar& y, const Scalar& b,
                   const Scalar& r, const G1& chain_b_public_key);

/// pair(g, sk_DO') == pair(PK_A', pk_DO)
bool owner_keys_consistent(const ChainParams& chain_a, const OwnerKeys& keys);
/// pair(pk_DU1, pk_DU2) == pair(g, sk_DU)
bool user_keys_consistent(const UserKeys& keys);

// ---- encryption ----

OriginalCiphertext enc(const GT& m, const ChainParams& chain_a, const G1& pk_do,
                       const Scalar& alpha);
SanitizedCiphertext crf_enc(const OriginalCiphertext& ct, const G1& pk_do,
                            const ChainParams& chain_a, const Scalar& beta);

/// Direct decryption of an original ciphertext by the owner: c2 / e(c1, sk_DO').
GT owner_decrypt(const OriginalCiphertext& ct, const G1& sk_do_sanitized);

// ---- re-encryption ----

ReKey rekeygen(const G1& sk_do_sanitized, const UserPublicKey& pk_du, const Scalar& lambda,
               const GT& x);
SanitizedReKey crf_rekeygen(const ReKey& rk, const G1& pk_do, const UserPublicKey& pk_du,
                            const Scalar& beta);
ReCiphertext reenc(const SanitizedCiphertext& ct, const SanitizedReKey& rk);

/// X = C4 / e(C3, sk_DU)
GT recover_rekey_secret(const ReCiphertext& ct, const G1& sk_du);
/// M = C2 / e(C1, H2(X))
GT dec(const ReCiphertext& ct, const G1& sk_du);

// ---- sampling wrappers ----

OriginalCiphertext sample_enc(const GT& m, const ChainParams& chain_a, const G1& pk_do,
                              RandomSource& rng);
ReKey sample_rekeygen(const G1& sk_do_sanitized, const UserPublicKey& pk_du, RandomSource& rng);

// ---- hybrid data encapsulation ----

inline constexpr std::size_t kDemNonceBytes = 12;
inline constexpr std::size_t kDemTagBytes = 16;

/// nonce(12) || AES-256-GCM(phr) || tag(16), key = HKDF-SHA256(serialize(M)).
Bytes hybrid_wrap(ByteView phr, const GT& m, RandomSource& rng);
/// Throws Errc::tamper_detected when authentication fails.
Bytes hybrid_unwrap(ByteView wrapped, const GT& m);

/// Group decryption followed by DEM unwrapping when a payload is attached.
PlainMessage dec_message(const ReCiphertext& ct, const G1& sk_du,
                         const std::optional<Bytes>& dem_payload);

}  // namespace medexchain::scheme
