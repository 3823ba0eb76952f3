#pragma once

// Cryptographic reverse firewalls for the two hospital chains.
//
// CRF_A re-randomizes everything the data owner emits toward chain A and
// remembers, per sanitized ciphertext, the beta it used: the re-encryption key
// for that ciphertext has to be sanitized with the same beta or decryption
// fails. The ledger is keyed by Data_1 = SHA-256(wire(C_DO')).

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

#include "medexchain/scheme.hpp"

namespace medexchain::crf {

using scheme::G1;
using scheme::GT;
using scheme::Scalar;

using CiphertextId = Digest;

CiphertextId ciphertext_id(const scheme::SanitizedCiphertext& ct);

struct SanitizedOutput {
  scheme::SanitizedCiphertext ciphertext;
  CiphertextId id;
};

class CrfA {
 public:
  CrfA(scheme::ChainParams chain_a, Scalar master, RandomSource& rng);

  const scheme::ChainParams& chain() const { return chain_; }

  G1 sanitize_system_key(const G1& hospital_pk) const;
  G1 sanitize_owner_key(const G1& sk_do_raw) const;

  /// Samples a fresh beta, runs crf_enc and records (Data_1 -> beta).
  SanitizedOutput sanitize_ciphertext(const scheme::OriginalCiphertext& ct, const G1& pk_do);
  SanitizedOutput sanitize_ciphertext(const scheme::OriginalCiphertext& ct, const G1& pk_do,
                                      const Scalar& beta);

  /// Sanitizes with the beta recorded for `id`; Errc::unknown_ciphertext if none.
  scheme::SanitizedReKey sanitize_rekey(const scheme::ReKey& rk, const CiphertextId& id,
                                        const G1& pk_do,
                                        const scheme::UserPublicKey& pk_du) const;

  std::optional<Scalar> beta_for(const CiphertextId& id) const;

  /// Write-once: re-recording the same beta is a no-op, a different beta is
  /// Errc::internal_consistency.
  void record(const CiphertextId& id, const Scalar& beta);
  std::size_t ledger_size() const;

  // Snapshot format: one "hex(id) hex(beta)" record per line.
  void write_snapshot(std::ostream& out) const;
  void load_snapshot(std::istream& in);
  /// Loads `path` if it exists and appends every subsequent record to it.
  void attach_journal(const std::filesystem::path& path);

 private:
  scheme::ChainParams chain_;
  Scalar master_;
  RandomSource& rng_;

  mutable std::shared_mutex mu_;
  std::unordered_map<CiphertextId, Scalar, DigestHash> beta_ledger_;
  std::optional<std::filesystem::path> journal_;
};

class CrfB {
 public:
  CrfB(scheme::GroupPtr grp, Scalar master);

  G1 sanitize_system_key(const G1& hospital_pk) const;
  /// D_DU' = D_DU^b
  G1 sanitize_partial_key(const G1& partial_raw) const;

 private:
  scheme::GroupPtr group_;
  Scalar master_;
};

// ---- algorithm-substitution harness ----

/// How a subverted encryptor hides one bit in alpha, and how the colluding
/// observer reads it back from the exponent of the first ciphertext component.
struct LeakEncoding {
  std::function<Scalar(const group::Group&, bool bit, RandomSource&)> encode;
  std::function<bool(const mpz_class& c1_exponent)> decode;

  static LeakEncoding parity();
};

struct SubversionConfig {
  std::size_t trials = 10'000;
  bool sanitize = true;
  bool check_functionality = false;
  LeakEncoding encoding = LeakEncoding::parity();
};

struct SubversionResult {
  std::size_t trials = 0;
  std::size_t correct_guesses = 0;
  std::size_t functionality_failures = 0;

  double accuracy() const {
    return trials == 0 ? 0.0 : static_cast<double>(correct_guesses) / static_cast<double>(trials);
  }
};

/// Runs Enc* (alpha chosen to encode a secret bit drawn from `leak_bits`),
/// optionally passes each ciphertext through CRF_A, and lets the distinguisher
/// guess the bit from what reaches the chain. Transparent backend only.
SubversionResult run_subverted_encryptor(CrfA& guard, const scheme::OwnerKeys& owner,
                                         const SubversionConfig& config, RandomSource& leak_bits,
                                         RandomSource& encryptor_rng);

}  // namespace medexchain::crf
