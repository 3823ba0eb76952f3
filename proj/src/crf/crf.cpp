#include "medexchain/crf.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include "medexchain/codec.hpp"
#include "medexchain/digest.hpp"

namespace medexchain::crf {

namespace {

void require_master(const Scalar& s) {
  if (!s.valid() || s.is_zero()) throw Error(Errc::invalid_master_key, "CRF master key must be nonzero");
}

std::string format_record(const CiphertextId& id, const Scalar& beta) {
  return to_hex(id) + " " + to_hex(beta.group().serialize(beta));
}

}  // namespace

CiphertextId ciphertext_id(const scheme::SanitizedCiphertext& ct) {
  return sha256(scheme::encode_wire(ct));
}

// ---- CRF_A ----

CrfA::CrfA(scheme::ChainParams chain_a, Scalar master, RandomSource& rng)
    : chain_(std::move(chain_a)), master_(std::move(master)), rng_(rng) {
  require_master(master_);
  if (chain_.tag != scheme::ChainTag::A) throw Error(Errc::wrong_chain, "CRF_A needs chain A parameters");
}

G1 CrfA::sanitize_system_key(const G1& hospital_pk) const {
  return scheme::crf_update_public_key(hospital_pk, master_);
}

G1 CrfA::sanitize_owner_key(const G1& sk_do_raw) const { return scheme::crf_keygen_do(sk_do_raw, master_); }

SanitizedOutput CrfA::sanitize_ciphertext(const scheme::OriginalCiphertext& ct, const G1& pk_do) {
  return sanitize_ciphertext(ct, pk_do, chain_.group->random_nonzero_scalar(rng_));
}

SanitizedOutput CrfA::sanitize_ciphertext(const scheme::OriginalCiphertext& ct, const G1& pk_do,
                                          const Scalar& beta) {
  SanitizedOutput out;
  out.ciphertext = scheme::crf_enc(ct, pk_do, chain_, beta);
  out.id = ciphertext_id(out.ciphertext);
  record(out.id, beta);
  return out;
}

scheme::SanitizedReKey CrfA::sanitize_rekey(const scheme::ReKey& rk, const CiphertextId& id,
                                            const G1& pk_do,
                                            const scheme::UserPublicKey& pk_du) const {
  auto beta = beta_for(id);
  if (!beta) throw Error(Errc::unknown_ciphertext, "no beta recorded for " + to_hex(id));
  return scheme::crf_rekeygen(rk, pk_do, pk_du, *beta);
}

std::optional<Scalar> CrfA::beta_for(const CiphertextId& id) const {
  std::shared_lock lock(mu_);
  auto it = beta_ledger_.find(id);
  if (it == beta_ledger_.end()) return std::nullopt;
  return it->second;
}

void CrfA::record(const CiphertextId& id, const Scalar& beta) {
  std::unique_lock lock(mu_);
  auto [it, inserted] = beta_ledger_.try_emplace(id, beta);
  if (!inserted) {
    if (it->second == beta) return;
    throw Error(Errc::internal_consistency, "conflicting beta for ciphertext " + to_hex(id));
  }
  if (journal_) {
    std::ofstream out(*journal_, std::ios::app);
    out << format_record(id, beta) << '\n';
    if (!out) throw Error(Errc::io, "cannot append to " + journal_->string());
  }
}

std::size_t CrfA::ledger_size() const {
  std::shared_lock lock(mu_);
  return beta_ledger_.size();
}

void CrfA::write_snapshot(std::ostream& out) const {
  std::shared_lock lock(mu_);
  for (const auto& [id, beta] : beta_ledger_) out << format_record(id, beta) << '\n';
}

void CrfA::load_snapshot(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id_hex, beta_hex;
    if (!(fields >> id_hex >> beta_hex)) throw Error(Errc::malformed_encoding, "bad ledger line: " + line);
    record(digest_from_hex(id_hex), chain_.group->deserialize_scalar(from_hex(beta_hex)));
  }
}

void CrfA::attach_journal(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    load_snapshot(in);
  }
  std::unique_lock lock(mu_);
  journal_ = path;
}

// ---- CRF_B ----

CrfB::CrfB(scheme::GroupPtr grp, Scalar master) : group_(std::move(grp)), master_(std::move(master)) {
  require_master(master_);
}

G1 CrfB::sanitize_system_key(const G1& hospital_pk) const {
  return scheme::crf_update_public_key(hospital_pk, master_);
}

G1 CrfB::sanitize_partial_key(const G1& partial_raw) const {
  return scheme::crf_partial_key(partial_raw, master_);
}

}  // namespace medexchain::crf
