#include <memory>

#include <openssl/evp.h>

#include "medexchain/digest.hpp"
#include "medexchain/scheme.hpp"

namespace medexchain::scheme {

namespace {

constexpr std::string_view kDemInfo = "medexchain/dem/aes-256-gcm";

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

Bytes derive_key(const GT& m) {
  auto ikm = m.group().serialize(m);
  return hkdf_sha256(ikm, {}, as_bytes(kDemInfo), 32);
}

void check(int rc, const char* what) {
  if (rc != 1) throw Error(Errc::internal_consistency, what);
}

}  // namespace

Bytes hybrid_wrap(ByteView phr, const GT& m, RandomSource& rng) {
  const Bytes key = derive_key(m);
  Bytes out(kDemNonceBytes);
  rng.fill(out);

  CipherCtx ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "gcm init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kDemNonceBytes, nullptr), "ivlen");
  check(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), out.data()), "gcm key");

  out.resize(kDemNonceBytes + phr.size() + kDemTagBytes);
  int len = 0;
  if (!phr.empty()) {
    check(EVP_EncryptUpdate(ctx.get(), out.data() + kDemNonceBytes, &len, phr.data(),
                            static_cast<int>(phr.size())),
          "gcm update");
  }
  int tail = 0;
  check(EVP_EncryptFinal_ex(ctx.get(), out.data() + kDemNonceBytes + len, &tail), "gcm final");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kDemTagBytes,
                            out.data() + kDemNonceBytes + phr.size()),
        "gcm tag");
  return out;
}

Bytes hybrid_unwrap(ByteView wrapped, const GT& m) {
  if (wrapped.size() < kDemNonceBytes + kDemTagBytes) {
    throw Error(Errc::tamper_detected, "wrapped payload too short");
  }
  const Bytes key = derive_key(m);
  const auto nonce = wrapped.first(kDemNonceBytes);
  const auto body = wrapped.subspan(kDemNonceBytes, wrapped.size() - kDemNonceBytes - kDemTagBytes);
  Bytes tag(wrapped.end() - kDemTagBytes, wrapped.end());

  CipherCtx ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "gcm init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kDemNonceBytes, nullptr), "ivlen");
  check(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "gcm key");

  Bytes out(body.size());
  int len = 0;
  if (!body.empty()) {
    check(EVP_DecryptUpdate(ctx.get(), out.data(), &len, body.data(), static_cast<int>(body.size())),
          "gcm update");
  }
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kDemTagBytes, tag.data()), "gcm tag");
  int tail = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &tail) != 1) {
    throw Error(Errc::tamper_detected, "DEM authentication failed");
  }
  return out;
}

}  // namespace medexchain::scheme
