#include "medexchain/digest.hpp"

#include <memory>

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include "medexchain/error.hpp"

namespace medexchain {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

void check(int rc, const char* what) {
  if (rc != 1) throw Error(Errc::internal_consistency, what);
}

}  // namespace

Digest sha256(ByteView data) {
  Digest out;
  unsigned int len = 0;
  check(EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr), "sha256");
  return out;
}

Bytes shake256(ByteView data, std::size_t out_len) {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  Bytes out(out_len);
  check(EVP_DigestInit_ex(ctx.get(), EVP_shake256(), nullptr), "shake256 init");
  check(EVP_DigestUpdate(ctx.get(), data.data(), data.size()), "shake256 update");
  check(EVP_DigestFinalXOF(ctx.get(), out.data(), out.size()), "shake256 final");
  return out;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t out_len) {
  std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
      EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr), &EVP_PKEY_CTX_free);
  if (!ctx) throw Error(Errc::internal_consistency, "hkdf context");
  check(EVP_PKEY_derive_init(ctx.get()), "hkdf init");
  check(EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()), "hkdf md");
  check(EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())),
        "hkdf salt");
  check(EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())),
        "hkdf key");
  check(EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(), static_cast<int>(info.size())),
        "hkdf info");
  Bytes out(out_len);
  std::size_t len = out_len;
  check(EVP_PKEY_derive(ctx.get(), out.data(), &len), "hkdf derive");
  return out;
}

}  // namespace medexchain
