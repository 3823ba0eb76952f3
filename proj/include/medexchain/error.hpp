#pragma once

#include <stdexcept>
#include <string>

namespace medexchain {

enum class Errc {
  profile_mismatch,
  malformed_encoding,
  invalid_element,
  invalid_scalar,
  invalid_master_key,
  invalid_identity,
  wrong_chain,
  invalid_ciphertext,
  tamper_detected,
  unknown_ciphertext,
  internal_consistency,
  unsupported,
  duplicate_registration,
  unregistered_chain,
  not_found,
  identity_verification,
  io,
  invalid_argument,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace medexchain
