#include "medexchain/error.hpp"

namespace medexchain {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::profile_mismatch: return "profile-mismatch";
    case Errc::malformed_encoding: return "malformed-encoding";
    case Errc::invalid_element: return "invalid-element";
    case Errc::invalid_scalar: return "invalid-scalar";
    case Errc::invalid_master_key: return "invalid-master-key";
    case Errc::invalid_identity: return "invalid-identity";
    case Errc::wrong_chain: return "wrong-chain";
    case Errc::invalid_ciphertext: return "invalid-ciphertext";
    case Errc::tamper_detected: return "tamper-detected";
    case Errc::unknown_ciphertext: return "unknown-ciphertext";
    case Errc::internal_consistency: return "internal-consistency";
    case Errc::unsupported: return "unsupported";
    case Errc::duplicate_registration: return "duplicate-registration";
    case Errc::unregistered_chain: return "unregistered-chain";
    case Errc::not_found: return "not-found";
    case Errc::identity_verification: return "identity-verification";
    case Errc::io: return "io";
    case Errc::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace medexchain
