#pragma once

// Binary formats for scheme objects.
//
//   wire:      kind(1) || fixed-width fields in declaration order
//   key file:  "MXC1" || kind(1) || profile id(1) || fields in declaration order
//
// Identities are u16-length-prefixed; group elements and scalars use the
// profile's fixed widths. A framed SanitizedCiphertext is 1 + 3*128 = 385
// bytes on the default profile.

#include "medexchain/scheme.hpp"

namespace medexchain::scheme {

enum class ObjectKind : std::uint8_t {
  chain_params = 0x01,
  master_secrets = 0x02,
  owner_keys = 0x03,
  user_keys = 0x04,
  original_ciphertext = 0x05,
  sanitized_ciphertext = 0x06,
  rekey = 0x07,
  sanitized_rekey = 0x08,
  reciphertext = 0x09,
  user_public_key = 0x0A,
};

inline constexpr std::string_view kKeyFileMagic = "MXC1";

// Unframed field payloads (element bytes only).
Bytes payload(const SanitizedCiphertext& ct);
Bytes payload(const OriginalCiphertext& ct);
Bytes payload(const ReKey& rk);
Bytes payload(const SanitizedReKey& rk);
Bytes payload(const ReCiphertext& ct);
Bytes payload(const UserPublicKey& pk);

// Framed wire encodings.
Bytes encode_wire(const OriginalCiphertext& ct);
Bytes encode_wire(const SanitizedCiphertext& ct);
Bytes encode_wire(const ReKey& rk);
Bytes encode_wire(const SanitizedReKey& rk);
Bytes encode_wire(const ReCiphertext& ct);
Bytes encode_wire(const UserPublicKey& pk);

OriginalCiphertext decode_original_ciphertext(const GroupPtr& grp, ByteView wire);
SanitizedCiphertext decode_sanitized_ciphertext(const GroupPtr& grp, ByteView wire);
ReKey decode_rekey(const GroupPtr& grp, ByteView wire);
SanitizedReKey decode_sanitized_rekey(const GroupPtr& grp, ByteView wire);
ReCiphertext decode_reciphertext(const GroupPtr& grp, ByteView wire);
UserPublicKey decode_user_public_key(const GroupPtr& grp, ByteView wire);

// Key / parameter files.
Bytes encode_file(const ChainParams& params);
Bytes encode_file(const MasterSecrets& secrets);
Bytes encode_file(const OwnerKeys& keys);
Bytes encode_file(const UserKeys& keys);

ChainParams decode_chain_params_file(const GroupPtr& grp, ByteView file);
MasterSecrets decode_master_secrets_file(const GroupPtr& grp, ByteView file);
OwnerKeys decode_owner_keys_file(const GroupPtr& grp, ByteView file);
UserKeys decode_user_keys_file(const GroupPtr& grp, ByteView file);

/// Reads the kind byte of a framed wire object or key file without decoding it.
ObjectKind peek_kind(ByteView data);

}  // namespace medexchain::scheme
