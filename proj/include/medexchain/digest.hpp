#pragma once

#include "medexchain/bytes.hpp"

namespace medexchain {

Digest sha256(ByteView data);

/// SHAKE256 extendable-output digest.
Bytes shake256(ByteView data, std::size_t out_len);

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t out_len);

}  // namespace medexchain
