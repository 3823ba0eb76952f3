#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medexchain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// 32-byte content digest (SHA-256). Used for Data_1, Data_2 and store addresses.
using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);
Digest digest_from_hex(std::string_view hex);

inline std::string to_hex(const Digest& d) { return to_hex(ByteView(d.data(), d.size())); }

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

void append(Bytes& out, ByteView data);
void append_u8(Bytes& out, std::uint8_t v);
void append_u16_be(Bytes& out, std::uint16_t v);
void append_u32_be(Bytes& out, std::uint32_t v);
void append_u64_be(Bytes& out, std::uint64_t v);

/// Cursor over an encoded buffer. Every read throws malformed_encoding on underflow.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  ByteView take(std::size_t n);
  std::uint8_t u8();
  std::uint16_t u16_be();
  std::uint32_t u32_be();
  std::uint64_t u64_be();

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return remaining() == 0; }
  void expect_done() const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

struct DigestHash {
  std::size_t operator()(const Digest& d) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | d[i];
    return h;
  }
};

}  // namespace medexchain
