#include "medexchain/bytes.hpp"

#include <algorithm>

#include "medexchain/error.hpp"

namespace medexchain {

namespace {

int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::malformed_encoding, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::malformed_encoding, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  auto raw = from_hex(hex);
  if (raw.size() != 32) throw Error(Errc::malformed_encoding, "digest must be 32 bytes");
  Digest d;
  std::copy(raw.begin(), raw.end(), d.begin());
  return d;
}

void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }
void append_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

void append_u16_be(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void append_u32_be(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void append_u64_be(Bytes& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

ByteView ByteReader::take(std::size_t n) {
  if (remaining() < n) throw Error(Errc::malformed_encoding, "truncated input");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint16_t ByteReader::u16_be() {
  auto b = take(2);
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t ByteReader::u32_be() {
  auto b = take(4);
  std::uint32_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t ByteReader::u64_be() {
  auto b = take(8);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

void ByteReader::expect_done() const {
  if (!done()) throw Error(Errc::malformed_encoding, "trailing bytes");
}

}  // namespace medexchain
