#include "medexchain/random.hpp"

#include <openssl/rand.h>

#include "medexchain/error.hpp"

namespace medexchain {

std::uint64_t RandomSource::next_u64() {
  std::uint8_t buf[8];
  fill(buf);
  std::uint64_t v = 0;
  for (auto b : buf) v = (v << 8) | b;
  return v;
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error(Errc::internal_consistency, "RAND_bytes failed");
  }
}

SystemRandom& SystemRandom::instance() {
  static SystemRandom rng;
  return rng;
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mu_);
  std::size_t i = 0;
  while (i < out.size()) {
    auto word = engine_();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(word >> (8 * b));
    }
  }
}

}  // namespace medexchain
