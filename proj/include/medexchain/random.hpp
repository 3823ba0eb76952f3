#pragma once

#include <cstdint>
#include <mutex>
#include <random>
#include <span>

namespace medexchain {

/// Source of uniformly random bytes. Every randomized algorithm takes one
/// explicitly so tests can inject a seeded stream.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64();
};

/// OS-backed CSPRNG (OpenSSL RAND_bytes). Thread-safe.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
  static SystemRandom& instance();
};

/// Reproducible stream for tests and benchmarks. Not cryptographically secure.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::mutex mu_;
  std::mt19937_64 engine_;
};

}  // namespace medexchain
