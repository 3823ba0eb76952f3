#include <chrono>
#include <random>
#include <thread>

#include "medexchain/protocol.hpp"

namespace medexchain::protocol {

Transport::Transport(TransportConfig config) : config_(config), drop_rng_(config.seed) {
  if (config_.latency_ms < 0) throw Error(Errc::invalid_scalar, "latency must be non-negative");
  if (config_.drop_probability < 0.0 || config_.drop_probability > 1.0) {
    throw Error(Errc::invalid_argument, "drop probability must lie in [0, 1]");
  }
}

std::optional<Bytes> Transport::send(Bytes wire) {
  if (config_.latency_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(config_.latency_ms));
  bool drop = false;
  {
    std::lock_guard lock(mu_);
    if (config_.drop_probability > 0.0) {
      drop = std::bernoulli_distribution(config_.drop_probability)(drop_rng_);
    }
    if (drop) ++dropped_;
    else ++delivered_;
  }
  if (drop) return std::nullopt;
  return wire;
}

std::uint64_t Transport::delivered() const {
  std::lock_guard lock(mu_);
  return delivered_;
}

std::uint64_t Transport::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

}  // namespace medexchain::protocol
