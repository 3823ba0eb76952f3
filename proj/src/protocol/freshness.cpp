#include <cstring>

#include "medexchain/protocol.hpp"

namespace medexchain::protocol {

const char* to_string(Rejection r) noexcept {
  switch (r) {
    case Rejection::stale_timestamp: return "stale-timestamp";
    case Rejection::replayed_nonce: return "replayed-nonce";
    case Rejection::malformed_fields: return "malformed-fields";
    case Rejection::wrong_state: return "wrong-state";
    case Rejection::identity_verification: return "identity-verification";
    case Rejection::unknown_identifier: return "unknown-identifier";
    case Rejection::misrouted: return "misrouted";
  }
  return "unknown";
}

std::size_t FreshnessPolicy::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h;
  std::memcpy(&h, k.data() + 1, sizeof h);
  return h ^ k[0];
}

FreshnessPolicy::Key FreshnessPolicy::key_of(MessageKind kind, const Nonce& nonce) {
  Key k;
  k[0] = static_cast<std::uint8_t>(kind);
  std::copy(nonce.begin(), nonce.end(), k.begin() + 1);
  return k;
}

FreshnessPolicy::FreshnessPolicy(std::int64_t max_skew_ms, Clock clock)
    : max_skew_ms_(max_skew_ms), clock_(std::move(clock)) {
  if (max_skew_ms_ <= 0) throw Error(Errc::invalid_scalar, "freshness window must be positive");
}

std::optional<Rejection> FreshnessPolicy::check_locked(const Key& key, std::int64_t timestamp_ms,
                                                       std::int64_t now) const {
  auto skew = now > timestamp_ms ? now - timestamp_ms : timestamp_ms - now;
  if (skew > max_skew_ms_) return Rejection::stale_timestamp;
  if (seen_.count(key)) return Rejection::replayed_nonce;
  return std::nullopt;
}

void FreshnessPolicy::expire_locked(std::int64_t now) {
  while (!expiry_.empty() && expiry_.front().first <= now) {
    seen_.erase(expiry_.front().second);
    expiry_.pop_front();
  }
}

std::optional<Rejection> FreshnessPolicy::check(MessageKind kind, std::int64_t timestamp_ms,
                                                const Nonce& nonce) const {
  auto now = clock_();
  std::lock_guard lock(mu_);
  return check_locked(key_of(kind, nonce), timestamp_ms, now);
}

std::optional<Rejection> FreshnessPolicy::accept(MessageKind kind, std::int64_t timestamp_ms,
                                                 const Nonce& nonce) {
  auto now = clock_();
  auto key = key_of(kind, nonce);
  std::lock_guard lock(mu_);
  expire_locked(now);
  if (auto r = check_locked(key, timestamp_ms, now)) return r;
  seen_.insert(key);
  // A timestamp older than now - skew is refused anyway, so keeping nonces
  // for two windows covers every envelope that could still pass.
  expiry_.emplace_back(now + 2 * max_skew_ms_, key);
  return std::nullopt;
}

std::size_t FreshnessPolicy::cached() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

FreshnessRegistry::FreshnessRegistry(std::int64_t max_skew_ms, Clock clock)
    : max_skew_ms_(max_skew_ms), clock_(std::move(clock)) {}

std::shared_ptr<FreshnessPolicy> FreshnessRegistry::policy_for(const ActorId& id) {
  std::string key(id.begin(), id.end());
  std::lock_guard lock(mu_);
  auto& slot = policies_[key];
  if (!slot) slot = std::make_shared<FreshnessPolicy>(max_skew_ms_, clock_);
  return slot;
}

}  // namespace medexchain::protocol
