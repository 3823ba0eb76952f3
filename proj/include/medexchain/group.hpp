#pragma once

// Symmetric bilinear group e: G1 x G1 -> GT with instrumented primitives.
//
// Two interchangeable backends sit behind one Group:
//   * transparent: elements are stored as their discrete logs relative to g
//     (resp. e(g,g)); pairing is exponent multiplication mod q. Insecure by
//     construction, but exact, so algebraic identities can be brute-forced.
//   * pairing: supersingular curve y^2 = x^3 + x over F_p, p = 3 mod 4,
//     embedding degree 2, reduced Tate pairing composed with the distortion
//     map (x, y) -> (-x, i*y).
//
// Elements keep a shared reference to the Group that produced them; mixing
// elements of two different groups raises Errc::profile_mismatch.

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include "medexchain/bytes.hpp"
#include "medexchain/error.hpp"
#include "medexchain/random.hpp"

namespace medexchain::group {

enum class BackendKind : std::uint8_t { transparent = 0, pairing = 1 };

const char* to_string(BackendKind kind) noexcept;
BackendKind backend_from_string(std::string_view name);

struct GroupProfile {
  std::string name;
  std::uint8_t id = 0;
  int security_bits = 80;
  mpz_class order;        // q
  mpz_class field_prime;  // p; zero for the transparent backend
  std::size_t coordinate_bytes = 64;
  std::size_t scalar_bytes = 20;
  BackendKind backend = BackendKind::pairing;
  // Affine generator coordinates (pairing) or the generator's exponent in x
  // (transparent, always 1). Derived by hashing a fixed tag when absent.
  std::optional<std::pair<mpz_class, mpz_class>> generator;

  std::size_t g1_bytes() const { return 2 * coordinate_bytes; }
  std::size_t gt_bytes() const { return 2 * coordinate_bytes; }

  /// 80-bit Type-A profile: 512-bit field, 160-bit order, 128-byte elements.
  static GroupProfile type_a_80();
  /// Transparent backend over the same 160-bit order and the same widths.
  static GroupProfile transparent_80();
  /// Tiny transparent profile for exhaustive oracles (q = 101 by default).
  static GroupProfile transparent_small(unsigned long q = 101);

  static GroupProfile by_id(std::uint8_t id);
};

/// key=value text descriptor (security_bits, q, field prime, generator, ...).
std::string to_descriptor(const GroupProfile& profile);
GroupProfile parse_descriptor(std::string_view text);

struct OpCounters {
  std::uint64_t e1 = 0;
  std::uint64_t e2 = 0;
  std::uint64_t pairing = 0;
  std::uint64_t hash = 0;

  friend bool operator==(const OpCounters&, const OpCounters&) = default;
  friend OpCounters operator-(const OpCounters& a, const OpCounters& b) {
    return {a.e1 - b.e1, a.e2 - b.e2, a.pairing - b.pairing, a.hash - b.hash};
  }
  friend OpCounters operator+(const OpCounters& a, const OpCounters& b) {
    return {a.e1 + b.e1, a.e2 + b.e2, a.pairing + b.pairing, a.hash + b.hash};
  }
};

std::string to_string(const OpCounters& c);

namespace detail {

struct Point {
  mpz_class x;
  mpz_class y;
  bool infinity = true;
};

struct Fp2 {
  mpz_class re;
  mpz_class im;
};

class Backend;

}  // namespace detail

class Group;
using GroupPtr = std::shared_ptr<const Group>;

class Scalar {
 public:
  Scalar() = default;

  const Group& group() const;
  const GroupPtr& group_ptr() const { return group_; }
  const mpz_class& value() const { return value_; }
  bool is_zero() const { return value_ == 0; }
  bool valid() const { return group_ != nullptr; }

  Scalar inverse() const;
  Scalar operator-() const;
  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend bool operator==(const Scalar& a, const Scalar& b);

 private:
  friend class Group;
  Scalar(GroupPtr g, mpz_class v) : group_(std::move(g)), value_(std::move(v)) {}

  GroupPtr group_;
  mpz_class value_;
};

/// Element of the source group G1.
class G1 {
 public:
  G1() = default;

  const Group& group() const;
  const GroupPtr& group_ptr() const { return group_; }
  bool valid() const { return group_ != nullptr; }
  bool is_identity() const { return point_.infinity; }

  // Group law in multiplicative notation. Not counted.
  G1 inverse() const;
  friend G1 operator*(const G1& a, const G1& b);
  friend G1 operator/(const G1& a, const G1& b);
  friend bool operator==(const G1& a, const G1& b);

  const detail::Point& repr() const { return point_; }

 private:
  friend class Group;
  G1(GroupPtr g, detail::Point p) : group_(std::move(g)), point_(std::move(p)) {}

  GroupPtr group_;
  detail::Point point_;
};

/// Element of the target group GT.
class GT {
 public:
  GT() = default;

  const Group& group() const;
  const GroupPtr& group_ptr() const { return group_; }
  bool valid() const { return group_ != nullptr; }
  bool is_identity() const;

  GT inverse() const;
  friend GT operator*(const GT& a, const GT& b);
  friend GT operator/(const GT& a, const GT& b);
  friend bool operator==(const GT& a, const GT& b);

  const detail::Fp2& repr() const { return value_; }

 private:
  friend class Group;
  GT(GroupPtr g, detail::Fp2 v) : group_(std::move(g)), value_(std::move(v)) {}

  GroupPtr group_;
  detail::Fp2 value_;
};

class Group : public std::enable_shared_from_this<Group> {
 public:
  static GroupPtr create(GroupProfile profile);

  ~Group();
  Group(const Group&) = delete;
  Group& operator=(const Group&) = delete;

  const GroupProfile& profile() const { return profile_; }
  BackendKind backend() const { return profile_.backend; }
  const mpz_class& order() const { return profile_.order; }

  const G1& generator() const { return generator_; }
  G1 g1_identity() const;
  GT gt_identity() const;
  /// e(g, g), precomputed without touching the counters.
  const GT& gt_generator() const { return gt_generator_; }

  // Scalars.
  Scalar scalar(const mpz_class& v) const;
  Scalar scalar(long v) const { return scalar(mpz_class(v)); }
  Scalar random_scalar(RandomSource& rng) const;
  Scalar random_nonzero_scalar(RandomSource& rng) const;

  // Counted primitives.
  G1 pow(const G1& base, const Scalar& k) const;     // E1
  GT pow(const GT& base, const Scalar& k) const;     // E2
  GT pair(const G1& a, const G1& b) const;           // P
  G1 hash_to_g1(ByteView data) const;                // H  (H1)
  G1 hash_gt_to_g1(const GT& x) const;               // H  (H2)

  // Uncounted helpers for sampling and test oracles.
  GT random_gt(RandomSource& rng) const;
  G1 random_g1(RandomSource& rng) const;
  G1 g1_from_exponent(const mpz_class& k) const;
  GT gt_from_exponent(const mpz_class& k) const;
  /// Discrete log of an element. Transparent backend only; Errc::unsupported otherwise.
  mpz_class exponent_of(const G1& x) const;
  mpz_class exponent_of(const GT& x) const;
  /// Order-q subgroup membership (q*P == O, resp. x^q == 1).
  bool in_subgroup(const G1& x) const;
  bool in_subgroup(const GT& x) const;
  bool on_curve(const G1& x) const;

  // Fixed-width big-endian encodings.
  Bytes serialize(const G1& x) const;
  Bytes serialize(const GT& x) const;
  Bytes serialize(const Scalar& x) const;
  G1 deserialize_g1(ByteView data) const;
  GT deserialize_gt(ByteView data) const;
  Scalar deserialize_scalar(ByteView data) const;

  OpCounters counters_snapshot() const;
  void counters_reset() const;

  /// Throws Errc::profile_mismatch unless `g` is this group.
  void check_same(const Group& g) const;

 private:
  explicit Group(GroupProfile profile);
  void init();

  G1 make_g1(detail::Point p) const;
  GT make_gt(detail::Fp2 v) const;
  G1 hash_bytes_to_g1(ByteView data) const;

  friend class G1;
  friend class GT;
  friend class Scalar;
  friend G1 operator*(const G1& a, const G1& b);
  friend bool operator==(const G1& a, const G1& b);
  friend GT operator*(const GT& a, const GT& b);
  friend bool operator==(const GT& a, const GT& b);

  GroupProfile profile_;
  std::unique_ptr<detail::Backend> backend_;
  G1 generator_;
  GT gt_generator_;

  mutable std::atomic<std::uint64_t> e1_{0};
  mutable std::atomic<std::uint64_t> e2_{0};
  mutable std::atomic<std::uint64_t> pairing_{0};
  mutable std::atomic<std::uint64_t> hash_{0};
};

// Free-function spellings that read like the formulas.
inline G1 pow(const G1& base, const Scalar& k) { return base.group().pow(base, k); }
inline GT pow(const GT& base, const Scalar& k) { return base.group().pow(base, k); }
inline GT pair(const G1& a, const G1& b) { return a.group().pair(a, b); }

}  // namespace medexchain::group
