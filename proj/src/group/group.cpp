#include "medexchain/group.hpp"

#include <sstream>

#include "backend.hpp"
#include "medexchain/digest.hpp"

namespace medexchain::group {

namespace {

constexpr std::string_view kH1Domain = "medexchain/H1:";
constexpr std::string_view kH2Domain = "medexchain/H2:";
constexpr std::string_view kGeneratorTag = "medexchain/generator";

const Group& require(const GroupPtr& g) {
  if (!g) throw Error(Errc::invalid_element, "use of an uninitialized element");
  return *g;
}

void same(const GroupPtr& a, const GroupPtr& b) {
  if (!a || !b) throw Error(Errc::invalid_element, "use of an uninitialized element");
  if (a.get() != b.get()) throw Error(Errc::profile_mismatch, "elements from different groups");
}

mpz_class reduce(const mpz_class& v, const mpz_class& q) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), q.get_mpz_t());
  return r;
}

Bytes with_domain(std::string_view domain, ByteView data) {
  Bytes in(domain.begin(), domain.end());
  append(in, data);
  return in;
}

}  // namespace

std::string to_string(const OpCounters& c) {
  std::ostringstream out;
  out << "{E1:" << c.e1 << ", E2:" << c.e2 << ", P:" << c.pairing << ", H:" << c.hash << "}";
  return out.str();
}

// ---- Scalar ----

const Group& Scalar::group() const { return require(group_); }

Scalar Scalar::inverse() const {
  const auto& g = group();
  if (is_zero()) throw Error(Errc::invalid_scalar, "zero has no inverse");
  mpz_class r;
  mpz_invert(r.get_mpz_t(), value_.get_mpz_t(), g.order().get_mpz_t());
  return {group_, r};
}

Scalar Scalar::operator-() const { return {group_, reduce(-value_, group().order())}; }

Scalar operator+(const Scalar& a, const Scalar& b) {
  same(a.group_, b.group_);
  return {a.group_, reduce(a.value_ + b.value_, a.group().order())};
}

Scalar operator-(const Scalar& a, const Scalar& b) {
  same(a.group_, b.group_);
  return {a.group_, reduce(a.value_ - b.value_, a.group().order())};
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  same(a.group_, b.group_);
  return {a.group_, reduce(a.value_ * b.value_, a.group().order())};
}

bool operator==(const Scalar& a, const Scalar& b) {
  same(a.group_, b.group_);
  return a.value_ == b.value_;
}

// ---- G1 ----

const Group& G1::group() const { return require(group_); }

G1 G1::inverse() const {
  const auto& g = group();
  return g.make_g1(g.backend_->g1_inv(point_));
}

G1 operator*(const G1& a, const G1& b) {
  same(a.group_, b.group_);
  const auto& g = a.group();
  return g.make_g1(g.backend_->g1_mul(a.point_, b.point_));
}

G1 operator/(const G1& a, const G1& b) { return a * b.inverse(); }

bool operator==(const G1& a, const G1& b) {
  same(a.group_, b.group_);
  return a.group().backend_->g1_eq(a.point_, b.point_);
}

// ---- GT ----

const Group& GT::group() const { return require(group_); }

bool GT::is_identity() const {
  const auto& g = group();
  return g.backend_->gt_eq(value_, g.backend_->gt_identity());
}

GT GT::inverse() const {
  const auto& g = group();
  return g.make_gt(g.backend_->gt_inv(value_));
}

GT operator*(const GT& a, const GT& b) {
  same(a.group_, b.group_);
  const auto& g = a.group();
  return g.make_gt(g.backend_->gt_mul(a.value_, b.value_));
}

GT operator/(const GT& a, const GT& b) { return a * b.inverse(); }

bool operator==(const GT& a, const GT& b) {
  same(a.group_, b.group_);
  return a.group().backend_->gt_eq(a.value_, b.value_);
}

// ---- Group ----

Group::Group(GroupProfile profile) : profile_(std::move(profile)) {
  if (profile_.backend == BackendKind::pairing) {
    backend_ = detail::make_type_a_backend(profile_);
  } else {
    backend_ = detail::make_transparent_backend(profile_);
  }
}

Group::~Group() = default;

GroupPtr Group::create(GroupProfile profile) {
  std::shared_ptr<Group> g(new Group(std::move(profile)));
  g->init();
  return g;
}

void Group::init() {
  if (profile_.backend == BackendKind::transparent) {
    detail::Point one;
    one.x = 1;
    one.y = 0;
    one.infinity = false;
    generator_ = make_g1(one);
  } else if (profile_.generator) {
    detail::Point pt;
    pt.x = profile_.generator->first;
    pt.y = profile_.generator->second;
    pt.infinity = false;
    generator_ = deserialize_g1(backend_->encode_g1(pt));
    if (generator_.is_identity()) throw Error(Errc::invalid_element, "generator is the identity");
  } else {
    generator_ = hash_bytes_to_g1(as_bytes(kGeneratorTag));
    profile_.generator = std::make_pair(generator_.repr().x, generator_.repr().y);
  }
  gt_generator_ = make_gt(backend_->pair(generator_.repr(), generator_.repr()));
  if (gt_generator_.is_identity()) throw Error(Errc::invalid_element, "degenerate pairing");
}

G1 Group::make_g1(detail::Point p) const { return G1(shared_from_this(), std::move(p)); }
GT Group::make_gt(detail::Fp2 v) const { return GT(shared_from_this(), std::move(v)); }

G1 Group::g1_identity() const { return make_g1(backend_->g1_identity()); }
GT Group::gt_identity() const { return make_gt(backend_->gt_identity()); }

Scalar Group::scalar(const mpz_class& v) const { return Scalar(shared_from_this(), reduce(v, order())); }

Scalar Group::random_scalar(RandomSource& rng) const {
  Bytes buf((mpz_sizeinbase(order().get_mpz_t(), 2) + 7) / 8 + 16);
  rng.fill(buf);
  return scalar(detail::decode_fixed(buf));
}

Scalar Group::random_nonzero_scalar(RandomSource& rng) const {
  for (;;) {
    Scalar s = random_scalar(rng);
    if (!s.is_zero()) return s;
  }
}

void Group::check_same(const Group& g) const {
  if (&g != this) throw Error(Errc::profile_mismatch, "elements from different groups");
}

G1 Group::pow(const G1& base, const Scalar& k) const {
  check_same(base.group());
  check_same(k.group());
  e1_.fetch_add(1, std::memory_order_relaxed);
  return make_g1(backend_->g1_exp(base.repr(), k.value()));
}

GT Group::pow(const GT& base, const Scalar& k) const {
  check_same(base.group());
  check_same(k.group());
  e2_.fetch_add(1, std::memory_order_relaxed);
  return make_gt(backend_->gt_exp(base.repr(), k.value()));
}

GT Group::pair(const G1& a, const G1& b) const {
  check_same(a.group());
  check_same(b.group());
  pairing_.fetch_add(1, std::memory_order_relaxed);
  return make_gt(backend_->pair(a.repr(), b.repr()));
}

G1 Group::hash_bytes_to_g1(ByteView data) const { return make_g1(backend_->hash_to_g1(data)); }

G1 Group::hash_to_g1(ByteView data) const {
  hash_.fetch_add(1, std::memory_order_relaxed);
  return hash_bytes_to_g1(with_domain(kH1Domain, data));
}

G1 Group::hash_gt_to_g1(const GT& x) const {
  check_same(x.group());
  hash_.fetch_add(1, std::memory_order_relaxed);
  return hash_bytes_to_g1(with_domain(kH2Domain, serialize(x)));
}

GT Group::random_gt(RandomSource& rng) const {
  return make_gt(backend_->gt_exp(gt_generator_.repr(), random_scalar(rng).value()));
}

G1 Group::random_g1(RandomSource& rng) const {
  return make_g1(backend_->g1_exp(generator_.repr(), random_scalar(rng).value()));
}

G1 Group::g1_from_exponent(const mpz_class& k) const {
  return make_g1(backend_->g1_exp(generator_.repr(), k));
}

GT Group::gt_from_exponent(const mpz_class& k) const {
  return make_gt(backend_->gt_exp(gt_generator_.repr(), k));
}

mpz_class Group::exponent_of(const G1& x) const {
  check_same(x.group());
  if (backend() != BackendKind::transparent) {
    throw Error(Errc::unsupported, "discrete logs are only observable on the transparent backend");
  }
  return x.repr().x;
}

mpz_class Group::exponent_of(const GT& x) const {
  check_same(x.group());
  if (backend() != BackendKind::transparent) {
    throw Error(Errc::unsupported, "discrete logs are only observable on the transparent backend");
  }
  return x.repr().re;
}

bool Group::on_curve(const G1& x) const {
  check_same(x.group());
  return backend_->g1_on_curve(x.repr());
}

bool Group::in_subgroup(const G1& x) const {
  check_same(x.group());
  if (!backend_->g1_on_curve(x.repr())) return false;
  // g1_exp reduces its exponent mod q, so multiply by q via (q-1) then add once more.
  auto t = backend_->g1_exp(x.repr(), order() - 1);
  return backend_->g1_mul(t, x.repr()).infinity;
}

bool Group::in_subgroup(const GT& x) const {
  check_same(x.group());
  return backend_->gt_valid(x.repr());
}

Bytes Group::serialize(const G1& x) const {
  check_same(x.group());
  return backend_->encode_g1(x.repr());
}

Bytes Group::serialize(const GT& x) const {
  check_same(x.group());
  return backend_->encode_gt(x.repr());
}

Bytes Group::serialize(const Scalar& x) const {
  check_same(x.group());
  return detail::encode_fixed(x.value(), profile_.scalar_bytes);
}

G1 Group::deserialize_g1(ByteView data) const { return make_g1(backend_->decode_g1(data)); }
GT Group::deserialize_gt(ByteView data) const { return make_gt(backend_->decode_gt(data)); }

Scalar Group::deserialize_scalar(ByteView data) const {
  if (data.size() != profile_.scalar_bytes) {
    throw Error(Errc::malformed_encoding, "scalar encoding width");
  }
  mpz_class v = detail::decode_fixed(data);
  if (v >= order()) throw Error(Errc::invalid_element, "scalar not reduced mod q");
  return Scalar(shared_from_this(), v);
}

OpCounters Group::counters_snapshot() const {
  return {e1_.load(), e2_.load(), pairing_.load(), hash_.load()};
}

void Group::counters_reset() const {
  e1_ = 0;
  e2_ = 0;
  pairing_ = 0;
  hash_ = 0;
}

}  // namespace medexchain::group
