// Exponent-representation backend: g^k is stored as k, e(g,g)^k as k.

#include <algorithm>

#include "backend.hpp"
#include "medexchain/digest.hpp"

namespace medexchain::group::detail {

Bytes encode_fixed(const mpz_class& v, std::size_t width) {
  Bytes out(width, 0);
  if (v == 0) return out;
  std::size_t count = 0;
  Bytes raw((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
  mpz_export(raw.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  raw.resize(count);
  if (count > width) throw Error(Errc::internal_consistency, "integer exceeds encoding width");
  std::copy(raw.begin(), raw.end(), out.begin() + static_cast<std::ptrdiff_t>(width - count));
  return out;
}

mpz_class decode_fixed(ByteView data) {
  mpz_class v;
  if (!data.empty()) mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
  return v;
}

namespace {

class TransparentBackend final : public Backend {
 public:
  explicit TransparentBackend(const GroupProfile& p) : q_(p.order), width_(p.coordinate_bytes) {}

  Point g1_identity() const override { return make(0); }
  Point g1_mul(const Point& a, const Point& b) const override { return make(a.x + b.x); }
  Point g1_inv(const Point& a) const override { return make(-a.x); }
  Point g1_exp(const Point& a, const mpz_class& k) const override { return make(a.x * k); }
  bool g1_eq(const Point& a, const Point& b) const override { return a.x == b.x; }
  bool g1_on_curve(const Point& a) const override { return a.x >= 0 && a.x < q_ && a.y == 0; }

  Fp2 gt_identity() const override { return {0, 0}; }
  Fp2 gt_mul(const Fp2& a, const Fp2& b) const override { return {mod(a.re + b.re), 0}; }
  Fp2 gt_inv(const Fp2& a) const override { return {mod(-a.re), 0}; }
  Fp2 gt_exp(const Fp2& a, const mpz_class& k) const override { return {mod(a.re * k), 0}; }
  bool gt_eq(const Fp2& a, const Fp2& b) const override { return a.re == b.re; }
  bool gt_valid(const Fp2& a) const override { return a.re >= 0 && a.re < q_ && a.im == 0; }

  Fp2 pair(const Point& a, const Point& b) const override { return {mod(a.x * b.x), 0}; }

  Point hash_to_g1(ByteView data) const override {
    const std::size_t len = (mpz_sizeinbase(q_.get_mpz_t(), 2) + 7) / 8 + 16;
    for (std::uint32_t ctr = 0;; ++ctr) {
      Bytes input(data.begin(), data.end());
      append_u32_be(input, ctr);
      mpz_class k = decode_fixed(shake256(input, len)) % q_;
      if (k != 0) return make(k);
    }
  }

  Bytes encode_g1(const Point& a) const override {
    Bytes out = encode_fixed(a.x, width_);
    out.resize(2 * width_, 0);
    return out;
  }

  Point decode_g1(ByteView data) const override {
    if (data.size() != 2 * width_) throw Error(Errc::malformed_encoding, "G1 encoding width");
    Point p;
    p.x = decode_fixed(data.first(width_));
    p.y = decode_fixed(data.subspan(width_));
    if (!g1_on_curve(p)) throw Error(Errc::invalid_element, "G1 exponent out of range");
    p.infinity = p.x == 0;
    return p;
  }

  Bytes encode_gt(const Fp2& a) const override {
    Bytes out = encode_fixed(a.re, width_);
    out.resize(2 * width_, 0);
    return out;
  }

  Fp2 decode_gt(ByteView data) const override {
    if (data.size() != 2 * width_) throw Error(Errc::malformed_encoding, "GT encoding width");
    Fp2 v{decode_fixed(data.first(width_)), decode_fixed(data.subspan(width_))};
    if (!gt_valid(v)) throw Error(Errc::invalid_element, "GT exponent out of range");
    return v;
  }

 private:
  mpz_class mod(const mpz_class& v) const {
    mpz_class r;
    mpz_mod(r.get_mpz_t(), v.get_mpz_t(), q_.get_mpz_t());
    return r;
  }

  Point make(const mpz_class& k) const {
    Point p;
    p.x = mod(k);
    p.y = 0;
    p.infinity = p.x == 0;
    return p;
  }

  mpz_class q_;
  std::size_t width_;
};

}  // namespace

std::unique_ptr<Backend> make_transparent_backend(const GroupProfile& profile) {
  return std::make_unique<TransparentBackend>(profile);
}

}  // namespace medexchain::group::detail
