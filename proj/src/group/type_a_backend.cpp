// Type-A symmetric pairing on E: y^2 = x^3 + x over F_p, p = 3 (mod 4).
//
// #E(F_p) = p + 1 = h * q. F_{p^2} = F_p[i]/(i^2 + 1). The symmetric pairing is
// e(P, Q) = f_{q,P}(phi(Q))^((p^2 - 1)/q) with phi(x, y) = (-x, i*y). phi(Q) has
// an F_p x-coordinate, so vertical-line denominators land in F_p and vanish
// under the final exponentiation; the Miller loop only evaluates numerators.

#include "backend.hpp"
#include "medexchain/digest.hpp"

namespace medexchain::group::detail {

namespace {

struct Jacobian {
  mpz_class x, y, z;  // z == 0 encodes the point at infinity
};

class TypeABackend final : public Backend {
 public:
  explicit TypeABackend(const GroupProfile& prof)
      : p_(prof.field_prime), q_(prof.order), width_(prof.coordinate_bytes) {
    if (p_ % 4 != 3) throw Error(Errc::invalid_element, "field prime must be 3 mod 4");
    mpz_class n = p_ + 1;
    if (n % q_ != 0) throw Error(Errc::invalid_element, "q does not divide p + 1");
    cofactor_ = n / q_;
    sqrt_exp_ = (p_ + 1) / 4;
  }

  // ---- G1 ----

  Point g1_identity() const override { return {}; }

  Point g1_mul(const Point& a, const Point& b) const override { return affine_add(a, b); }

  Point g1_inv(const Point& a) const override {
    if (a.infinity) return a;
    return affine(a.x, mod(-a.y));
  }

  Point g1_exp(const Point& a, const mpz_class& k) const override {
    mpz_class e = k % q_;
    if (e < 0) e += q_;
    return scalar_mul(a, e);
  }

  bool g1_eq(const Point& a, const Point& b) const override {
    if (a.infinity || b.infinity) return a.infinity == b.infinity;
    return a.x == b.x && a.y == b.y;
  }

  bool g1_on_curve(const Point& a) const override {
    if (a.infinity) return true;
    if (a.x < 0 || a.x >= p_ || a.y < 0 || a.y >= p_) return false;
    return mod(a.y * a.y) == curve_rhs(a.x);
  }

  // ---- GT ----

  Fp2 gt_identity() const override { return {1, 0}; }
  Fp2 gt_mul(const Fp2& a, const Fp2& b) const override { return fp2_mul(a, b); }

  // Elements of the order-q subgroup of F_{p^2}^* have norm 1, so the inverse is
  // the conjugate.
  Fp2 gt_inv(const Fp2& a) const override { return {a.re, mod(-a.im)}; }

  Fp2 gt_exp(const Fp2& a, const mpz_class& k) const override {
    mpz_class e = k % q_;
    if (e < 0) e += q_;
    return fp2_pow(a, e);
  }

  bool gt_eq(const Fp2& a, const Fp2& b) const override { return a.re == b.re && a.im == b.im; }

  bool gt_valid(const Fp2& a) const override {
    if (a.re < 0 || a.re >= p_ || a.im < 0 || a.im >= p_) return false;
    if (mod(a.re * a.re + a.im * a.im) != 1) return false;
    Fp2 t = fp2_pow(a, q_);
    return t.re == 1 && t.im == 0;
  }

  // ---- pairing ----

  Fp2 pair(const Point& a, const Point& b) const override {
    if (a.infinity || b.infinity) return {1, 0};
    return final_exponentiation(miller_loop(a, b));
  }

  Point hash_to_g1(ByteView data) const override {
    for (std::uint32_t ctr = 0;; ++ctr) {
      Bytes input(data.begin(), data.end());
      append_u32_be(input, ctr);
      mpz_class x = decode_fixed(shake256(input, width_ + 16)) % p_;
      mpz_class rhs = curve_rhs(x);
      mpz_class y;
      mpz_powm(y.get_mpz_t(), rhs.get_mpz_t(), sqrt_exp_.get_mpz_t(), p_.get_mpz_t());
      if (mod(y * y) != rhs) continue;
      if (mpz_odd_p(y.get_mpz_t())) y = p_ - y;
      Point h = scalar_mul(affine(x, y), cofactor_);
      if (!h.infinity) return h;
    }
  }

  // ---- encodings ----

  Bytes encode_g1(const Point& a) const override {
    if (a.infinity) return Bytes(2 * width_, 0);
    Bytes out = encode_fixed(a.x, width_);
    append(out, encode_fixed(a.y, width_));
    return out;
  }

  Point decode_g1(ByteView data) const override {
    if (data.size() != 2 * width_) throw Error(Errc::malformed_encoding, "G1 encoding width");
    mpz_class x = decode_fixed(data.first(width_));
    mpz_class y = decode_fixed(data.subspan(width_));
    // (0, 0) is a 2-torsion point, never in the order-q subgroup; it encodes O.
    if (x == 0 && y == 0) return {};
    Point pt = affine(x, y);
    if (x >= p_ || y >= p_ || !g1_on_curve(pt)) {
      throw Error(Errc::invalid_element, "point not on curve");
    }
    if (!scalar_mul(pt, q_).infinity) {
      throw Error(Errc::invalid_element, "point outside order-q subgroup");
    }
    return pt;
  }

  Bytes encode_gt(const Fp2& a) const override {
    Bytes out = encode_fixed(a.re, width_);
    append(out, encode_fixed(a.im, width_));
    return out;
  }

  Fp2 decode_gt(ByteView data) const override {
    if (data.size() != 2 * width_) throw Error(Errc::malformed_encoding, "GT encoding width");
    Fp2 v{decode_fixed(data.first(width_)), decode_fixed(data.subspan(width_))};
    if (!gt_valid(v)) throw Error(Errc::invalid_element, "not an order-q GT element");
    return v;
  }

 private:
  mpz_class mod(const mpz_class& v) const {
    mpz_class r;
    mpz_mod(r.get_mpz_t(), v.get_mpz_t(), p_.get_mpz_t());
    return r;
  }

  mpz_class inv(const mpz_class& v) const {
    mpz_class r;
    if (mpz_invert(r.get_mpz_t(), v.get_mpz_t(), p_.get_mpz_t()) == 0) {
      throw Error(Errc::internal_consistency, "non-invertible field element");
    }
    return r;
  }

  mpz_class curve_rhs(const mpz_class& x) const { return mod(mod(x * x) * x + x); }

  static Point affine(mpz_class x, mpz_class y) {
    Point p;
    p.x = std::move(x);
    p.y = std::move(y);
    p.infinity = false;
    return p;
  }

  Point affine_double(const Point& a) const {
    if (a.infinity || a.y == 0) return {};
    mpz_class lambda = mod((3 * mod(a.x * a.x) + 1) * inv(2 * a.y));
    mpz_class x3 = mod(lambda * lambda - 2 * a.x);
    mpz_class y3 = mod(lambda * (a.x - x3) - a.y);
    return affine(std::move(x3), std::move(y3));
  }

  Point affine_add(const Point& a, const Point& b) const {
    if (a.infinity) return b;
    if (b.infinity) return a;
    if (a.x == b.x) {
      if (a.y == b.y) return affine_double(a);
      return {};
    }
    mpz_class lambda = mod((b.y - a.y) * inv(b.x - a.x));
    mpz_class x3 = mod(lambda * lambda - a.x - b.x);
    mpz_class y3 = mod(lambda * (a.x - x3) - a.y);
    return affine(std::move(x3), std::move(y3));
  }

  // Jacobian arithmetic for scalar multiplication; a = 1 on this curve.
  Jacobian jac_double(const Jacobian& a) const {
    if (a.z == 0 || a.y == 0) return {0, 1, 0};
    mpz_class xx = mod(a.x * a.x);
    mpz_class yy = mod(a.y * a.y);
    mpz_class yyyy = mod(yy * yy);
    mpz_class zz = mod(a.z * a.z);
    mpz_class s = mod(4 * a.x * yy);
    mpz_class m = mod(3 * xx + zz * zz);
    Jacobian r;
    r.x = mod(m * m - 2 * s);
    r.y = mod(m * (s - r.x) - 8 * yyyy);
    r.z = mod(2 * a.y * a.z);
    return r;
  }

  // a + b where b is affine (z = 1).
  Jacobian jac_add_mixed(const Jacobian& a, const Point& b) const {
    if (b.infinity) return a;
    if (a.z == 0) return {b.x, b.y, 1};
    mpz_class z1z1 = mod(a.z * a.z);
    mpz_class u2 = mod(b.x * z1z1);
    mpz_class s2 = mod(b.y * a.z * z1z1);
    mpz_class h = mod(u2 - a.x);
    mpz_class r = mod(s2 - a.y);
    if (h == 0) {
      if (r == 0) return jac_double(a);
      return {0, 1, 0};
    }
    mpz_class hh = mod(h * h);
    mpz_class hhh = mod(hh * h);
    mpz_class v = mod(a.x * hh);
    Jacobian out;
    out.x = mod(r * r - hhh - 2 * v);
    out.y = mod(r * (v - out.x) - a.y * hhh);
    out.z = mod(a.z * h);
    return out;
  }

  Point to_affine(const Jacobian& j) const {
    if (j.z == 0) return {};
    mpz_class zi = inv(j.z);
    mpz_class zi2 = mod(zi * zi);
    return affine(mod(j.x * zi2), mod(j.y * zi2 * zi));
  }

  Point scalar_mul(const Point& a, const mpz_class& k) const {
    if (a.infinity || k == 0) return {};
    Jacobian acc{0, 1, 0};
    const auto bits = mpz_sizeinbase(k.get_mpz_t(), 2);
    for (auto i = static_cast<long>(bits) - 1; i >= 0; --i) {
      acc = jac_double(acc);
      if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = jac_add_mixed(acc, a);
    }
    return to_affine(acc);
  }

  // ---- F_{p^2} ----

  Fp2 fp2_mul(const Fp2& a, const Fp2& b) const {
    mpz_class ac = a.re * b.re;
    mpz_class bd = a.im * b.im;
    mpz_class cross = (a.re + a.im) * (b.re + b.im);
    return {mod(ac - bd), mod(cross - ac - bd)};
  }

  Fp2 fp2_sqr(const Fp2& a) const {
    return {mod((a.re + a.im) * (a.re - a.im)), mod(2 * a.re * a.im)};
  }

  Fp2 fp2_inv(const Fp2& a) const {
    mpz_class n = inv(mod(a.re * a.re + a.im * a.im));
    return {mod(a.re * n), mod(-a.im * n)};
  }

  Fp2 fp2_pow(const Fp2& a, const mpz_class& e) const {
    Fp2 acc{1, 0};
    const auto bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    if (e == 0) return acc;
    for (auto i = static_cast<long>(bits) - 1; i >= 0; --i) {
      acc = fp2_sqr(acc);
      if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = fp2_mul(acc, a);
    }
    return acc;
  }

  // Line through T with slope lambda, evaluated at phi(Q) = (-xQ, i*yQ).
  Fp2 line_at(const mpz_class& lambda, const Point& t, const Point& q) const {
    return {mod(lambda * (q.x + t.x) - t.y), q.y};
  }

  Fp2 miller_loop(const Point& p, const Point& q) const {
    Fp2 f{1, 0};
    Point t = p;
    const auto bits = mpz_sizeinbase(q_.get_mpz_t(), 2);
    for (auto i = static_cast<long>(bits) - 2; i >= 0; --i) {
      // Doubling step. T never has y = 0 because q is odd.
      mpz_class lambda = mod((3 * mod(t.x * t.x) + 1) * inv(2 * t.y));
      f = fp2_mul(fp2_sqr(f), line_at(lambda, t, q));
      mpz_class x3 = mod(lambda * lambda - 2 * t.x);
      mpz_class y3 = mod(lambda * (t.x - x3) - t.y);
      t = affine(std::move(x3), std::move(y3));

      if (mpz_tstbit(q_.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
        if (t.x == p.x) {
          // T = -P: vertical line, eliminated by the final exponentiation.
          t = {};
          continue;
        }
        lambda = mod((p.y - t.y) * inv(p.x - t.x));
        f = fp2_mul(f, line_at(lambda, t, q));
        x3 = mod(lambda * lambda - t.x - p.x);
        y3 = mod(lambda * (t.x - x3) - t.y);
        t = affine(std::move(x3), std::move(y3));
      }
    }
    return f;
  }

  Fp2 final_exponentiation(const Fp2& f) const {
    // f^(p-1) = conj(f) / f, then raise to h = (p + 1) / q.
    Fp2 conj{f.re, mod(-f.im)};
    Fp2 g = fp2_mul(conj, fp2_inv(f));
    return fp2_pow(g, cofactor_);
  }

  mpz_class p_;
  mpz_class q_;
  mpz_class cofactor_;
  mpz_class sqrt_exp_;
  std::size_t width_;
};

}  // namespace

std::unique_ptr<Backend> make_type_a_backend(const GroupProfile& profile) {
  return std::make_unique<TypeABackend>(profile);
}

}  // namespace medexchain::group::detail
