#pragma once

#include <memory>

#include "medexchain/group.hpp"

namespace medexchain::group::detail {

// Raw arithmetic. No counters, no profile checks; Group wraps both.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual Point g1_identity() const = 0;
  virtual Point g1_mul(const Point& a, const Point& b) const = 0;
  virtual Point g1_inv(const Point& a) const = 0;
  virtual Point g1_exp(const Point& a, const mpz_class& k) const = 0;
  virtual bool g1_eq(const Point& a, const Point& b) const = 0;
  virtual bool g1_on_curve(const Point& a) const = 0;

  virtual Fp2 gt_identity() const = 0;
  virtual Fp2 gt_mul(const Fp2& a, const Fp2& b) const = 0;
  virtual Fp2 gt_inv(const Fp2& a) const = 0;
  virtual Fp2 gt_exp(const Fp2& a, const mpz_class& k) const = 0;
  virtual bool gt_eq(const Fp2& a, const Fp2& b) const = 0;
  virtual bool gt_valid(const Fp2& a) const = 0;

  virtual Fp2 pair(const Point& a, const Point& b) const = 0;
  virtual Point hash_to_g1(ByteView data) const = 0;

  virtual Bytes encode_g1(const Point& a) const = 0;
  virtual Point decode_g1(ByteView data) const = 0;
  virtual Bytes encode_gt(const Fp2& a) const = 0;
  virtual Fp2 decode_gt(ByteView data) const = 0;
};

std::unique_ptr<Backend> make_transparent_backend(const GroupProfile& profile);
std::unique_ptr<Backend> make_type_a_backend(const GroupProfile& profile);

// Big-endian fixed-width integer codec shared by both backends.
Bytes encode_fixed(const mpz_class& v, std::size_t width);
mpz_class decode_fixed(ByteView data);

}  // namespace medexchain::group::detail
