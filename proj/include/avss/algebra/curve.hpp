#pragma once

#include <optional>
#include <vector>

#include "avss/algebra/tower.hpp"

namespace avss::algebra {

// Short-Weierstrass point over field F (y^2 = x^3 + b). Jacobian internally,
// affine conversion on demand. Tag supplies b and the generator.
template <typename Tag>
class CurvePoint {
 public:
  using Field = typename Tag::Field;

  CurvePoint() : x_(Field::one()), y_(Field::one()), z_(Field::zero()) {}

  static CurvePoint infinity() { return CurvePoint(); }
  static CurvePoint generator() {
    auto [gx, gy] = Tag::generator_affine();
    return from_affine(gx, gy);
  }
  static CurvePoint from_affine(const Field& x, const Field& y) {
    CurvePoint p;
    p.x_ = x;
    p.y_ = y;
    p.z_ = Field::one();
    return p;
  }

  bool is_infinity() const { return z_.is_zero(); }

  static bool on_curve_affine(const Field& x, const Field& y) {
    return y.squared() == x.squared() * x + Tag::b();
  }

  // (x, y); must not be infinity.
  std::pair<Field, Field> to_affine() const {
    Field zi = z_.inverse();
    Field zi2 = zi.squared();
    return {x_ * zi2, y_ * zi2 * zi};
  }

  bool operator==(const CurvePoint& o) const {
    if (is_infinity() || o.is_infinity()) return is_infinity() == o.is_infinity();
    // Cross-multiplied Jacobian comparison.
    Field z1s = z_.squared();
    Field z2s = o.z_.squared();
    return x_ * z2s == o.x_ * z1s && y_ * z2s * o.z_ == o.y_ * z1s * z_;
  }
  bool operator!=(const CurvePoint& o) const { return !(*this == o); }

  CurvePoint dbl() const {
    if (is_infinity() || y_.is_zero()) return infinity();
    Field a = x_.squared();
    Field b = y_.squared();
    Field c = b.squared();
    Field d = ((x_ + b).squared() - a - c).dbl();
    Field e = a.dbl() + a;
    Field x3 = e.squared() - d.dbl();
    CurvePoint r;
    r.x_ = x3;
    r.y_ = e * (d - x3) - c.dbl().dbl().dbl();
    r.z_ = (y_ * z_).dbl();
    return r;
  }

  CurvePoint operator+(const CurvePoint& o) const {
    if (is_infinity()) return o;
    if (o.is_infinity()) return *this;
    Field z1s = z_.squared();
    Field z2s = o.z_.squared();
    Field u1 = x_ * z2s;
    Field u2 = o.x_ * z1s;
    Field s1 = y_ * z2s * o.z_;
    Field s2 = o.y_ * z1s * z_;
    if (u1 == u2) {
      if (s1 == s2) return dbl();
      return infinity();
    }
    Field h = u2 - u1;
    Field i = h.dbl().squared();
    Field j = h * i;
    Field rr = (s2 - s1).dbl();
    Field v = u1 * i;
    Field x3 = rr.squared() - j - v.dbl();
    CurvePoint r;
    r.x_ = x3;
    r.y_ = rr * (v - x3) - (s1 * j).dbl();
    r.z_ = ((z_ + o.z_).squared() - z1s - z2s) * h;
    return r;
  }
  CurvePoint operator-() const {
    CurvePoint r = *this;
    r.y_ = -r.y_;
    return r;
  }
  CurvePoint operator-(const CurvePoint& o) const { return *this + (-o); }
  CurvePoint& operator+=(const CurvePoint& o) { return *this = *this + o; }

  CurvePoint mul(const Limbs& scalar) const {
    CurvePoint acc = infinity();
    for (int i = limb_bit_length(scalar) - 1; i >= 0; --i) {
      acc = acc.dbl();
      if (limb_test_bit(scalar, i)) acc += *this;
    }
    return acc;
  }

  bool is_in_prime_subgroup() const {
    return is_infinity() || mul(FrTag::modulus()).is_infinity();
  }

 private:
  Field x_, y_, z_;
};

struct G1Tag {
  using Field = Fp;
  static Fp b() { return Fp::from_u64(3); }
  static std::pair<Fp, Fp> generator_affine() {
    return {Fp::one(), Fp::from_u64(2)};
  }
};

struct G2Tag {
  using Field = Fp2;
  // Twist curve y^2 = x^3 + 3/xi.
  static Fp2 b() {
    static const Fp2 v = Fp2::xi().inverse().mul_fp(Fp::from_u64(3));
    return v;
  }
  static std::pair<Fp2, Fp2> generator_affine();
};

using G1 = CurvePoint<G1Tag>;
using G2 = CurvePoint<G2Tag>;

// Optimal ate pairing into Fp12; multiplicative target group.
Fp12 miller_loop(const G1& p, const G2& q);
Fp12 final_exponentiation(const Fp12& f);
Fp12 pairing(const G1& p, const G2& q);
// prod e(p_i, q_i) with a single shared final exponentiation.
Fp12 pairing_product(std::span<const std::pair<G1, G2>> pairs);

}  // namespace avss::algebra
