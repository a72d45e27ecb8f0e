#pragma once

#include "avss/algebra/fp.hpp"

namespace avss::algebra {

// Fp2 = Fp[u] / (u^2 + 1)
struct Fp2 {
  Fp c0, c1;

  static Fp2 zero() { return {Fp::zero(), Fp::zero()}; }
  static Fp2 one() { return {Fp::one(), Fp::zero()}; }
  // The sextic-twist non-residue xi = 9 + u.
  static Fp2 xi() { return {Fp::from_u64(9), Fp::one()}; }

  bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
  bool operator==(const Fp2& o) const { return c0 == o.c0 && c1 == o.c1; }
  bool operator!=(const Fp2& o) const { return !(*this == o); }

  Fp2 operator+(const Fp2& o) const { return {c0 + o.c0, c1 + o.c1}; }
  Fp2 operator-(const Fp2& o) const { return {c0 - o.c0, c1 - o.c1}; }
  Fp2 operator-() const { return {-c0, -c1}; }

  Fp2 operator*(const Fp2& o) const {
    Fp t0 = c0 * o.c0;
    Fp t1 = c1 * o.c1;
    Fp s = (c0 + c1) * (o.c0 + o.c1);
    return {t0 - t1, s - t0 - t1};
  }
  Fp2 squared() const {
    Fp s = c0 + c1;
    Fp d = c0 - c1;
    Fp t = c0 * c1;
    return {s * d, t + t};
  }
  Fp2 mul_fp(const Fp& s) const { return {c0 * s, c1 * s}; }
  Fp2 dbl() const { return {c0 + c0, c1 + c1}; }

  Fp2 conjugate() const { return {c0, -c1}; }

  Fp2 inverse() const {
    Fp norm = c0 * c0 + c1 * c1;
    Fp ni = norm.inverse();
    return {c0 * ni, -(c1 * ni)};
  }

  Fp2 pow(const Limbs& e) const {
    Fp2 acc = one();
    for (int i = limb_bit_length(e) - 1; i >= 0; --i) {
      acc = acc.squared();
      if (limb_test_bit(e, i)) acc = acc * *this;
    }
    return acc;
  }

  // Exponent given as big-endian sequence of 256-bit chunks.
  Fp2 pow_wide(std::span<const Limbs> chunks) const {
    Fp2 acc = one();
    bool started = false;
    for (const Limbs& e : chunks) {
      for (int i = 255; i >= 0; --i) {
        if (started) acc = acc.squared();
        if (limb_test_bit(e, i)) {
          acc = started ? acc * *this : *this;
          started = true;
        }
      }
    }
    return started ? acc : one();
  }

  // (9 + u) * this
  Fp2 mul_by_xi() const {
    Fp nine_c0 = c0.dbl().dbl().dbl() + c0;
    Fp nine_c1 = c1.dbl().dbl().dbl() + c1;
    return {nine_c0 - c1, nine_c1 + c0};
  }
};

// Fp6 = Fp2[v] / (v^3 - xi)
struct Fp6 {
  Fp2 c0, c1, c2;

  static Fp6 zero() { return {Fp2::zero(), Fp2::zero(), Fp2::zero()}; }
  static Fp6 one() { return {Fp2::one(), Fp2::zero(), Fp2::zero()}; }

  bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
  bool operator==(const Fp6& o) const {
    return c0 == o.c0 && c1 == o.c1 && c2 == o.c2;
  }
  bool operator!=(const Fp6& o) const { return !(*this == o); }

  Fp6 operator+(const Fp6& o) const { return {c0 + o.c0, c1 + o.c1, c2 + o.c2}; }
  Fp6 operator-(const Fp6& o) const { return {c0 - o.c0, c1 - o.c1, c2 - o.c2}; }
  Fp6 operator-() const { return {-c0, -c1, -c2}; }

  Fp6 operator*(const Fp6& o) const {
    Fp2 a0 = c0 * o.c0;
    Fp2 a1 = c1 * o.c1;
    Fp2 a2 = c2 * o.c2;
    Fp2 r0 = a0 + ((c1 + c2) * (o.c1 + o.c2) - a1 - a2).mul_by_xi();
    Fp2 r1 = (c0 + c1) * (o.c0 + o.c1) - a0 - a1 + a2.mul_by_xi();
    Fp2 r2 = (c0 + c2) * (o.c0 + o.c2) - a0 - a2 + a1;
    return {r0, r1, r2};
  }
  Fp6 squared() const { return *this * *this; }
  Fp6 mul_fp2(const Fp2& s) const { return {c0 * s, c1 * s, c2 * s}; }

  // v * this
  Fp6 mul_by_v() const { return {c2.mul_by_xi(), c0, c1}; }

  Fp6 inverse() const {
    Fp2 a = c0.squared() - (c1 * c2).mul_by_xi();
    Fp2 b = c2.squared().mul_by_xi() - c0 * c1;
    Fp2 c = c1.squared() - c0 * c2;
    Fp2 t = (c2 * b + c1 * c).mul_by_xi() + c0 * a;
    Fp2 ti = t.inverse();
    return {a * ti, b * ti, c * ti};
  }
};

// Fp12 = Fp6[w] / (w^2 - v)
struct Fp12 {
  Fp6 c0, c1;

  static Fp12 zero() { return {Fp6::zero(), Fp6::zero()}; }
  static Fp12 one() { return {Fp6::one(), Fp6::zero()}; }

  bool is_one() const { return c0 == Fp6::one() && c1.is_zero(); }
  bool operator==(const Fp12& o) const { return c0 == o.c0 && c1 == o.c1; }
  bool operator!=(const Fp12& o) const { return !(*this == o); }

  Fp12 operator*(const Fp12& o) const {
    Fp6 a0 = c0 * o.c0;
    Fp6 a1 = c1 * o.c1;
    Fp6 r1 = (c0 + c1) * (o.c0 + o.c1) - a0 - a1;
    return {a0 + a1.mul_by_v(), r1};
  }
  Fp12 squared() const {
    Fp6 a = c0 * c1;
    Fp6 t = (c0 + c1) * (c0 + c1.mul_by_v()) - a - a.mul_by_v();
    return {t, a + a};
  }

  // Conjugation over Fp6 = exponentiation by p^6.
  Fp12 conjugate() const { return {c0, -c1}; }

  Fp12 inverse() const {
    Fp6 t = (c0.squared() - c1.squared().mul_by_v()).inverse();
    return {c0 * t, -(c1 * t)};
  }

  Fp12 pow(const Limbs& e) const {
    Fp12 acc = one();
    for (int i = limb_bit_length(e) - 1; i >= 0; --i) {
      acc = acc.squared();
      if (limb_test_bit(e, i)) acc = acc * *this;
    }
    return acc;
  }
};

}  // namespace avss::algebra
