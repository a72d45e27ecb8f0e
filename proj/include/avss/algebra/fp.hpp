#pragma once

#include <cassert>
#include <optional>

#include "avss/algebra/limbs.hpp"

namespace avss::algebra {

// Montgomery constants for a 256-bit-or-less odd prime modulus.
struct MontConstants {
  Limbs modulus;
  Limbs r;        // 2^256 mod p
  Limbs r2;       // 2^512 mod p
  Limbs p_minus_2;
  std::uint64_t inv64;  // -p^{-1} mod 2^64
};

MontConstants compute_mont_constants(const Limbs& modulus);

// Prime-field element in Montgomery form. Tag supplies the modulus so the
// base field and the scalar field are distinct types.
template <typename Tag>
class PrimeField {
 public:
  static const MontConstants& constants() {
    static const MontConstants c = compute_mont_constants(Tag::modulus());
    return c;
  }

  constexpr PrimeField() : v_{} {}

  static PrimeField zero() { return PrimeField(); }
  static PrimeField one() {
    PrimeField x;
    x.v_ = constants().r;
    return x;
  }
  static PrimeField from_u64(std::uint64_t n) {
    PrimeField x;
    x.v_ = mont_mul(Limbs{n, 0, 0, 0}, constants().r2);
    return x;
  }
  // Value must already be canonical (< p).
  static PrimeField from_limbs(const Limbs& canonical) {
    assert(limb_cmp(canonical, constants().modulus) < 0);
    PrimeField x;
    x.v_ = mont_mul(canonical, constants().r2);
    return x;
  }
  Limbs to_limbs() const { return mont_mul(v_, Limbs{1, 0, 0, 0}); }

  bool is_zero() const { return limb_is_zero(v_); }
  bool operator==(const PrimeField& o) const { return v_ == o.v_; }
  bool operator!=(const PrimeField& o) const { return v_ != o.v_; }

  PrimeField operator+(const PrimeField& o) const {
    PrimeField r;
    std::uint64_t carry = limb_add(r.v_, v_, o.v_);
    if (carry || limb_cmp(r.v_, constants().modulus) >= 0) {
      Limbs t;
      limb_sub(t, r.v_, constants().modulus);
      r.v_ = t;
    }
    return r;
  }
  PrimeField operator-(const PrimeField& o) const {
    PrimeField r;
    if (limb_sub(r.v_, v_, o.v_)) {
      Limbs t;
      limb_add(t, r.v_, constants().modulus);
      r.v_ = t;
    }
    return r;
  }
  PrimeField operator-() const { return zero() - *this; }
  PrimeField operator*(const PrimeField& o) const {
    PrimeField r;
    r.v_ = mont_mul(v_, o.v_);
    return r;
  }
  PrimeField& operator+=(const PrimeField& o) { return *this = *this + o; }
  PrimeField& operator-=(const PrimeField& o) { return *this = *this - o; }
  PrimeField& operator*=(const PrimeField& o) { return *this = *this * o; }

  PrimeField squared() const { return *this * *this; }
  PrimeField dbl() const { return *this + *this; }

  PrimeField pow(const Limbs& e) const {
    PrimeField acc = one();
    int bits = limb_bit_length(e);
    for (int i = bits - 1; i >= 0; --i) {
      acc = acc.squared();
      if (limb_test_bit(e, i)) acc = acc * *this;
    }
    return acc;
  }

  // Fermat inversion; inverse of zero is zero.
  PrimeField inverse() const { return pow(constants().p_minus_2); }

  // Square root for p = 3 mod 4; nullopt if no root exists.
  std::optional<PrimeField> sqrt() const {
    Limbs e = constants().modulus;  // (p + 1) / 4
    unsigned __int128 c = 1;
    for (int i = 0; i < 4; ++i) {
      c += e[i];
      e[i] = (std::uint64_t)c;
      c >>= 64;
    }
    for (int i = 0; i < 4; ++i) {
      std::uint64_t next = (i < 3) ? e[i + 1] : 0;
      e[i] = (e[i] >> 2) | (next << 62);
    }
    PrimeField root = pow(e);
    if (root.squared() == *this) return root;
    return std::nullopt;
  }

  void to_bytes(std::span<std::uint8_t, 32> out) const {
    limbs_to_be_bytes(to_limbs(), out);
  }
  // Rejects non-canonical encodings.
  static std::optional<PrimeField> from_bytes(std::span<const std::uint8_t, 32> in) {
    Limbs a = limbs_from_be_bytes(in);
    if (limb_cmp(a, constants().modulus) >= 0) return std::nullopt;
    return from_limbs(a);
  }

  // Canonical value interpreted as an integer, reduced oddness test.
  bool is_odd() const { return to_limbs()[0] & 1; }

 private:
  static Limbs mont_mul(const Limbs& a, const Limbs& b) {
    const MontConstants& c = constants();
    std::uint64_t t[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 4; ++i) {
      // t += a[i] * b
      unsigned __int128 carry = 0;
      for (int j = 0; j < 4; ++j) {
        carry += (unsigned __int128)a[i] * b[j] + t[j];
        t[j] = (std::uint64_t)carry;
        carry >>= 64;
      }
      std::uint64_t hi = t[4] + (std::uint64_t)carry;
      // t = (t + m * p) / 2^64
      std::uint64_t m = t[0] * c.inv64;
      carry = (unsigned __int128)m * c.modulus[0] + t[0];
      carry >>= 64;
      for (int j = 1; j < 4; ++j) {
        carry += (unsigned __int128)m * c.modulus[j] + t[j];
        t[j - 1] = (std::uint64_t)carry;
        carry >>= 64;
      }
      carry += hi;
      t[3] = (std::uint64_t)carry;
      t[4] = (std::uint64_t)(carry >> 64);
    }
    Limbs r{t[0], t[1], t[2], t[3]};
    if (t[4] || limb_cmp(r, c.modulus) >= 0) {
      Limbs s;
      limb_sub(s, r, c.modulus);
      r = s;
    }
    return r;
  }

  Limbs v_;
};

struct FpTag {
  // BN254 base field prime.
  static constexpr Limbs modulus() {
    return Limbs{0x3c208c16d87cfd47ull, 0x97816a916871ca8dull,
                 0xb85045b68181585dull, 0x30644e72e131a029ull};
  }
};

struct FrTag {
  // BN254 group order.
  static constexpr Limbs modulus() {
    return Limbs{0x43e1f593f0000001ull, 0x2833e84879b97091ull,
                 0xb85045b68181585dull, 0x30644e72e131a029ull};
  }
};

using Fp = PrimeField<FpTag>;
using Fr = PrimeField<FrTag>;

}  // namespace avss::algebra
