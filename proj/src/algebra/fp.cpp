#include "avss/algebra/fp.hpp"

namespace avss::algebra {

MontConstants compute_mont_constants(const Limbs& modulus) {
  MontConstants c;
  c.modulus = modulus;

  // r = 2^256 mod p by doubling 1 mod p 256 times.
  Limbs acc{1, 0, 0, 0};
  auto dbl_mod = [&modulus](Limbs& x) {
    Limbs t;
    std::uint64_t carry = limb_add(t, x, x);
    if (carry || limb_cmp(t, modulus) >= 0) {
      Limbs s;
      limb_sub(s, t, modulus);
      t = s;
    }
    x = t;
  };
  for (int i = 0; i < 256; ++i) dbl_mod(acc);
  c.r = acc;
  for (int i = 0; i < 256; ++i) dbl_mod(acc);
  c.r2 = acc;

  limb_sub(c.p_minus_2, modulus, Limbs{2, 0, 0, 0});

  // Newton iteration for p^{-1} mod 2^64.
  std::uint64_t inv = 1;
  for (int i = 0; i < 6; ++i) inv *= 2 - modulus[0] * inv;
  c.inv64 = ~inv + 1;  // negate mod 2^64
  return c;
}

}  // namespace avss::algebra
