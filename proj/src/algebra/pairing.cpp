#include <gmp.h>

#include <array>

#include "avss/algebra/curve.hpp"

namespace avss::algebra {
namespace {

void mpz_from_limbs(mpz_t out, const Limbs& a) {
  mpz_import(out, 4, -1, 8, 0, 0, a.data());
}

Limbs limbs_from_mpz(const mpz_t a) {
  Limbs out{};
  size_t count = 0;
  mpz_export(out.data(), &count, -1, 8, 0, 0, a);
  return out;
}

// 6x + 2 for the BN parameter x = 4965661367192848881 (65 bits).
constexpr unsigned __int128 kAteLoop =
    (unsigned __int128)6 * 4965661367192848881ull + 2;

struct PairingCtx {
  // Frobenius action on the w^1 v^j basis slots: w^p = w * g1, v^p = v * g2
  // with g1 = xi^((p-1)/6), g2 = g1^2.
  Fp2 g1, g2, g2sq, g1g2, g1g2sq;
  // Base-p digits of (p^4 - p^2 + 1)/r, least significant first.
  std::array<Limbs, 4> hard_digits;

  PairingCtx() {
    mpz_t p, e, d, r, rem;
    mpz_inits(p, e, d, r, rem, nullptr);
    mpz_from_limbs(p, FpTag::modulus());
    mpz_from_limbs(r, FrTag::modulus());

    // (p - 1) / 6
    mpz_sub_ui(e, p, 1);
    mpz_divexact_ui(e, e, 6);
    g1 = Fp2::xi().pow(limbs_from_mpz(e));
    g2 = g1.squared();
    g2sq = g2.squared();
    g1g2 = g1 * g2;
    g1g2sq = g1 * g2sq;

    // (p^4 - p^2 + 1) / r, then base-p digits.
    mpz_pow_ui(d, p, 4);
    mpz_pow_ui(e, p, 2);
    mpz_sub(d, d, e);
    mpz_add_ui(d, d, 1);
    mpz_divexact(d, d, r);
    for (auto& digit : hard_digits) {
      mpz_tdiv_qr(d, rem, d, p);
      digit = limbs_from_mpz(rem);
    }
    mpz_clears(p, e, d, r, rem, nullptr);
  }
};

const PairingCtx& ctx() {
  static const PairingCtx c;
  return c;
}

Fp12 frobenius(const Fp12& f) {
  const PairingCtx& c = ctx();
  return {{f.c0.c0.conjugate(),
           f.c0.c1.conjugate() * c.g2,
           f.c0.c2.conjugate() * c.g2sq},
          {f.c1.c0.conjugate() * c.g1,
           f.c1.c1.conjugate() * c.g1g2,
           f.c1.c2.conjugate() * c.g1g2sq}};
}

// Line through T and R (tangent when T == R) on the twist, evaluated at the
// untwisted image of p. With untwisting (x, y) -> (x w^2, y w^3) and twist
// slope lam, the line value is y_p - lam x_p w + (lam x_t - y_t) w^3.
// Sparse slots: Fp at c0.c0, Fp2 at c1.c0 and c1.c1 (w^3 = v w).
struct LineEval {
  Fp a;
  Fp2 b, c;
  Fp12 full() const {
    Fp12 f = Fp12::zero();
    f.c0.c0 = {a, Fp::zero()};
    f.c1.c0 = b;
    f.c1.c1 = c;
    return f;
  }
};

struct TwistPoint {
  Fp2 x, y;
};

LineEval line_double(TwistPoint& t, const Fp& xp, const Fp& yp) {
  Fp2 lam = t.x.squared().mul_fp(Fp::from_u64(3)) * t.y.dbl().inverse();
  Fp2 x3 = lam.squared() - t.x.dbl();
  Fp2 y3 = lam * (t.x - x3) - t.y;
  LineEval l{yp, -(lam.mul_fp(xp)), lam * t.x - t.y};
  t = {x3, y3};
  return l;
}

LineEval line_add(TwistPoint& t, const TwistPoint& q, const Fp& xp, const Fp& yp) {
  Fp2 lam = (q.y - t.y) * (q.x - t.x).inverse();
  Fp2 x3 = lam.squared() - t.x - q.x;
  Fp2 y3 = lam * (t.x - x3) - t.y;
  LineEval l{yp, -(lam.mul_fp(xp)), lam * t.x - t.y};
  t = {x3, y3};
  return l;
}

// Frobenius endomorphism mapped back through the twist.
TwistPoint twist_frobenius(const TwistPoint& q) {
  const PairingCtx& c = ctx();
  return {q.x.conjugate() * c.g1.squared(),
          q.y.conjugate() * c.g1.squared() * c.g1};
}

Fp12 miller_loop_inner(const G1& p, const G2& q) {
  if (p.is_infinity() || q.is_infinity()) return Fp12::one();
  auto [xp, yp] = p.to_affine();
  auto [xq, yq] = q.to_affine();
  TwistPoint qa{xq, yq};
  TwistPoint t = qa;
  Fp12 f = Fp12::one();
  for (int i = 63; i >= 0; --i) {
    f = f.squared() * line_double(t, xp, yp).full();
    if ((kAteLoop >> i) & 1) f = f * line_add(t, qa, xp, yp).full();
  }
  TwistPoint q1 = twist_frobenius(qa);
  TwistPoint q2 = twist_frobenius(q1);
  q2.y = -q2.y;
  f = f * line_add(t, q1, xp, yp).full();
  f = f * line_add(t, q2, xp, yp).full();
  return f;
}

}  // namespace

std::pair<Fp2, Fp2> G2Tag::generator_affine() {
  auto fp_from_dec = [](const char* s) {
    mpz_t z;
    mpz_init_set_str(z, s, 10);
    Fp v = Fp::from_limbs(limbs_from_mpz(z));
    mpz_clear(z);
    return v;
  };
  static const std::pair<Fp2, Fp2> g = {
      {fp_from_dec("10857046999023057135944570762232829481370756359578518"
                   "086990519993285655852781"),
       fp_from_dec("11559732032986387107991004021392285783925812861821192"
                   "530917403151452391805634")},
      {fp_from_dec("84956539231234314176049732474892724384181905872636001"
                   "48770280649306958101930"),
       fp_from_dec("40823678758634336813322034031454355683168513275934012"
                   "08105741076214120093531")}};
  return g;
}

Fp12 miller_loop(const G1& p, const G2& q) { return miller_loop_inner(p, q); }

Fp12 final_exponentiation(const Fp12& f) {
  // Easy part: f^((p^6 - 1)(p^2 + 1)).
  Fp12 m = f.conjugate() * f.inverse();
  m = frobenius(frobenius(m)) * m;
  // Hard part via base-p digits of (p^4 - p^2 + 1)/r, interleaved 4-way.
  const PairingCtx& c = ctx();
  std::array<Fp12, 4> base;
  base[0] = m;
  for (int i = 1; i < 4; ++i) base[i] = frobenius(base[i - 1]);
  std::array<Fp12, 16> table;
  table[0] = Fp12::one();
  for (int mask = 1; mask < 16; ++mask)
    table[mask] = table[mask & (mask - 1)] * base[__builtin_ctz(mask)];
  Fp12 acc = Fp12::one();
  for (int bit = 253; bit >= 0; --bit) {
    acc = acc.squared();
    int idx = 0;
    for (int i = 0; i < 4; ++i)
      if (limb_test_bit(c.hard_digits[i], bit)) idx |= 1 << i;
    if (idx) acc = acc * table[idx];
  }
  return acc;
}

Fp12 pairing(const G1& p, const G2& q) {
  return final_exponentiation(miller_loop(p, q));
}

Fp12 pairing_product(std::span<const std::pair<G1, G2>> pairs) {
  Fp12 f = Fp12::one();
  for (const auto& [p, q] : pairs) f = f * miller_loop(p, q);
  return final_exponentiation(f);
}

}  // namespace avss::algebra
