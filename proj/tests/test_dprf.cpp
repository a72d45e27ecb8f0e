#include "avss/dprf.hpp"
#include "doctest.h"

using namespace avss::dprf;

namespace {

DprfInput input_of(std::uint8_t seed, std::uint16_t comp, std::uint32_t idx) {
  DprfInput x;
  x.nonce.fill(seed);
  x.component = comp;
  x.index = idx;
  return x;
}

}  // namespace

TEST_CASE("input serialization layout") {
  DprfInput x = input_of(0xab, 1, 0x01020304);
  auto b = x.to_bytes();
  CHECK(b.size() == 23);
  CHECK(b[0] == 0x01);
  for (int i = 1; i <= 16; ++i) CHECK(b[i] == 0xab);
  CHECK(b[17] == 0);
  CHECK(b[18] == 1);
  CHECK(b[19] == 0x01);
  CHECK(b[22] == 0x04);
}

TEST_CASE("key generation shapes and consistency") {
  Entropy rng(1);
  // k = n = 1: the single share is alpha itself.
  Fr alpha;
  DprfKeys k1 = dprf_init(1, 1, rng, &alpha);
  CHECK(k1.sks[0].alpha_i == alpha);
  CHECK(k1.pk.g_alpha == k1.pk.g.mul(alpha.to_limbs()));

  // k=2, n=4: any 2 shares interpolate to the same alpha.
  DprfKeys k2 = dprf_init(2, 4, rng, &alpha);
  CHECK(k2.pk.g_alpha_i.size() == 4);
  for (std::uint32_t i = 0; i < 4; ++i)
    CHECK(k2.pk.g_alpha_i[i] == k2.pk.g.mul(k2.sks[i].alpha_i.to_limbs()));
  for (std::uint32_t a = 1; a <= 4; ++a)
    for (std::uint32_t b = a + 1; b <= 4; ++b) {
      Polynomial p = lagrange_interpolate(
          {{Fr::from_u64(a), k2.sks[a - 1].alpha_i},
           {Fr::from_u64(b), k2.sks[b - 1].alpha_i}});
      CHECK(p.eval(Fr::zero()) == alpha);
    }
  CHECK_THROWS(dprf_init(5, 4, rng));
}

TEST_CASE("contributions verify and match direct exponentiation") {
  Entropy rng(2);
  DprfKeys keys = dprf_init(2, 4, rng);
  DprfInput x = input_of(3, 0, 2);
  for (std::uint32_t i = 1; i <= 4; ++i) {
    DprfContribution c = dprf_contrib(keys.sks[i - 1], x, keys.pk, rng);
    CHECK(dprf_verify(keys.pk, i, x, c));
    CHECK(c.delta == dprf_hash_input(x).mul(keys.sks[i - 1].alpha_i.to_limbs()));
    // Fresh proof randomness: same x twice shares delta, differs in (c, z).
    DprfContribution c2 = dprf_contrib(keys.sks[i - 1], x, keys.pk, rng);
    CHECK(c2.delta == c.delta);
    CHECK(c2.c != c.c);
    // Wire round trip.
    auto back = DprfContribution::from_bytes(c.to_bytes());
    REQUIRE(back);
    CHECK(back->delta == c.delta);
    CHECK(back->c == c.c);
    CHECK(back->z == c.z);
  }
}

TEST_CASE("verification soundness") {
  Entropy rng(3);
  DprfKeys keys = dprf_init(2, 4, rng);
  DprfInput x = input_of(5, 0, 1);
  DprfContribution good = dprf_contrib(keys.sks[0], x, keys.pk, rng);

  DprfContribution bad = good;
  bad.z += Fr::one();
  CHECK(!dprf_verify(keys.pk, 1, x, bad));

  // Another key's honest value presented under index 1.
  for (int trial = 0; trial < 100; ++trial) {
    std::uint32_t j = 2 + trial % 3;
    DprfContribution other = dprf_contrib(keys.sks[j - 1], x, keys.pk, rng);
    CHECK(!dprf_verify(keys.pk, 1, x, other));
  }

  // 10^3 random forgeries all rejected.
  int rejected = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    DprfContribution f{keys.pk.g.mul(rng.scalar().to_limbs()), rng.scalar(),
                       rng.scalar()};
    if (!dprf_verify(keys.pk, 1, x, f)) ++rejected;
  }
  CHECK(rejected == 1000);
}

TEST_CASE("threshold evaluation") {
  Entropy rng(4);
  Fr alpha;
  DprfKeys keys = dprf_init(2, 4, rng, &alpha);
  DprfInput x = input_of(7, 1, 3);

  std::map<std::uint32_t, DprfContribution> all;
  for (std::uint32_t i = 1; i <= 4; ++i)
    all[i] = dprf_contrib(keys.sks[i - 1], x, keys.pk, rng);

  // Below threshold.
  std::map<std::uint32_t, DprfContribution> one{{2, all[2]}};
  CHECK(!dprf_eval(x, one, keys.pk, 2));

  // Every 2-subset agrees and equals the direct alpha computation.
  Fr expect = dprf_output_hash(dprf_hash_input(x).mul(alpha.to_limbs()));
  for (std::uint32_t a = 1; a <= 4; ++a)
    for (std::uint32_t b = a + 1; b <= 4; ++b) {
      std::map<std::uint32_t, DprfContribution> sub{{a, all[a]}, {b, all[b]}};
      auto y = dprf_eval(x, sub, keys.pk, 2);
      REQUIRE(y);
      CHECK(*y == expect);
    }

  // A failing contribution in the selected set poisons eval.
  std::map<std::uint32_t, DprfContribution> tainted{{1, all[1]}, {2, all[2]}};
  tainted[1].z += Fr::one();
  CHECK(!dprf_eval(x, tainted, keys.pk, 2));
}

TEST_CASE("domain separation across nonce, component, and index") {
  Entropy rng(5);
  Fr alpha;
  DprfKeys keys = dprf_init(2, 4, rng, &alpha);
  std::vector<std::array<std::uint8_t, 32>> outs;
  for (int v = 0; v < 10; ++v)
    for (std::uint16_t comp = 0; comp < 2; ++comp)
      for (std::uint32_t idx = 1; idx <= 50; ++idx) {
        DprfInput x = input_of((std::uint8_t)v, comp, idx);
        Fr y = dprf_output_hash(dprf_hash_input(x).mul(alpha.to_limbs()));
        std::array<std::uint8_t, 32> enc;
        y.to_bytes(enc);
        outs.push_back(enc);
      }
  std::sort(outs.begin(), outs.end());
  CHECK(std::adjacent_find(outs.begin(), outs.end()) == outs.end());
}
