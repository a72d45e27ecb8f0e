#include <gmp.h>

#include "avss/algebra/entropy.hpp"
#include "avss/algebra/group_io.hpp"
#include "avss/algebra/poly.hpp"
#include "doctest.h"

using namespace avss::algebra;

namespace {

// Reference big-integer arithmetic for cross-checking the field code.
struct MpzOracle {
  mpz_t p;
  explicit MpzOracle(const Limbs& mod) {
    mpz_init(p);
    mpz_import(p, 4, -1, 8, 0, 0, mod.data());
  }
  ~MpzOracle() { mpz_clear(p); }
  Limbs mulmod(const Limbs& a, const Limbs& b) const {
    mpz_t x, y;
    mpz_inits(x, y, nullptr);
    mpz_import(x, 4, -1, 8, 0, 0, a.data());
    mpz_import(y, 4, -1, 8, 0, 0, b.data());
    mpz_mul(x, x, y);
    mpz_mod(x, x, p);
    Limbs out{};
    size_t c = 0;
    mpz_export(out.data(), &c, -1, 8, 0, 0, x);
    mpz_clears(x, y, nullptr);
    return out;
  }
  Limbs addmod(const Limbs& a, const Limbs& b) const {
    mpz_t x, y;
    mpz_inits(x, y, nullptr);
    mpz_import(x, 4, -1, 8, 0, 0, a.data());
    mpz_import(y, 4, -1, 8, 0, 0, b.data());
    mpz_add(x, x, y);
    mpz_mod(x, x, p);
    Limbs out{};
    size_t c = 0;
    mpz_export(out.data(), &c, -1, 8, 0, 0, x);
    mpz_clears(x, y, nullptr);
    return out;
  }
};

template <typename F>
void field_matches_oracle() {
  MpzOracle oracle(F::constants().modulus);
  Entropy rng(42);
  for (int iter = 0; iter < 200; ++iter) {
    Limbs a{}, b{};
    for (auto& w : a) w = rng.next_u64();
    for (auto& w : b) w = rng.next_u64();
    // Reduce the raw draws into range via the oracle itself.
    a = oracle.mulmod(a, Limbs{1, 0, 0, 0});
    b = oracle.mulmod(b, Limbs{1, 0, 0, 0});
    F fa = F::from_limbs(a), fb = F::from_limbs(b);
    CHECK((fa * fb).to_limbs() == oracle.mulmod(a, b));
    CHECK((fa + fb).to_limbs() == oracle.addmod(a, b));
    CHECK(((fa - fb) + fb) == fa);
    if (!fa.is_zero()) CHECK(fa * fa.inverse() == F::one());
  }
}

std::vector<std::uint8_t> bytes_of(std::string_view s) {
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("base and scalar field match a bignum oracle") {
  field_matches_oracle<Fp>();
  field_matches_oracle<Fr>();
}

TEST_CASE("field serialization round-trips and rejects non-canonical") {
  Entropy rng(7);
  for (int i = 0; i < 50; ++i) {
    Fr x = rng.scalar();
    std::array<std::uint8_t, 32> buf;
    x.to_bytes(buf);
    auto back = Fr::from_bytes(buf);
    REQUIRE(back);
    CHECK(*back == x);
  }
  std::array<std::uint8_t, 32> mod_bytes;
  limbs_to_be_bytes(FrTag::modulus(), mod_bytes);
  CHECK(!Fr::from_bytes(mod_bytes));
  std::array<std::uint8_t, 32> ff;
  ff.fill(0xff);
  CHECK(!Fr::from_bytes(ff));
  CHECK(!Fp::from_bytes(ff));
}

TEST_CASE("square roots exist exactly for quadratic residues") {
  Entropy rng(9);
  int found = 0;
  for (int i = 0; i < 40; ++i) {
    Fp x = Fp::from_u64(rng.next_u64());
    auto r = x.sqrt();
    auto r2 = (x * x).sqrt();
    REQUIRE(r2);
    CHECK(r2->squared() == x * x);
    if (r) {
      CHECK(r->squared() == x);
      ++found;
    }
  }
  CHECK(found > 5);  // roughly half should be residues
  CHECK(found < 35);
}

TEST_CASE("sha256 known vectors") {
  auto hex = [](const Digest& d) {
    std::string s;
    for (auto b : d) {
      static const char* k = "0123456789abcdef";
      s += k[b >> 4];
      s += k[b & 15];
    }
    return s;
  };
  CHECK(hex(sha256({})) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  auto abc = bytes_of("abc");
  CHECK(hex(sha256(abc)) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  // Multi-part update equals one-shot.
  Sha256 h;
  auto part1 = bytes_of("a"), part2 = bytes_of("bc");
  h.update(part1);
  h.update(part2);
  CHECK(h.finish() == sha256(abc));
  auto longmsg = bytes_of(
      "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq");
  CHECK(hex(sha256(longmsg)) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("tower field algebra") {
  Entropy rng(11);
  auto rand_fp2 = [&] { return Fp2{Fp::from_u64(rng.next_u64()), Fp::from_u64(rng.next_u64())}; };
  for (int i = 0; i < 20; ++i) {
    Fp2 a = rand_fp2(), b = rand_fp2(), c = rand_fp2();
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a.squared() == a * a);
    if (!a.is_zero()) CHECK(a * a.inverse() == Fp2::one());
    Fp6 x{a, b, c}, y{c, a, b};
    CHECK(x * y == y * x);
    if (!x.is_zero()) CHECK(x * x.inverse() == Fp6::one());
    CHECK(x.mul_by_v() == x * Fp6{Fp2::zero(), Fp2::one(), Fp2::zero()});
    Fp12 f{x, y}, g{y, x};
    CHECK(f.squared() == f * g * g.inverse() * f);
    if (!(f == Fp12::zero())) CHECK(f * f.inverse() == Fp12::one());
  }
}

TEST_CASE("curve group laws and generators") {
  auto [gx, gy] = G1Tag::generator_affine();
  CHECK(G1::on_curve_affine(gx, gy));
  auto [hx, hy] = G2Tag::generator_affine();
  CHECK(G2::on_curve_affine(hx, hy));
  CHECK(G1::generator().mul(FrTag::modulus()).is_infinity());
  CHECK(G2::generator().mul(FrTag::modulus()).is_infinity());
  CHECK(G2::generator().is_in_prime_subgroup());

  Entropy rng(13);
  G1 g = G1::generator();
  for (int i = 0; i < 10; ++i) {
    Fr a = rng.scalar(), b = rng.scalar();
    G1 pa = g.mul(a.to_limbs()), pb = g.mul(b.to_limbs());
    CHECK(pa + pb == g.mul((a + b).to_limbs()));
    CHECK(pa.dbl() == pa + pa);
    CHECK((pa - pa).is_infinity());
  }
}

TEST_CASE("pairing is bilinear and non-degenerate") {
  G1 g = G1::generator();
  G2 h = G2::generator();
  Fp12 e = pairing(g, h);
  CHECK(!e.is_one());
  CHECK(e.pow(FrTag::modulus()).is_one());

  Entropy rng(17);
  Fr a = rng.scalar(), b = rng.scalar();
  Fp12 lhs = pairing(g.mul(a.to_limbs()), h.mul(b.to_limbs()));
  CHECK(lhs == e.pow((a * b).to_limbs()));
  CHECK(pairing(g.mul(a.to_limbs()), h) == pairing(g, h.mul(a.to_limbs())));
  CHECK(pairing(G1::infinity(), h).is_one());

  // Product form: e(aG, h) * e(-aG, h) == 1 after one shared final exp.
  std::vector<std::pair<G1, G2>> pairs = {{g.mul(a.to_limbs()), h},
                                          {-g.mul(a.to_limbs()), h}};
  CHECK(pairing_product(pairs).is_one());
}

TEST_CASE("group serialization round-trips and rejects corruption") {
  Entropy rng(19);
  for (int i = 0; i < 20; ++i) {
    G1 p = G1::generator().mul(rng.scalar().to_limbs());
    auto enc = g1_to_bytes(p);
    auto back = g1_from_bytes(enc);
    REQUIRE(back);
    CHECK(*back == p);
    G2 q = G2::generator().mul(rng.scalar().to_limbs());
    auto enc2 = g2_to_bytes(q);
    auto back2 = g2_from_bytes(enc2);
    REQUIRE(back2);
    CHECK(*back2 == q);
  }
  CHECK(g1_from_bytes(g1_to_bytes(G1::infinity()))->is_infinity());
  CHECK(g2_from_bytes(g2_to_bytes(G2::infinity()))->is_infinity());
  // Infinity flag with trailing garbage must fail.
  auto bad = g1_to_bytes(G1::infinity());
  bad[5] = 1;
  CHECK(!g1_from_bytes(bad));
  // An x with no curve point must fail (find one by scanning).
  int rejected = 0;
  for (std::uint64_t v = 0; v < 20; ++v) {
    std::array<std::uint8_t, 32> buf{};
    buf[31] = (std::uint8_t)v;
    if (!g1_from_bytes(buf)) ++rejected;
  }
  CHECK(rejected > 0);
}

TEST_CASE("hash_to_group is deterministic and lands on the curve") {
  auto tag = bytes_of("tag-a");
  auto tag2 = bytes_of("tag-b");
  Entropy rng(23);
  for (int i = 0; i < 100; ++i) {
    std::array<std::uint8_t, 16> msg;
    rng.fill(msg);
    G1 p = hash_to_group(tag, msg);
    CHECK(p == hash_to_group(tag, msg));
    CHECK(!p.is_infinity());
    auto [x, y] = p.to_affine();
    CHECK(G1::on_curve_affine(x, y));
    CHECK(hash_to_group(tag2, msg) != p);
  }
}

TEST_CASE("hash_to_scalar is deterministic, in range, and collision-free") {
  auto tag = bytes_of("chal");
  Entropy rng(29);
  std::vector<std::array<std::uint8_t, 32>> seen;
  for (int i = 0; i < 10000; ++i) {
    std::array<std::uint8_t, 8> msg;
    rng.fill(msg);
    std::span<const std::uint8_t> part(msg);
    std::array<std::span<const std::uint8_t>, 1> parts{part};
    Fr v = hash_to_scalar(tag, parts);
    std::array<std::uint8_t, 32> enc;
    v.to_bytes(enc);
    seen.push_back(enc);
  }
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("polynomial evaluation and division") {
  // Constant and linear cases forced by the definitions.
  CHECK(Polynomial::from_coeffs({Fr::from_u64(5)}).eval(Fr::from_u64(7)) ==
        Fr::from_u64(5));
  CHECK(Polynomial::from_coeffs({Fr::from_u64(1), Fr::from_u64(2)})
            .eval(Fr::from_u64(3)) == Fr::from_u64(7));

  // Random degree-9 polynomial against naive power-sum evaluation.
  Entropy rng(31);
  std::vector<Fr> c(10);
  for (auto& x : c) x = rng.scalar();
  Polynomial p = Polynomial::from_coeffs(c);
  Fr x = rng.scalar();
  Fr naive = Fr::zero(), xp = Fr::one();
  for (const Fr& ci : c) {
    naive += ci * xp;
    xp *= x;
  }
  CHECK(p.eval(x) == naive);

  // x^2 - 1 over (x - 1) -> (x + 1, 0)
  Polynomial q1 = Polynomial::from_coeffs({-Fr::one(), Fr::zero(), Fr::one()});
  auto [quot, rem] = poly_div_linear(q1, Fr::one());
  CHECK(quot == Polynomial::from_coeffs({Fr::one(), Fr::one()}));
  CHECK(rem.is_zero());
  // x^2 + 1 over (x - 0) -> (x, 1)
  Polynomial q2 = Polynomial::from_coeffs({Fr::one(), Fr::zero(), Fr::one()});
  auto [quot2, rem2] = poly_div_linear(q2, Fr::zero());
  CHECK(quot2 == Polynomial::from_coeffs({Fr::zero(), Fr::one()}));
  CHECK(rem2 == Fr::one());
  // Random degree-6: quotient * (x - i) + rem reproduces p, and rem == p(i).
  std::vector<Fr> c6(7);
  for (auto& v : c6) v = rng.scalar();
  Polynomial p6 = Polynomial::from_coeffs(c6);
  Fr at = Fr::from_u64(3);
  auto [q6, r6] = poly_div_linear(p6, at);
  CHECK(r6 == p6.eval(at));
  std::vector<Fr> rebuilt(q6.coeffs.size() + 1, Fr::zero());
  for (std::size_t j = 0; j < q6.coeffs.size(); ++j) {
    rebuilt[j + 1] += q6.coeffs[j];
    rebuilt[j] -= q6.coeffs[j] * at;
  }
  rebuilt[0] += r6;
  CHECK(Polynomial::from_coeffs(rebuilt) == p6);

  CHECK_THROWS(poly_div_linear(Polynomial::from_coeffs({Fr::one()}), Fr::one()));
}

TEST_CASE("lagrange interpolation") {
  // Single point -> constant.
  Polynomial c5 = lagrange_interpolate({{Fr::one(), Fr::from_u64(5)}});
  CHECK(c5 == Polynomial::from_coeffs({Fr::from_u64(5)}));
  // {(1,3),(2,5)} -> 2x + 1.
  Polynomial lin = lagrange_interpolate(
      {{Fr::one(), Fr::from_u64(3)}, {Fr::from_u64(2), Fr::from_u64(5)}});
  CHECK(lin == Polynomial::from_coeffs({Fr::one(), Fr::from_u64(2)}));
  CHECK(lin.eval(Fr::zero()) == Fr::one());
  // 7 samples of a degree-6 polynomial recover it exactly.
  Entropy rng(37);
  std::vector<Fr> c(7);
  for (auto& v : c) v = rng.scalar();
  Polynomial p = Polynomial::from_coeffs(c);
  std::vector<std::pair<Fr, Fr>> pts;
  for (std::uint64_t i = 1; i <= 7; ++i)
    pts.push_back({Fr::from_u64(i), p.eval(Fr::from_u64(i))});
  CHECK(lagrange_interpolate(pts) == p);

  CHECK_THROWS(lagrange_interpolate(
      {{Fr::one(), Fr::one()}, {Fr::one(), Fr::from_u64(2)}}));
}

TEST_CASE("interpolation in the exponent matches scalar interpolation") {
  G1 g = G1::generator();
  // {(1, g^4)} -> g^4 anywhere.
  auto lift = [&](std::uint64_t v) { return g.mul(Fr::from_u64(v).to_limbs()); };
  CHECK(interpolate_in_exponent<G1>({{Fr::one(), lift(4)}}, Fr::from_u64(9)) ==
        lift(4));
  // {(1, g^3), (2, g^5)} at 0 -> g^1.
  CHECK(interpolate_in_exponent<G1>(
            {{Fr::one(), lift(3)}, {Fr::from_u64(2), lift(5)}}, Fr::zero()) ==
        lift(1));
  // Commutes with scalar interpolation for a random degree-3 polynomial.
  Entropy rng(41);
  std::vector<Fr> c(4);
  for (auto& v : c) v = rng.scalar();
  Polynomial p = Polynomial::from_coeffs(c);
  std::vector<std::pair<Fr, G1>> pts;
  for (std::uint64_t i = 1; i <= 4; ++i)
    pts.push_back({Fr::from_u64(i), g.mul(p.eval(Fr::from_u64(i)).to_limbs())});
  Fr x0 = Fr::from_u64(7);
  CHECK(interpolate_in_exponent<G1>(pts, x0) == g.mul(p.eval(x0).to_limbs()));
}

TEST_CASE("interpolation table is inversion-consistent") {
  InterpolationTable tab(10);
  for (std::uint32_t i = 0; i <= 10; ++i)
    for (std::uint32_t j = 0; j <= 10; ++j)
      if (i != j)
        CHECK(tab.inv_diff(i, j) * (tab.x(i) - tab.x(j)) == Fr::one());
  // Coefficients from the table equal the generic computation.
  std::vector<std::uint32_t> idx = {1, 3, 4, 7};
  std::vector<Fr> xs;
  for (auto i : idx) xs.push_back(Fr::from_u64(i));
  auto generic = lagrange_coeffs_at(xs, Fr::zero());
  auto fast = tab.coeffs(idx, 0);
  CHECK(fast == generic);
}

TEST_CASE("entropy streams are reproducible and forks are independent") {
  Entropy a(99), b(99);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.scalar() == b.scalar());
  Entropy c(99);
  c.next_u64();
  c.scalar();
  CHECK(c.fork("x").next_u64() != c.fork("x").next_u64());
  for (int i = 0; i < 100; ++i) {
    std::uint64_t v = c.below(7);
    CHECK(v < 7);
  }
}
