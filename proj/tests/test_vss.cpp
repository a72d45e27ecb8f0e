#include "avss/vss.hpp"
#include "doctest.h"

using namespace avss::vss;

namespace {

Polynomial random_poly(std::uint32_t degree, Entropy& rng) {
  std::vector<Fr> c(degree + 1);
  for (auto& v : c) v = rng.scalar();
  if (c.back().is_zero()) c.back() = Fr::one();
  return Polynomial::from_coeffs(c);
}

void subsets_of_size(std::uint32_t n, std::uint32_t k,
                     std::vector<std::vector<std::uint32_t>>& out) {
  std::vector<std::uint32_t> cur;
  auto rec = [&](auto&& self, std::uint32_t start) -> void {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::uint32_t i = start; i <= n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
}

}  // namespace

TEST_CASE("init shapes") {
  Entropy rng(1);
  VssParams ped = vss_init(2, 4, Scheme::Pedersen, rng);
  CHECK(ped.g != ped.h);
  CHECK(!ped.h.is_infinity());

  VssParams kzg = vss_init(3, 4, Scheme::Kzg, rng, /*test_mode=*/true);
  CHECK(kzg.powers.size() == 3);
  // Power consistency without tau: e(g^tau, g2^tau) == e(g^{tau^2}, g2).
  CHECK(pairing(kzg.powers[1], kzg.g2_tau) == pairing(kzg.powers[2], kzg.g2));
  // Test-mode oracle: powers match direct exponentiation by retained tau.
  REQUIRE(kzg.tau);
  Fr tp = Fr::one();
  for (std::uint32_t j = 0; j < 3; ++j) {
    CHECK(kzg.powers[j] == kzg.g.mul(tp.to_limbs()));
    tp *= *kzg.tau;
  }
  CHECK_THROWS(vss_init(5, 4, Scheme::Pedersen, rng));
}

TEST_CASE("share completeness and verification, both schemes") {
  Entropy rng(2);
  for (Scheme scheme : {Scheme::Pedersen, Scheme::Kzg}) {
    for (auto [k, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{
             {2, 4}, {3, 7}, {4, 10}}) {
      VssParams params = vss_init(k, n, scheme, rng);
      Polynomial s = random_poly(k - 1, rng);
      Sharing sh = vss_share(s, params, rng);
      for (const VssShare& share : sh.shares)
        CHECK(vss_verify(params, sh.commitment, share));
    }
  }
}

TEST_CASE("kzg constant polynomial has identity witnesses") {
  Entropy rng(3);
  VssParams params = vss_init(3, 4, Scheme::Kzg, rng);
  Fr c = rng.scalar();
  Sharing sh = vss_share(Polynomial::from_coeffs({c}), params, rng);
  CHECK(sh.commitment.points[0] == params.g.mul(c.to_limbs()));
  for (const VssShare& share : sh.shares) {
    CHECK(share.witness.is_infinity());
    CHECK(share.value == c);
    CHECK(vss_verify(params, sh.commitment, share));
  }
}

TEST_CASE("kzg witness matches test-mode tau computation") {
  Entropy rng(4);
  VssParams params = vss_init(3, 4, Scheme::Kzg, rng, true);
  Polynomial s = random_poly(2, rng);
  Sharing sh = vss_share(s, params, rng);
  for (const VssShare& share : sh.shares) {
    // w = g^{(s(tau) - s(i)) / (tau - i)} directly from tau.
    Fr num = s.eval(*params.tau) - share.value;
    Fr den = *params.tau - Fr::from_u64(share.index);
    CHECK(share.witness == params.g.mul((num * den.inverse()).to_limbs()));
  }
}

TEST_CASE("verification rejects mutations and index swaps") {
  Entropy rng(5);
  for (Scheme scheme : {Scheme::Pedersen, Scheme::Kzg}) {
    VssParams params = vss_init(2, 4, scheme, rng);
    Polynomial s = random_poly(1, rng);
    Sharing sh = vss_share(s, params, rng);
    VssShare bad = sh.shares[0];
    bad.value += Fr::one();
    CHECK(!vss_verify(params, sh.commitment, bad));
    if (scheme == Scheme::Pedersen) {
      bad = sh.shares[0];
      bad.blind += Fr::one();
      CHECK(!vss_verify(params, sh.commitment, bad));
    } else {
      bad = sh.shares[0];
      bad.witness = bad.witness + params.g;
      CHECK(!vss_verify(params, sh.commitment, bad));
    }
    // Honest share under every wrong index.
    for (std::uint32_t i = 1; i <= 4; ++i)
      for (std::uint32_t j = 1; j <= 4; ++j) {
        if (i == j) continue;
        VssShare swapped = sh.shares[i - 1];
        swapped.index = j;
        CHECK(!vss_verify(params, sh.commitment, swapped));
      }
  }
}

TEST_CASE("reconstruction over all k-subsets") {
  Entropy rng(6);
  for (Scheme scheme : {Scheme::Pedersen, Scheme::Kzg}) {
    VssParams params = vss_init(2, 4, scheme, rng);
    Polynomial s = random_poly(1, rng);
    Sharing sh = vss_share(s, params, rng);

    std::vector<std::vector<std::uint32_t>> subs;
    subsets_of_size(4, 2, subs);
    for (const auto& sub : subs) {
      std::map<std::uint32_t, VssShare> m;
      for (auto i : sub) m[i] = sh.shares[i - 1];
      auto rec = vss_reconstruct(params, sh.commitment, m);
      REQUIRE(rec);
      CHECK(*rec == s);
      CHECK(rec->eval(Fr::zero()) == s.coeffs[0]);
    }
    // Below threshold.
    std::map<std::uint32_t, VssShare> one{{1, sh.shares[0]}};
    CHECK(!vss_reconstruct(params, sh.commitment, one));
    // One tampered share among k.
    std::map<std::uint32_t, VssShare> bad{{1, sh.shares[0]}, {2, sh.shares[1]}};
    bad[2].value += Fr::one();
    CHECK(!vss_reconstruct(params, sh.commitment, bad));
  }
}

TEST_CASE("make_poly hits its points and randomizes the constant term") {
  Entropy rng(7);
  VssParams params = vss_init(2, 4, Scheme::Pedersen, rng);
  std::vector<std::array<std::uint8_t, 32>> p0s;
  for (int trial = 0; trial < 100; ++trial) {
    Polynomial p = vss_make_poly(params, {{1, Fr::from_u64(9)}}, rng);
    CHECK(p.eval(Fr::one()) == Fr::from_u64(9));
    std::array<std::uint8_t, 32> enc;
    p.eval(Fr::zero()).to_bytes(enc);
    p0s.push_back(enc);
  }
  std::sort(p0s.begin(), p0s.end());
  p0s.erase(std::unique(p0s.begin(), p0s.end()), p0s.end());
  CHECK(p0s.size() >= 99);

  // Sharing a make_poly output reproduces the listed y at each listed x.
  VssParams p4 = vss_init(4, 10, Scheme::Kzg, rng);
  std::vector<std::pair<std::uint32_t, Fr>> pts = {
      {2, rng.scalar()}, {5, rng.scalar()}, {7, rng.scalar()}};
  Polynomial m = vss_make_poly(p4, pts, rng);
  CHECK(m.degree() <= 3);
  Sharing sh = vss_share(m, p4, rng);
  for (const auto& [x, y] : pts) CHECK(sh.shares[x - 1].value == y);

  CHECK_THROWS(vss_make_poly(params, {}, rng));
  CHECK_THROWS(vss_make_poly(params, {{0, Fr::one()}}, rng));
  CHECK_THROWS(vss_make_poly(p4, {{2, Fr::one()}, {2, Fr::one()}, {3, Fr::one()}},
                             rng));
}

TEST_CASE("commitment homomorphism") {
  Entropy rng(8);
  for (Scheme scheme : {Scheme::Pedersen, Scheme::Kzg}) {
    VssParams params = vss_init(3, 7, scheme, rng);
    for (int trial = 0; trial < 10; ++trial) {
      Polynomial s1 = random_poly(2, rng), s2 = random_poly(2, rng);
      Sharing a = vss_share(s1, params, rng), b = vss_share(s2, params, rng);
      VssCommitment comb = vss_combine_commitments(a.commitment, b.commitment);
      std::map<std::uint32_t, VssShare> summed;
      for (std::uint32_t i = 1; i <= 7; ++i) {
        VssShare s = a.shares[i - 1];
        s.value += b.shares[i - 1].value;
        s.blind += b.shares[i - 1].blind;
        s.witness = s.witness + b.shares[i - 1].witness;
        CHECK(vss_verify(params, comb, s));
        summed[i] = s;
      }
      auto rec = vss_reconstruct(params, comb, summed);
      REQUIRE(rec);
      std::vector<Fr> sumc(3);
      for (int j = 0; j < 3; ++j) sumc[j] = s1.coeffs[j] + s2.coeffs[j];
      CHECK(*rec == Polynomial::from_coeffs(sumc));
    }
    // Combining with a zero-polynomial commitment preserves shares.
    Polynomial s = random_poly(2, rng);
    Sharing a = vss_share(s, params, rng);
    Polynomial zero;
    Sharing z = vss_share_with_blinding(zero, zero, params);
    VssCommitment comb = vss_combine_commitments(a.commitment, z.commitment);
    for (const VssShare& share : a.shares)
      CHECK(vss_verify(params, comb, share));
  }
}

TEST_CASE("kzg witnesses interpolate in the exponent") {
  Entropy rng(9);
  VssParams params = vss_init(4, 10, Scheme::Kzg, rng, true);
  Polynomial s = random_poly(3, rng);
  Sharing sh = vss_share(s, params, rng);
  // Witness polynomial for target 8 has degree <= k-2 = 2; any 3 witnesses
  // of *other* indices do not directly interpolate it (different divisor),
  // so check the contract the recovery path actually uses: witnesses of one
  // polynomial at k-1 indices, interpolated at a fresh index, equal the
  // direct witness there -- for the blinded-polynomial case this holds
  // because all contributors hand over witnesses of the same polynomial
  // evaluated at the target index.
  // Concretely: w_i(target) = g^{(s(tau)-s(target))/(tau-target)} is a single
  // point; contributors send w for *their own* index. The interpolatable
  // family is { g^{q_target(i)} } where q_target = (s - s(target))/(x - target)
  // -- recompute it here and confirm exponent interpolation.
  std::uint32_t target = 8;
  auto [q, rem] = poly_div_linear(s, Fr::from_u64(target));
  std::vector<std::pair<Fr, G1>> pts;
  for (std::uint32_t i : {1u, 3u, 5u}) {
    pts.push_back({Fr::from_u64(i), params.g.mul(q.eval(Fr::from_u64(i)).to_limbs())});
  }
  G1 interp = interpolate_in_exponent<G1>(pts, *params.tau);
  CHECK(interp == sh.shares[target - 1].witness);
  (void)rem;
}

TEST_CASE("pedersen hiding proxy: k-1 shares fit any candidate secret") {
  Entropy rng(10);
  VssParams params = vss_init(3, 7, Scheme::Pedersen, rng);
  Polynomial s = random_poly(2, rng);
  Sharing sh = vss_share(s, params, rng);
  // With shares at {1, 2} only, for every candidate secret v there is a
  // degree-2 polynomial through (0, v), (1, s(1)), (2, s(2)).
  for (int trial = 0; trial < 20; ++trial) {
    Fr v = rng.scalar();
    Polynomial cand = lagrange_interpolate({{Fr::zero(), v},
                                            {Fr::one(), sh.shares[0].value},
                                            {Fr::from_u64(2), sh.shares[1].value}});
    CHECK(cand.eval(Fr::zero()) == v);
    CHECK(cand.eval(Fr::one()) == sh.shares[0].value);
    CHECK(cand.degree() <= 2);
  }
}

TEST_CASE("wire formats round-trip and reject corruption") {
  Entropy rng(11);
  for (Scheme scheme : {Scheme::Pedersen, Scheme::Kzg}) {
    VssParams params = vss_init(2, 4, scheme, rng);
    Polynomial s = random_poly(1, rng);
    Sharing sh = vss_share(s, params, rng);
    auto cb = sh.commitment.to_bytes();
    auto c2 = VssCommitment::from_bytes(cb);
    REQUIRE(c2);
    CHECK(*c2 == sh.commitment);
    cb.pop_back();
    CHECK(!VssCommitment::from_bytes(cb));

    auto sb = sh.shares[2].to_bytes();
    auto s2 = VssShare::from_bytes(sb);
    REQUIRE(s2);
    CHECK(s2->index == 3);
    CHECK(s2->value == sh.shares[2].value);
    CHECK(vss_verify(params, sh.commitment, *s2));
    sb[0] = 7;  // bogus scheme tag
    CHECK(!VssShare::from_bytes(sb));
  }
}
