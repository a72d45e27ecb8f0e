#include "avss/dprf.hpp"

#include <cstring>

namespace avss::dprf {
namespace {

std::span<const std::uint8_t> tag(const char* s) {
  return {reinterpret_cast<const std::uint8_t*>(s), std::strlen(s)};
}

Fr dleq_challenge(const DprfInput& x, const G1& g, const G1& delta,
                  const G1& g_alpha_i, const G1& hx_r, const G1& g_r) {
  auto xb = x.to_bytes();
  auto hb = g1_to_bytes(dprf_hash_input(x));
  auto gb = g1_to_bytes(g);
  auto db = g1_to_bytes(delta);
  auto ab = g1_to_bytes(g_alpha_i);
  auto rb1 = g1_to_bytes(hx_r);
  auto rb2 = g1_to_bytes(g_r);
  std::array<std::span<const std::uint8_t>, 7> parts = {xb, hb, gb, db,
                                                        ab, rb1, rb2};
  return hash_to_scalar(tag("dprf-dleq"), parts);
}

}  // namespace

G1 dprf_hash_input(const DprfInput& x) {
  auto xb = x.to_bytes();
  return hash_to_group(tag("dprf-h"), xb);
}

Fr dprf_output_hash(const G1& hx_alpha) {
  auto b = g1_to_bytes(hx_alpha);
  std::array<std::span<const std::uint8_t>, 1> parts = {b};
  return hash_to_scalar(tag("dprf-out"), parts);
}

std::array<std::uint8_t, DprfContribution::kBytes> DprfContribution::to_bytes()
    const {
  std::array<std::uint8_t, kBytes> out;
  auto db = g1_to_bytes(delta);
  std::copy(db.begin(), db.end(), out.begin());
  c.to_bytes(std::span<std::uint8_t, 32>(out.data() + kG1Bytes, 32));
  z.to_bytes(std::span<std::uint8_t, 32>(out.data() + kG1Bytes + 32, 32));
  return out;
}

std::optional<DprfContribution> DprfContribution::from_bytes(
    std::span<const std::uint8_t, kBytes> in) {
  auto d = g1_from_bytes(std::span<const std::uint8_t, kG1Bytes>(in.data(), kG1Bytes));
  auto c = Fr::from_bytes(std::span<const std::uint8_t, 32>(in.data() + kG1Bytes, 32));
  auto z = Fr::from_bytes(std::span<const std::uint8_t, 32>(in.data() + kG1Bytes + 32, 32));
  if (!d || !c || !z) return std::nullopt;
  return DprfContribution{*d, *c, *z};
}

DprfKeys dprf_init(std::uint32_t k, std::uint32_t n, Entropy& rng,
                   Fr* retain_alpha) {
  if (k < 1 || k > n) throw std::invalid_argument("dprf_init: bad threshold");
  // Uniform degree-(k-1) sharing polynomial A with A(0) = alpha.
  std::vector<Fr> coeffs(k);
  for (auto& c : coeffs) c = rng.scalar();
  Fr alpha = coeffs[0];
  if (retain_alpha) *retain_alpha = alpha;

  DprfKeys keys;
  keys.pk.g = G1::generator();
  keys.pk.g_alpha = keys.pk.g.mul(alpha.to_limbs());
  keys.pk.g_alpha_i.reserve(n);
  keys.sks.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) {
    Fr ai = Fr::zero();
    Fr xp = Fr::one();
    Fr xi = Fr::from_u64(i);
    for (const Fr& c : coeffs) {
      ai += c * xp;
      xp *= xi;
    }
    keys.sks.push_back({ai});
    keys.pk.g_alpha_i.push_back(keys.pk.g.mul(ai.to_limbs()));
  }
  return keys;
}

DprfContribution dprf_contrib(const DprfPrivateKey& sk, const DprfInput& x,
                              const DprfPublicKey& pk, Entropy& rng) {
  G1 hx = dprf_hash_input(x);
  G1 delta = hx.mul(sk.alpha_i.to_limbs());
  Fr r = rng.scalar();
  G1 hx_r = hx.mul(r.to_limbs());
  G1 g_r = pk.g.mul(r.to_limbs());
  G1 g_alpha_i = pk.g.mul(sk.alpha_i.to_limbs());
  Fr c = dleq_challenge(x, pk.g, delta, g_alpha_i, hx_r, g_r);
  Fr z = sk.alpha_i * c + r;
  return {delta, c, z};
}

bool dprf_verify(const DprfPublicKey& pk, std::uint32_t i, const DprfInput& x,
                 const DprfContribution& contrib) {
  if (i < 1 || i > pk.g_alpha_i.size()) return false;
  const G1& g_alpha_i = pk.g_alpha_i[i - 1];
  G1 hx = dprf_hash_input(x);
  Limbs c = contrib.c.to_limbs();
  Limbs z = contrib.z.to_limbs();
  // H(x)^z * delta^{-c} and g^z * (g^{alpha_i})^{-c} reconstruct the
  // prover's nonce commitments iff the DLEQ relation holds.
  G1 hx_r = hx.mul(z) - contrib.delta.mul(c);
  G1 g_r = pk.g.mul(z) - g_alpha_i.mul(c);
  return dleq_challenge(x, pk.g, contrib.delta, g_alpha_i, hx_r, g_r) ==
         contrib.c;
}

std::optional<Fr> dprf_eval(
    const DprfInput& x,
    const std::map<std::uint32_t, DprfContribution>& contribs,
    const DprfPublicKey& pk, std::uint32_t k) {
  std::vector<std::pair<Fr, G1>> points;
  for (const auto& [i, contrib] : contribs) {
    if (!dprf_verify(pk, i, x, contrib)) return std::nullopt;
    points.push_back({Fr::from_u64(i), contrib.delta});
    if (points.size() == k) break;
  }
  if (points.size() < k) return std::nullopt;
  G1 hx_alpha = interpolate_in_exponent<G1>(points, Fr::zero());
  return dprf_output_hash(hx_alpha);
}

}  // namespace avss::dprf
