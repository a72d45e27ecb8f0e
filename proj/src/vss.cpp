#include "avss/vss.hpp"

#include <cstring>
#include <stdexcept>

namespace avss::vss {
namespace {

std::span<const std::uint8_t> tag(const char* s) {
  return {reinterpret_cast<const std::uint8_t*>(s), std::strlen(s)};
}

void append(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> b) {
  out.insert(out.end(), b.begin(), b.end());
}

// Commitment to the polynomial with the Pedersen pair or the Kzg powers.
G1 kzg_commit(const Polynomial& p, const VssParams& params) {
  G1 acc = G1::infinity();
  for (std::size_t j = 0; j < p.coeffs.size(); ++j)
    acc += params.powers[j].mul(p.coeffs[j].to_limbs());
  return acc;
}

G1 kzg_witness(const Polynomial& s, std::uint32_t i, const VssParams& params) {
  if (s.degree() == 0) return G1::infinity();  // zero quotient
  auto [q, rem] = poly_div_linear(s, Fr::from_u64(i));
  (void)rem;
  return kzg_commit(q, params);
}

}  // namespace

std::vector<std::uint8_t> VssCommitment::to_bytes() const {
  std::vector<std::uint8_t> out;
  out.push_back((std::uint8_t)scheme);
  out.push_back((std::uint8_t)points.size());
  for (const G1& p : points) append(out, g1_to_bytes(p));
  return out;
}

std::optional<VssCommitment> VssCommitment::from_bytes(
    std::span<const std::uint8_t> in) {
  if (in.size() < 2 || in[0] > 1) return std::nullopt;
  std::size_t count = in[1];
  if (in.size() != 2 + count * kG1Bytes) return std::nullopt;
  VssCommitment c;
  c.scheme = (Scheme)in[0];
  for (std::size_t i = 0; i < count; ++i) {
    auto p = g1_from_bytes(
        std::span<const std::uint8_t, kG1Bytes>(in.data() + 2 + i * kG1Bytes, kG1Bytes));
    if (!p) return std::nullopt;
    c.points.push_back(*p);
  }
  return c;
}

std::vector<std::uint8_t> VssShare::to_bytes() const {
  std::vector<std::uint8_t> out;
  out.push_back((std::uint8_t)scheme);
  for (int i = 0; i < 4; ++i) out.push_back((std::uint8_t)(index >> (24 - 8 * i)));
  std::array<std::uint8_t, 32> buf;
  value.to_bytes(buf);
  append(out, buf);
  if (scheme == Scheme::Pedersen) {
    blind.to_bytes(buf);
    append(out, buf);
  } else {
    append(out, g1_to_bytes(witness));
  }
  return out;
}

std::optional<VssShare> VssShare::from_bytes(std::span<const std::uint8_t> in) {
  if (in.size() != 1 + 4 + 32 + 32 || in[0] > 1) return std::nullopt;
  VssShare s;
  s.scheme = (Scheme)in[0];
  s.index = 0;
  for (int i = 0; i < 4; ++i) s.index = (s.index << 8) | in[1 + i];
  auto v = Fr::from_bytes(std::span<const std::uint8_t, 32>(in.data() + 5, 32));
  if (!v) return std::nullopt;
  s.value = *v;
  if (s.scheme == Scheme::Pedersen) {
    auto b = Fr::from_bytes(std::span<const std::uint8_t, 32>(in.data() + 37, 32));
    if (!b) return std::nullopt;
    s.blind = *b;
  } else {
    auto w = g1_from_bytes(
        std::span<const std::uint8_t, kG1Bytes>(in.data() + 37, kG1Bytes));
    if (!w) return std::nullopt;
    s.witness = *w;
  }
  return s;
}

VssParams vss_init(std::uint32_t k, std::uint32_t n, Scheme scheme,
                   Entropy& rng, bool test_mode) {
  if (k < 1 || k > n) throw std::invalid_argument("vss_init: bad threshold");
  VssParams params;
  params.scheme = scheme;
  params.k = k;
  params.n = n;
  params.g = G1::generator();
  params.table = InterpolationTable(n);
  if (scheme == Scheme::Pedersen) {
    auto gb = g1_to_bytes(params.g);
    params.h = hash_to_group(tag("pedersen-h"), gb);
  } else {
    Fr t = rng.nonzero_scalar();
    Fr tp = Fr::one();
    params.powers.reserve(k);
    for (std::uint32_t j = 0; j < k; ++j) {
      params.powers.push_back(params.g.mul(tp.to_limbs()));
      tp *= t;
    }
    params.g2 = G2::generator();
    params.g2_tau = params.g2.mul(t.to_limbs());
    params.g2_tau_minus_i.reserve(n);
    for (std::uint32_t i = 1; i <= n; ++i)
      params.g2_tau_minus_i.push_back(
          params.g2.mul((t - Fr::from_u64(i)).to_limbs()));
    if (test_mode) params.tau = t;
    // Otherwise t simply goes out of scope here.
  }
  return params;
}

VssCommitment vss_commit(const Polynomial& s, const Polynomial& t,
                         const VssParams& params) {
  if (s.degree() > params.k - 1 || t.degree() > params.k - 1)
    throw std::invalid_argument("vss_share: degree too high");
  VssCommitment c;
  c.scheme = params.scheme;
  if (params.scheme == Scheme::Pedersen) {
    for (std::uint32_t j = 0; j < params.k; ++j) {
      Fr sj = j < s.coeffs.size() ? s.coeffs[j] : Fr::zero();
      Fr tj = j < t.coeffs.size() ? t.coeffs[j] : Fr::zero();
      c.points.push_back(params.g.mul(sj.to_limbs()) +
                         params.h.mul(tj.to_limbs()));
    }
  } else {
    c.points.push_back(kzg_commit(s, params));
  }
  return c;
}

VssShare vss_share_at(const Polynomial& s, const Polynomial& t,
                      std::uint32_t i, const VssParams& params) {
  Fr x = Fr::from_u64(i);
  if (params.scheme == Scheme::Pedersen)
    return {Scheme::Pedersen, i, s.eval(x), t.eval(x), G1::infinity()};
  return {Scheme::Kzg, i, s.eval(x), Fr::zero(), kzg_witness(s, i, params)};
}

Sharing vss_share_with_blinding(const Polynomial& s, const Polynomial& t,
                                const VssParams& params) {
  Sharing out;
  out.commitment = vss_commit(s, t, params);
  for (std::uint32_t i = 1; i <= params.n; ++i)
    out.shares.push_back(vss_share_at(s, t, i, params));
  return out;
}

Sharing vss_share(const Polynomial& s, const VssParams& params, Entropy& rng) {
  Polynomial t;
  if (params.scheme == Scheme::Pedersen) {
    std::vector<Fr> c(params.k);
    for (auto& v : c) v = rng.scalar();
    t = Polynomial::from_coeffs(c);
  }
  return vss_share_with_blinding(s, t, params);
}

bool vss_verify(const VssParams& params, const VssCommitment& c,
                const VssShare& share) {
  if (c.scheme != params.scheme || share.scheme != params.scheme) return false;
  if (share.index < 1) return false;
  if (params.scheme == Scheme::Pedersen) {
    if (c.points.size() != params.k) return false;
    // Horner in the exponent: the per-step scalar is the tiny index i.
    Limbs i{share.index, 0, 0, 0};
    G1 rhs = c.points.back();
    for (std::size_t j = c.points.size() - 1; j-- > 0;)
      rhs = rhs.mul(i) + c.points[j];
    G1 lhs = params.g.mul(share.value.to_limbs()) +
             params.h.mul(share.blind.to_limbs());
    return lhs == rhs;
  }
  if (c.points.size() != 1 || share.index > params.n) return false;
  // e(c / g^{s(i)}, g2) == e(w, g2^{tau - i}), as one product pairing.
  G1 num = c.points[0] - params.g.mul(share.value.to_limbs());
  std::vector<std::pair<G1, G2>> pairs = {
      {num, params.g2},
      {-share.witness, params.g2_tau_minus_i[share.index - 1]}};
  return pairing_product(pairs).is_one();
}

std::optional<Polynomial> vss_reconstruct(
    const VssParams& params, const VssCommitment& c,
    const std::map<std::uint32_t, VssShare>& shares) {
  if (shares.size() < params.k) return std::nullopt;
  std::vector<std::pair<Fr, Fr>> vals;
  for (const auto& [i, share] : shares) {
    if (share.index != i || !vss_verify(params, c, share)) return std::nullopt;
    vals.push_back({Fr::from_u64(i), share.value});
    if (vals.size() == params.k) break;
  }
  Polynomial s = lagrange_interpolate(vals);
  if (s.degree() > params.k - 1) return std::nullopt;
  return s;
}

Polynomial vss_make_poly(const VssParams& params,
                         const std::vector<std::pair<std::uint32_t, Fr>>& points,
                         Entropy& rng) {
  if (points.size() != params.k - 1)
    throw std::invalid_argument("make_poly: need k-1 points");
  std::vector<std::pair<Fr, Fr>> pts;
  pts.push_back({Fr::zero(), rng.scalar()});
  for (const auto& [x, y] : points) {
    if (x == 0) throw std::invalid_argument("make_poly: x = 0 reserved");
    for (const auto& [px, py] : pts)
      if (px == Fr::from_u64(x)) throw std::invalid_argument("make_poly: duplicate x");
    pts.push_back({Fr::from_u64(x), y});
  }
  return lagrange_interpolate(pts);
}

VssCommitment vss_combine_commitments(const VssCommitment& a,
                                      const VssCommitment& b) {
  if (a.scheme != b.scheme || a.points.size() != b.points.size())
    throw std::invalid_argument("combine: mismatched commitments");
  VssCommitment out;
  out.scheme = a.scheme;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    out.points.push_back(a.points[i] + b.points[i]);
  return out;
}

}  // namespace avss::vss
