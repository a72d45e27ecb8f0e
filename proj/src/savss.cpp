#include "avss/savss.hpp"

#include <cstring>
#include <stdexcept>

#include "avss/codec.hpp"

namespace avss::savss {
namespace {

using avss::dprf::DprfPrivateKey;
using avss::vss::VssParams;
using namespace avss::codec;

// The dealer holds every DPRF key share, so it can evaluate the function
// directly: interpolate alpha from the first k shares once.
Fr dealer_alpha(const std::vector<DprfPrivateKey>& sks, std::uint32_t k) {
  std::vector<std::pair<Fr, Fr>> pts;
  for (std::uint32_t i = 1; i <= k; ++i)
    pts.push_back({Fr::from_u64(i), sks[i - 1].alpha_i});
  return lagrange_interpolate(pts).eval(Fr::zero());
}

Fr dprf_direct(const Fr& alpha, const DprfInput& x) {
  return avss::dprf::dprf_output_hash(
      avss::dprf::dprf_hash_input(x).mul(alpha.to_limbs()));
}

// Certificate checks shared by verify / recover / expose: DPRF evals per
// component, blinded tuple against the combined commitment, and the
// unblinding arithmetic. Does NOT include the Pedersen bare slot-0 check.
bool certificate_consistent(const SavssParams& params, const CommitmentVec& c,
                            std::uint32_t index, const VssShare& entry0,
                            const RecoveryCertificate& cert) {
  std::uint32_t j = cert.group;
  if (c.entries.size() != params.ell + 1) return false;
  if (index < 1 || index > params.n) return false;
  if (j != params.group_of(index) || j > params.ell) return false;
  if (cert.contribs.size() != params.components()) return false;
  std::vector<Fr> y(params.components());
  for (std::uint32_t comp = 0; comp < params.components(); ++comp) {
    auto v = avss::dprf::dprf_eval(
        savss_dprf_input(c.nonce, (std::uint16_t)comp, index),
        cert.contribs[comp], params.dpk, params.k);
    if (!v) return false;
    y[comp] = *v;
  }
  VssCommitment combined =
      vss::vss_combine_commitments(c.entries[0], c.entries[j]);
  VssShare blinded{params.vss.scheme, index, cert.blinded_value,
                   cert.blinded_blind, cert.blinded_witness};
  if (!vss::vss_verify(params.vss, combined, blinded)) return false;
  if (entry0.index != index || entry0.scheme != params.vss.scheme) return false;
  if (entry0.value != cert.blinded_value - y[0]) return false;
  if (params.vss.scheme == Scheme::Pedersen &&
      entry0.blind != cert.blinded_blind - y[1])
    return false;
  return true;
}

SavssSharing share_impl(const Polynomial& s, const SavssKeys& keys,
                        Entropy& rng, bool parallel) {
  const SavssParams& params = keys.params;
  if (s.degree() > params.k - 1)
    throw std::invalid_argument("savss_share: degree too high");
  SavssSharing out;
  rng.fill(out.commitment.nonce);
  Fr alpha = dealer_alpha(keys.dprf_sks, params.k);

  // Value + blinding polynomial per slot. Slot j's value polynomial is
  // pinned to DPRF outputs at group-j indices; a trailing partial group is
  // padded with random anchors beyond n so the polynomial stays fully
  // random away from its group.
  std::vector<Polynomial> sp(params.ell + 1), tp(params.ell + 1);
  sp[0] = s;
  if (params.vss.scheme == Scheme::Pedersen) {
    std::vector<Fr> t0(params.k);
    for (auto& v : t0) v = rng.scalar();
    tp[0] = Polynomial::from_coeffs(t0);
  }
  for (std::uint32_t j = 1; j <= params.ell; ++j) {
    for (std::uint32_t comp = 0; comp < params.components(); ++comp) {
      std::vector<std::pair<std::uint32_t, Fr>> pts;
      for (std::uint32_t i = (j - 1) * (params.k - 1) + 1;
           i <= j * (params.k - 1) && i <= params.n; ++i)
        pts.push_back({i, dprf_direct(alpha, savss_dprf_input(
                                                 out.commitment.nonce,
                                                 (std::uint16_t)comp, i))});
      std::uint32_t pad = params.n + 1;
      while (pts.size() < params.k - 1) pts.push_back({pad++, rng.scalar()});
      (comp == 0 ? sp[j] : tp[j]) = vss::vss_make_poly(params.vss, pts, rng);
    }
  }

  out.commitment.entries.resize(params.ell + 1);
  for (std::uint32_t j = 0; j <= params.ell; ++j)
    out.commitment.entries[j] = vss::vss_commit(sp[j], tp[j], params.vss);

  out.shares.resize(params.n);
  for (std::uint32_t i = 1; i <= params.n; ++i) {
    out.shares[i - 1].index = i;
    out.shares[i - 1].entries.resize(params.ell + 1);
  }
  std::int64_t total = (std::int64_t)(params.ell + 1) * params.n;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::uint32_t j = (std::uint32_t)(idx / params.n);
    std::uint32_t i = (std::uint32_t)(idx % params.n) + 1;
    out.shares[i - 1].entries[j] = vss::vss_share_at(sp[j], tp[j], i, params.vss);
  }
  return out;
}

}  // namespace

DprfInput savss_dprf_input(const Nonce& nonce, std::uint16_t component,
                           std::uint32_t index) {
  DprfInput x;
  x.nonce = nonce;
  x.component = component;
  x.index = index;
  return x;
}

SavssKeys savss_init(std::uint32_t k, std::uint32_t n, Scheme scheme,
                     Entropy& rng, bool test_mode) {
  if (k < 2 || k > n) throw std::invalid_argument("savss_init: bad threshold");
  SavssKeys keys;
  keys.params.k = k;
  keys.params.n = n;
  keys.params.ell = (n + k - 2) / (k - 1);
  keys.params.vss = vss::vss_init(k, n, scheme, rng, test_mode);
  auto dk = avss::dprf::dprf_init(k, n, rng);
  keys.params.dpk = dk.pk;
  keys.dprf_sks = std::move(dk.sks);
  return keys;
}

SavssSharing savss_share(const Polynomial& s, const SavssKeys& keys,
                         Entropy& rng) {
  return share_impl(s, keys, rng, true);
}
SavssSharing savss_share_serial(const Polynomial& s, const SavssKeys& keys,
                                Entropy& rng) {
  return share_impl(s, keys, rng, false);
}

bool savss_verify(const SavssParams& params, const CommitmentVec& c,
                  const ShareVec& share) {
  if (c.entries.size() != params.ell + 1) return false;
  if (share.entries.size() != params.ell + 1) return false;
  if (!share.entries[0]) return false;
  const VssShare& e0 = *share.entries[0];
  if (e0.index != share.index) return false;
  if (share.is_dealt()) {
    for (std::uint32_t j = 0; j <= params.ell; ++j) {
      if (share.entries[j]->index != share.index) return false;
      if (!vss::vss_verify(params.vss, c.entries[j], *share.entries[j]))
        return false;
    }
    return true;
  }
  // Recovered share: slot 0 plus certificate only.
  if (!share.cert) return false;
  for (std::uint32_t j = 1; j <= params.ell; ++j)
    if (share.entries[j]) return false;
  if (!certificate_consistent(params, c, share.index, e0, *share.cert))
    return false;
  // Pedersen slot-0 shares verify on their own; this is where a dealer who
  // pinned a masking value away from the DPRF output gets caught.
  if (params.vss.scheme == Scheme::Pedersen)
    return vss::vss_verify(params.vss, c.entries[0], e0);
  return true;
}

std::vector<char> savss_verify_batch_serial(const SavssParams& params,
                                            const CommitmentVec& c,
                                            const std::vector<ShareVec>& shares) {
  std::vector<char> out(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i)
    out[i] = savss_verify(params, c, shares[i]);
  return out;
}

std::vector<char> savss_verify_batch(const SavssParams& params,
                                     const CommitmentVec& c,
                                     const std::vector<ShareVec>& shares) {
  std::vector<char> out(shares.size());
  std::int64_t n = (std::int64_t)shares.size();
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i)
    out[i] = savss_verify(params, c, shares[i]);
  return out;
}

std::optional<Polynomial> savss_reconstruct(
    const SavssParams& params, const CommitmentVec& c,
    const std::map<std::uint32_t, ShareVec>& shares) {
  if (shares.size() < params.k) return std::nullopt;
  std::vector<std::pair<Fr, Fr>> pts;
  for (const auto& [i, share] : shares) {
    if (share.index != i || !savss_verify(params, c, share))
      return std::nullopt;
    if (pts.size() < params.k)
      pts.push_back({Fr::from_u64(i), share.entries[0]->value});
  }
  Polynomial s = lagrange_interpolate(pts);
  if (s.degree() > params.k - 1) return std::nullopt;
  // Every supplied share must sit on the interpolated polynomial.
  for (const auto& [i, share] : shares)
    if (s.eval(Fr::from_u64(i)) != share.entries[0]->value) return std::nullopt;
  return s;
}

RecoveryShare savss_recover_contrib(const SavssParams& params,
                                    const CommitmentVec& c,
                                    const dprf::DprfPrivateKey& sk,
                                    const ShareVec& own_share,
                                    std::uint32_t target, Entropy& rng) {
  if (!own_share.is_dealt())
    throw std::invalid_argument("recover_contrib: share has no recovery slots");
  if (target < 1 || target > params.n || target == own_share.index)
    throw std::invalid_argument("recover_contrib: bad target");
  std::uint32_t j = params.group_of(target);
  RecoveryShare rs;
  rs.contributor = own_share.index;
  for (std::uint32_t comp = 0; comp < params.components(); ++comp)
    rs.contribs.push_back(avss::dprf::dprf_contrib(
        sk, savss_dprf_input(c.nonce, (std::uint16_t)comp, target), params.dpk,
        rng));
  const VssShare& e0 = *own_share.entries[0];
  const VssShare& ej = *own_share.entries[j];
  rs.blinded = {e0.scheme, e0.index, e0.value + ej.value, e0.blind + ej.blind,
                e0.witness + ej.witness};
  return rs;
}

bool savss_recover_verify(const SavssParams& params, const CommitmentVec& c,
                          const RecoveryShare& rs, std::uint32_t target) {
  if (target < 1 || target > params.n) return false;
  if (rs.contributor < 1 || rs.contributor > params.n ||
      rs.contributor == target)
    return false;
  if (rs.contribs.size() != params.components()) return false;
  if (rs.blinded.index != rs.contributor ||
      rs.blinded.scheme != params.vss.scheme)
    return false;
  if (c.entries.size() != params.ell + 1) return false;
  std::uint32_t j = params.group_of(target);
  for (std::uint32_t comp = 0; comp < params.components(); ++comp)
    if (!avss::dprf::dprf_verify(
            params.dpk, rs.contributor,
            savss_dprf_input(c.nonce, (std::uint16_t)comp, target),
            rs.contribs[comp]))
      return false;
  VssCommitment combined =
      vss::vss_combine_commitments(c.entries[0], c.entries[j]);
  return vss::vss_verify(params.vss, combined, rs.blinded);
}

RecoverResult savss_recover(const SavssParams& params, const CommitmentVec& c,
                            const std::map<std::uint32_t, RecoveryShare>& shares,
                            std::uint32_t target) {
  RecoverResult out;
  std::vector<const RecoveryShare*> used;
  for (const auto& [i, rs] : shares) {
    if (rs.contributor != i) continue;
    if (!savss_recover_verify(params, c, rs, target)) continue;
    used.push_back(&rs);
    if (used.size() == params.k) break;
  }
  if (used.size() < params.k) return out;

  std::uint32_t j = params.group_of(target);
  Fr x0 = Fr::from_u64(target);

  // Blinded polynomial(s) s + m_j (and t_0 + t_j) from the contributors.
  std::vector<std::pair<Fr, Fr>> vals, blinds;
  std::vector<std::pair<Fr, G1>> wits;
  std::vector<std::map<std::uint32_t, DprfContribution>> contribs(
      params.components());
  for (const RecoveryShare* rs : used) {
    Fr xi = Fr::from_u64(rs->contributor);
    vals.push_back({xi, rs->blinded.value});
    blinds.push_back({xi, rs->blinded.blind});
    wits.push_back({xi, rs->blinded.witness});
    for (std::uint32_t comp = 0; comp < params.components(); ++comp)
      contribs[comp][rs->contributor] = rs->contribs[comp];
  }

  RecoveryCertificate cert;
  cert.group = j;
  cert.contribs = contribs;
  cert.blinded_value = lagrange_interpolate(vals).eval(x0);
  cert.blinded_blind = params.vss.scheme == Scheme::Pedersen
                           ? lagrange_interpolate(blinds).eval(x0)
                           : Fr::zero();
  // The witness map i -> w_{s+m_j}(i) is polynomial of degree <= k-2 in i,
  // so exponent interpolation at the target reproduces its witness.
  cert.blinded_witness = params.vss.scheme == Scheme::Kzg
                             ? interpolate_in_exponent<G1>(wits, x0)
                             : G1::infinity();

  std::vector<Fr> y(params.components());
  for (std::uint32_t comp = 0; comp < params.components(); ++comp) {
    auto v = avss::dprf::dprf_eval(
        savss_dprf_input(c.nonce, (std::uint16_t)comp, target), contribs[comp],
        params.dpk, params.k);
    if (!v) return out;  // cannot happen for verified contributions
    y[comp] = *v;
  }

  ShareVec share;
  share.index = target;
  share.entries.resize(params.ell + 1);
  share.entries[0] =
      VssShare{params.vss.scheme, target, cert.blinded_value - y[0],
               params.vss.scheme == Scheme::Pedersen
                   ? cert.blinded_blind - y[1]
                   : Fr::zero(),
               G1::infinity()};
  share.cert = cert;

  if (!savss_verify(params, c, share)) {
    out.status = RecoverResult::Status::DealerFault;
    out.fault = DealerFaultEvidence{target, cert, *share.entries[0]};
    return out;
  }
  out.status = RecoverResult::Status::Ok;
  out.share = std::move(share);
  return out;
}

bool savss_fault_valid(const SavssParams& params, const CommitmentVec& c,
                       const DealerFaultEvidence& evidence) {
  // Valid iff the certificate arithmetic holds but the unblinded slot-0
  // share fails against the slot-0 commitment.
  if (!certificate_consistent(params, c, evidence.target, evidence.bad_entry0,
                              evidence.cert))
    return false;
  return !vss::vss_verify(params.vss, c.entries[0], evidence.bad_entry0);
}

std::optional<Polynomial> savss_expose_dealer(
    const SavssParams& params, const CommitmentVec& c,
    const DealerFaultEvidence& evidence,
    const std::map<std::uint32_t, VssShare>& revealed_entry0) {
  if (!savss_fault_valid(params, c, evidence)) return std::nullopt;
  if (revealed_entry0.size() < params.k) return std::nullopt;
  return vss::vss_reconstruct(params.vss, c.entries[0], revealed_entry0);
}

// ---- wire formats ----

std::vector<std::uint8_t> CommitmentVec::to_bytes() const {
  std::vector<std::uint8_t> out;
  put_bytes(out, nonce);
  out.push_back((std::uint8_t)entries.size());
  for (const VssCommitment& e : entries) {
    auto b = e.to_bytes();
    put_u16(out, (std::uint16_t)b.size());
    put_bytes(out, b);
  }
  return out;
}

std::optional<CommitmentVec> CommitmentVec::from_bytes(
    std::span<const std::uint8_t> in) {
  Reader r{in};
  CommitmentVec c;
  auto nb = r.take(dprf::kNonceBytes);
  if (!r.ok) return std::nullopt;
  std::copy(nb.begin(), nb.end(), c.nonce.begin());
  std::size_t count = r.u8();
  for (std::size_t i = 0; i < count && r.ok; ++i) {
    std::size_t len = r.u16();
    auto b = r.take(len);
    if (!r.ok) break;
    auto e = VssCommitment::from_bytes(b);
    if (!e) return std::nullopt;
    c.entries.push_back(*e);
  }
  if (!r.done()) return std::nullopt;
  return c;
}

namespace {

void put_cert(std::vector<std::uint8_t>& out, const RecoveryCertificate& cert) {
  put_u32(out, cert.group);
  out.push_back((std::uint8_t)cert.contribs.size());
  for (const auto& m : cert.contribs) {
    out.push_back((std::uint8_t)m.size());
    for (const auto& [i, contrib] : m) {
      put_u32(out, i);
      put_bytes(out, contrib.to_bytes());
    }
  }
  put_fr(out, cert.blinded_value);
  // Exactly one of blind/witness is live: two components means Pedersen.
  if (cert.contribs.size() == 2)
    put_fr(out, cert.blinded_blind);
  else
    put_bytes(out, g1_to_bytes(cert.blinded_witness));
}

std::optional<RecoveryCertificate> read_cert(Reader& r) {
  RecoveryCertificate cert;
  cert.group = r.u32();
  std::size_t ncomp = r.u8();
  if (ncomp < 1 || ncomp > 2) return std::nullopt;
  for (std::size_t cpt = 0; cpt < ncomp && r.ok; ++cpt) {
    std::map<std::uint32_t, DprfContribution> m;
    std::size_t count = r.u8();
    for (std::size_t t = 0; t < count && r.ok; ++t) {
      std::uint32_t i = r.u32();
      auto b = r.take(DprfContribution::kBytes);
      if (!r.ok) break;
      auto contrib = DprfContribution::from_bytes(
          std::span<const std::uint8_t, DprfContribution::kBytes>(
              b.data(), DprfContribution::kBytes));
      if (!contrib) {
        r.ok = false;
        break;
      }
      m[i] = *contrib;
    }
    cert.contribs.push_back(std::move(m));
  }
  cert.blinded_value = r.fr();
  if (ncomp == 2) {
    cert.blinded_blind = r.fr();
  } else {
    auto wb = r.take(kG1Bytes);
    if (!r.ok) return std::nullopt;
    auto w = g1_from_bytes(
        std::span<const std::uint8_t, kG1Bytes>(wb.data(), kG1Bytes));
    if (!w) return std::nullopt;
    cert.blinded_witness = *w;
  }
  return cert;
}

}  // namespace

std::vector<std::uint8_t> ShareVec::to_bytes() const {
  std::vector<std::uint8_t> out;
  put_u32(out, index);
  out.push_back((std::uint8_t)entries.size());
  for (const auto& e : entries) {
    out.push_back(e ? 1 : 0);
    if (e) {
      auto b = e->to_bytes();
      put_u16(out, (std::uint16_t)b.size());
      put_bytes(out, b);
    }
  }
  out.push_back(cert ? 1 : 0);
  if (cert) put_cert(out, *cert);
  return out;
}

std::optional<ShareVec> ShareVec::from_bytes(std::span<const std::uint8_t> in) {
  Reader r{in};
  ShareVec s;
  s.index = r.u32();
  std::size_t count = r.u8();
  for (std::size_t i = 0; i < count && r.ok; ++i) {
    std::uint8_t present = r.u8();
    if (present > 1) return std::nullopt;  // canonical flags only
    if (present) {
      std::size_t len = r.u16();
      auto b = r.take(len);
      if (!r.ok) break;
      auto e = VssShare::from_bytes(b);
      if (!e) return std::nullopt;
      s.entries.push_back(*e);
    } else {
      s.entries.push_back(std::nullopt);
    }
  }
  std::uint8_t has_cert = r.u8();
  if (has_cert > 1) return std::nullopt;
  if (has_cert) {
    auto cert = read_cert(r);
    if (!cert) return std::nullopt;
    s.cert = *cert;
  }
  if (!r.done()) return std::nullopt;
  return s;
}

std::vector<std::uint8_t> DealerFaultEvidence::to_bytes() const {
  std::vector<std::uint8_t> out;
  put_u32(out, target);
  put_cert(out, cert);
  auto b = bad_entry0.to_bytes();
  put_u16(out, (std::uint16_t)b.size());
  put_bytes(out, b);
  return out;
}

std::optional<DealerFaultEvidence> DealerFaultEvidence::from_bytes(
    std::span<const std::uint8_t> in) {
  Reader r{in};
  DealerFaultEvidence ev;
  ev.target = r.u32();
  auto cert = read_cert(r);
  if (!cert) return std::nullopt;
  ev.cert = *cert;
  std::size_t len = r.u16();
  auto b = r.take(len);
  if (!r.ok) return std::nullopt;
  auto share = VssShare::from_bytes(b);
  if (!share || !r.done()) return std::nullopt;
  ev.bad_entry0 = *share;
  return ev;
}

std::vector<std::uint8_t> RecoveryShare::to_bytes() const {
  std::vector<std::uint8_t> out;
  put_u32(out, contributor);
  out.push_back((std::uint8_t)contribs.size());
  for (const DprfContribution& c : contribs) put_bytes(out, c.to_bytes());
  auto b = blinded.to_bytes();
  put_u16(out, (std::uint16_t)b.size());
  put_bytes(out, b);
  return out;
}

std::optional<RecoveryShare> RecoveryShare::from_bytes(
    std::span<const std::uint8_t> in) {
  Reader r{in};
  RecoveryShare rs;
  rs.contributor = r.u32();
  std::size_t count = r.u8();
  for (std::size_t i = 0; i < count && r.ok; ++i) {
    auto b = r.take(DprfContribution::kBytes);
    if (!r.ok) break;
    auto c = DprfContribution::from_bytes(
        std::span<const std::uint8_t, DprfContribution::kBytes>(
            b.data(), DprfContribution::kBytes));
    if (!c) return std::nullopt;
    rs.contribs.push_back(*c);
  }
  std::size_t len = r.u16();
  auto b = r.take(len);
  if (!r.ok) return std::nullopt;
  auto share = VssShare::from_bytes(b);
  if (!share || !r.done()) return std::nullopt;
  rs.blinded = *share;
  return rs;
}

}  // namespace avss::savss
