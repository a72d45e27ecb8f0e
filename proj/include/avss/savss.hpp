#pragma once

#include "avss/dprf.hpp"
#include "avss/vss.hpp"

namespace avss::savss {

using namespace avss::algebra;
using avss::dprf::DprfContribution;
using avss::dprf::DprfInput;
using avss::dprf::Nonce;
using avss::vss::Scheme;
using avss::vss::VssCommitment;
using avss::vss::VssShare;

// Recovery-polynomial VSS: alongside the value polynomial s, the dealer
// shares ell = ceil(n/(k-1)) masking polynomials m_j whose values at
// group-j indices are pinned to DPRF outputs, so any replica's share can be
// rebuilt from blinded contributions without revealing other shares.
struct SavssParams {
  std::uint32_t k = 0, n = 0, ell = 0;
  vss::VssParams vss;
  dprf::DprfPublicKey dpk;

  std::uint32_t components() const {
    return vss.scheme == Scheme::Pedersen ? 2 : 1;
  }
  // Group covering index i: (j-1)(k-1) < i <= j(k-1).
  std::uint32_t group_of(std::uint32_t i) const { return (i + k - 2) / (k - 1); }
};

struct SavssKeys {
  SavssParams params;
  // Replica i's DPRF key share at position i-1. The dealer keeps the whole
  // vector; sharing evaluates the DPRF with them directly.
  std::vector<dprf::DprfPrivateKey> dprf_sks;
};

struct CommitmentVec {
  std::vector<VssCommitment> entries;  // slots 0..ell
  Nonce nonce{};

  std::vector<std::uint8_t> to_bytes() const;
  static std::optional<CommitmentVec> from_bytes(std::span<const std::uint8_t> in);
  bool operator==(const CommitmentVec& o) const {
    return entries == o.entries && nonce == o.nonce;
  }
};

// Everything savss_recover used, carried on the recovered share so anyone
// can re-verify it: the DPRF contributions per component and the blinded
// tuple at the recovered index.
struct RecoveryCertificate {
  std::uint32_t group = 0;
  std::vector<std::map<std::uint32_t, DprfContribution>> contribs;  // per comp
  Fr blinded_value;
  Fr blinded_blind;    // Pedersen
  G1 blinded_witness;  // Kzg
};

struct ShareVec {
  std::uint32_t index = 0;
  // Slot j holds the share of m_j; slot 0 the share of s. A dealt share has
  // every slot; a recovered one has slot 0 only plus the certificate.
  std::vector<std::optional<VssShare>> entries;
  std::optional<RecoveryCertificate> cert;

  bool is_dealt() const {
    if (cert || entries.empty()) return false;
    for (const auto& e : entries)
      if (!e) return false;
    return true;
  }

  std::vector<std::uint8_t> to_bytes() const;
  static std::optional<ShareVec> from_bytes(std::span<const std::uint8_t> in);
};

struct RecoveryShare {
  std::uint32_t contributor = 0;
  std::vector<DprfContribution> contribs;  // component 0 [, component 1]
  VssShare blinded;  // share of s + m_j at the contributor's own index

  std::vector<std::uint8_t> to_bytes() const;
  static std::optional<RecoveryShare> from_bytes(std::span<const std::uint8_t> in);
};

struct SavssSharing {
  CommitmentVec commitment;
  std::vector<ShareVec> shares;  // replica i at position i-1
};

// Evidence that the dealer pinned a masking value inconsistently with the
// DPRF: a certificate whose arithmetic checks out but whose unblinded
// result fails against the slot-0 commitment.
struct DealerFaultEvidence {
  std::uint32_t target = 0;
  RecoveryCertificate cert;
  VssShare bad_entry0;

  std::vector<std::uint8_t> to_bytes() const;
  static std::optional<DealerFaultEvidence> from_bytes(
      std::span<const std::uint8_t> in);
};

struct RecoverResult {
  enum class Status { Ok, Insufficient, DealerFault };
  Status status = Status::Insufficient;
  std::optional<ShareVec> share;
  std::optional<DealerFaultEvidence> fault;
};

SavssKeys savss_init(std::uint32_t k, std::uint32_t n, Scheme scheme,
                     Entropy& rng, bool test_mode = false);

SavssSharing savss_share(const Polynomial& s, const SavssKeys& keys,
                         Entropy& rng);
// Same computation without the OpenMP share kernel; kept as the reference
// the parallel path is tested against.
SavssSharing savss_share_serial(const Polynomial& s, const SavssKeys& keys,
                                Entropy& rng);

bool savss_verify(const SavssParams& params, const CommitmentVec& c,
                  const ShareVec& share);
// Verifies many dealt shares at once (OpenMP when available); result [i] is
// savss_verify of shares[i].
std::vector<char> savss_verify_batch(const SavssParams& params,
                                     const CommitmentVec& c,
                                     const std::vector<ShareVec>& shares);
std::vector<char> savss_verify_batch_serial(const SavssParams& params,
                                            const CommitmentVec& c,
                                            const std::vector<ShareVec>& shares);

std::optional<Polynomial> savss_reconstruct(
    const SavssParams& params, const CommitmentVec& c,
    const std::map<std::uint32_t, ShareVec>& shares);

RecoveryShare savss_recover_contrib(const SavssParams& params,
                                    const CommitmentVec& c,
                                    const dprf::DprfPrivateKey& sk,
                                    const ShareVec& own_share,
                                    std::uint32_t target, Entropy& rng);

bool savss_recover_verify(const SavssParams& params, const CommitmentVec& c,
                          const RecoveryShare& rs, std::uint32_t target);

RecoverResult savss_recover(const SavssParams& params, const CommitmentVec& c,
                            const std::map<std::uint32_t, RecoveryShare>& shares,
                            std::uint32_t target);

// True iff the evidence proves a dealer fault: the certificate arithmetic
// holds but the unblinded slot-0 share fails against the slot-0 commitment.
bool savss_fault_valid(const SavssParams& params, const CommitmentVec& c,
                       const DealerFaultEvidence& evidence);

// After a DealerFault, >= k replicas reveal their dealt slot-0 shares and
// the secret polynomial is reconstructed in the open.
std::optional<Polynomial> savss_expose_dealer(
    const SavssParams& params, const CommitmentVec& c,
    const DealerFaultEvidence& evidence,
    const std::map<std::uint32_t, VssShare>& revealed_entry0);

// The DPRF input for (nonce, component, index).
DprfInput savss_dprf_input(const Nonce& nonce, std::uint16_t component,
                           std::uint32_t index);

}  // namespace avss::savss
