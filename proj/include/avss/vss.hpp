#pragma once

#include <map>
#include <optional>

#include "avss/algebra/entropy.hpp"
#include "avss/algebra/group_io.hpp"
#include "avss/algebra/poly.hpp"

namespace avss::vss {

using namespace avss::algebra;

enum class Scheme : std::uint8_t { Pedersen = 0, Kzg = 1 };

struct VssParams {
  Scheme scheme;
  std::uint32_t k = 0, n = 0;

  // Pedersen: two generators with unknown discrete-log relation.
  G1 g, h;

  // Kzg: g^{tau^j} for j in [0, k-1], plus the G2 side of the pairing
  // check with g2^{tau - i} precomputed for every protocol index.
  std::vector<G1> powers;
  G2 g2, g2_tau;
  std::vector<G2> g2_tau_minus_i;  // index i at position i-1, i in [1, n]

  InterpolationTable table{0};

  // Retained only when init is run in test mode, for oracle checks.
  std::optional<Fr> tau;
};

struct VssCommitment {
  Scheme scheme;
  // Pedersen: k coefficient commitments g^{s_j} h^{t_j}; Kzg: one point.
  std::vector<G1> points;

  bool operator==(const VssCommitment& o) const {
    return scheme == o.scheme && points == o.points;
  }

  std::vector<std::uint8_t> to_bytes() const;
  static std::optional<VssCommitment> from_bytes(
      std::span<const std::uint8_t> in);
};

struct VssShare {
  Scheme scheme;
  std::uint32_t index = 0;
  Fr value;     // s(i)
  Fr blind;     // Pedersen t(i)
  G1 witness;   // Kzg g^{(s(tau)-s(i))/(tau-i)}

  std::vector<std::uint8_t> to_bytes() const;
  static std::optional<VssShare> from_bytes(std::span<const std::uint8_t> in);
};

VssParams vss_init(std::uint32_t k, std::uint32_t n, Scheme scheme,
                   Entropy& rng, bool test_mode = false);

struct Sharing {
  VssCommitment commitment;
  std::vector<VssShare> shares;  // index i at position i-1
};

Sharing vss_share(const Polynomial& s, const VssParams& params, Entropy& rng);
// Building blocks of vss_share, exposed so batched callers can compute the
// per-index shares in any order (they are pure in (s, t, i)).
VssCommitment vss_commit(const Polynomial& s, const Polynomial& t,
                         const VssParams& params);
VssShare vss_share_at(const Polynomial& s, const Polynomial& t,
                      std::uint32_t i, const VssParams& params);
// Pedersen with a caller-chosen blinding polynomial (degree <= k-1); used
// when the blinding values themselves must hit prescribed points. Ignores
// t for Kzg.
Sharing vss_share_with_blinding(const Polynomial& s, const Polynomial& t,
                                const VssParams& params);

bool vss_verify(const VssParams& params, const VssCommitment& c,
                const VssShare& share);

// Value polynomial, or nullopt below threshold / on any failing share.
std::optional<Polynomial> vss_reconstruct(const VssParams& params,
                                          const VssCommitment& c,
                                          const std::map<std::uint32_t, VssShare>& shares);

// Degree-(k-1) polynomial through the k-1 given points and one uniformly
// random value at x = 0.
Polynomial vss_make_poly(const VssParams& params,
                         const std::vector<std::pair<std::uint32_t, Fr>>& points,
                         Entropy& rng);

VssCommitment vss_combine_commitments(const VssCommitment& a,
                                      const VssCommitment& b);

}  // namespace avss::vss
