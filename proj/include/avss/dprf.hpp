#pragma once

#include <map>
#include <optional>

#include "avss/algebra/entropy.hpp"
#include "avss/algebra/group_io.hpp"
#include "avss/algebra/poly.hpp"

namespace avss::dprf {

using namespace avss::algebra;

constexpr std::size_t kNonceBytes = 16;
using Nonce = std::array<std::uint8_t, kNonceBytes>;

// Input domain: (nonce, component, replica index). Component 0 masks the
// value polynomial, component 1 the Pedersen blinding polynomial.
struct DprfInput {
  Nonce nonce{};
  std::uint16_t component = 0;
  std::uint32_t index = 0;

  static constexpr std::size_t kBytes = 1 + kNonceBytes + 2 + 4;
  std::array<std::uint8_t, kBytes> to_bytes() const {
    std::array<std::uint8_t, kBytes> out{};
    out[0] = 0x01;  // type tag
    std::copy(nonce.begin(), nonce.end(), out.begin() + 1);
    out[17] = (std::uint8_t)(component >> 8);
    out[18] = (std::uint8_t)component;
    for (int i = 0; i < 4; ++i)
      out[19 + i] = (std::uint8_t)(index >> (24 - 8 * i));
    return out;
  }
  bool operator==(const DprfInput&) const = default;
};

struct DprfPublicKey {
  G1 g;
  G1 g_alpha;
  std::vector<G1> g_alpha_i;  // 1-based index i stored at position i-1
};

struct DprfPrivateKey {
  Fr alpha_i;
};

// <delta_i, c_i, z_i>: masked point plus DLEQ proof that
// log_{H(x)}(delta_i) == log_g(g^{alpha_i}).
struct DprfContribution {
  G1 delta;
  Fr c, z;

  static constexpr std::size_t kBytes = kG1Bytes + 64;
  std::array<std::uint8_t, kBytes> to_bytes() const;
  static std::optional<DprfContribution> from_bytes(
      std::span<const std::uint8_t, kBytes> in);
};

struct DprfKeys {
  DprfPublicKey pk;
  std::vector<DprfPrivateKey> sks;  // one per replica, 1-based at i-1
};

// Shamir-shares a fresh alpha across n holders with threshold k. If
// retain_alpha is non-null the master secret is written there (test
// oracles only; production callers pass nullptr and alpha is dropped).
DprfKeys dprf_init(std::uint32_t k, std::uint32_t n, Entropy& rng,
                   Fr* retain_alpha = nullptr);

DprfContribution dprf_contrib(const DprfPrivateKey& sk, const DprfInput& x,
                              const DprfPublicKey& pk, Entropy& rng);

bool dprf_verify(const DprfPublicKey& pk, std::uint32_t i, const DprfInput& x,
                 const DprfContribution& contrib);

// Interpolates H(x)^alpha in the exponent from >= k verifying contributions
// and hashes it into a scalar; nullopt below threshold or on any failing
// contribution in the selected set.
std::optional<Fr> dprf_eval(const DprfInput& x,
                            const std::map<std::uint32_t, DprfContribution>& contribs,
                            const DprfPublicKey& pk, std::uint32_t k);

// H(x): the random-oracle point the contributions exponentiate.
G1 dprf_hash_input(const DprfInput& x);
// Hash of the interpolated group element into Z_q (exposed for test oracles).
Fr dprf_output_hash(const G1& hx_alpha);

}  // namespace avss::dprf
