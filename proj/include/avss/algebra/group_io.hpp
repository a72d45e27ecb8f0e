#pragma once

#include <optional>

#include "avss/algebra/curve.hpp"
#include "avss/algebra/sha256.hpp"

namespace avss::algebra {

// Compressed encodings. Byte 0 carries flags in its top bits (the field
// prime is 254 bits, so they are always free): 0x80 = y is odd, 0x40 =
// point at infinity (rest of the encoding must be zero).
constexpr std::size_t kG1Bytes = 32;
constexpr std::size_t kG2Bytes = 64;

std::array<std::uint8_t, kG1Bytes> g1_to_bytes(const G1& p);
std::optional<G1> g1_from_bytes(std::span<const std::uint8_t, kG1Bytes> in);

std::array<std::uint8_t, kG2Bytes> g2_to_bytes(const G2& p);
std::optional<G2> g2_from_bytes(std::span<const std::uint8_t, kG2Bytes> in);

// Fixed-order coordinate dump of a target-group element; used for hashing
// pairing outputs, not for transport.
std::array<std::uint8_t, 384> fp12_to_bytes(const Fp12& f);

// Random-oracle style hash onto the curve (try-and-increment over the
// x-coordinate; the curve has cofactor 1).
G1 hash_to_group(std::span<const std::uint8_t> domain_tag,
                 std::span<const std::uint8_t> msg);

// Random-oracle style hash into the scalar field; parts are length-prefixed
// so distinct splits never collide.
Fr hash_to_scalar(std::span<const std::uint8_t> domain_tag,
                  std::span<const std::span<const std::uint8_t>> parts);

}  // namespace avss::algebra
