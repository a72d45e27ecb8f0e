#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>

namespace avss::algebra {

// 256-bit unsigned integer as four 64-bit limbs, least significant first.
using Limbs = std::array<std::uint64_t, 4>;

constexpr int limb_cmp(const Limbs& a, const Limbs& b) {
  for (int i = 3; i >= 0; --i) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

constexpr bool limb_is_zero(const Limbs& a) {
  return (a[0] | a[1] | a[2] | a[3]) == 0;
}

// Returns the carry out.
constexpr std::uint64_t limb_add(Limbs& out, const Limbs& a, const Limbs& b) {
  unsigned __int128 carry = 0;
  for (int i = 0; i < 4; ++i) {
    carry += (unsigned __int128)a[i] + b[i];
    out[i] = (std::uint64_t)carry;
    carry >>= 64;
  }
  return (std::uint64_t)carry;
}

// Returns the borrow out.
constexpr std::uint64_t limb_sub(Limbs& out, const Limbs& a, const Limbs& b) {
  unsigned __int128 borrow = 0;
  for (int i = 0; i < 4; ++i) {
    unsigned __int128 d = (unsigned __int128)a[i] - b[i] - (std::uint64_t)borrow;
    out[i] = (std::uint64_t)d;
    borrow = (d >> 64) ? 1 : 0;
  }
  return (std::uint64_t)borrow;
}

constexpr int limb_bit_length(const Limbs& a) {
  for (int i = 3; i >= 0; --i) {
    if (a[i] != 0) return 64 * i + 64 - __builtin_clzll(a[i]);
  }
  return 0;
}

constexpr bool limb_test_bit(const Limbs& a, int bit) {
  return (a[bit / 64] >> (bit % 64)) & 1;
}

inline void limbs_to_be_bytes(const Limbs& a, std::span<std::uint8_t, 32> out) {
  for (int i = 0; i < 4; ++i) {
    std::uint64_t w = a[3 - i];
    for (int j = 0; j < 8; ++j) out[i * 8 + j] = (std::uint8_t)(w >> (56 - 8 * j));
  }
}

inline Limbs limbs_from_be_bytes(std::span<const std::uint8_t, 32> in) {
  Limbs a{};
  for (int i = 0; i < 4; ++i) {
    std::uint64_t w = 0;
    for (int j = 0; j < 8; ++j) w = (w << 8) | in[i * 8 + j];
    a[3 - i] = w;
  }
  return a;
}

}  // namespace avss::algebra
