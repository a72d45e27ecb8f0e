#include "avss/algebra/group_io.hpp"

#include <gmp.h>

#include <cstring>

namespace avss::algebra {
namespace {

constexpr std::uint8_t kFlagOdd = 0x80;
constexpr std::uint8_t kFlagInf = 0x40;

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back((std::uint8_t)(v >> (8 * i)));
}

}  // namespace

std::array<std::uint8_t, kG1Bytes> g1_to_bytes(const G1& p) {
  std::array<std::uint8_t, kG1Bytes> out{};
  if (p.is_infinity()) {
    out[0] = kFlagInf;
    return out;
  }
  auto [x, y] = p.to_affine();
  x.to_bytes(std::span<std::uint8_t, 32>(out));
  if (y.is_odd()) out[0] |= kFlagOdd;
  return out;
}

std::optional<G1> g1_from_bytes(std::span<const std::uint8_t, kG1Bytes> in) {
  std::uint8_t flags = in[0] & 0xc0;
  std::array<std::uint8_t, 32> buf;
  std::memcpy(buf.data(), in.data(), 32);
  buf[0] &= 0x3f;
  if (flags & kFlagInf) {
    for (std::uint8_t b : buf)
      if (b) return std::nullopt;
    if (flags != kFlagInf) return std::nullopt;
    return G1::infinity();
  }
  auto x = Fp::from_bytes(buf);
  if (!x) return std::nullopt;
  auto y = (x->squared() * *x + G1Tag::b()).sqrt();
  if (!y) return std::nullopt;
  if (y->is_odd() != bool(flags & kFlagOdd)) *y = -*y;
  return G1::from_affine(*x, *y);
}

std::array<std::uint8_t, kG2Bytes> g2_to_bytes(const G2& p) {
  std::array<std::uint8_t, kG2Bytes> out{};
  if (p.is_infinity()) {
    out[0] = kFlagInf;
    return out;
  }
  auto [x, y] = p.to_affine();
  // x1 (the u coefficient) first, flags on its leading byte.
  x.c1.to_bytes(std::span<std::uint8_t, 32>(out.data(), 32));
  x.c0.to_bytes(std::span<std::uint8_t, 32>(out.data() + 32, 32));
  // Parity of y taken from y0, falling back to y1 when y0 = 0.
  bool odd = y.c0.is_zero() ? y.c1.is_odd() : y.c0.is_odd();
  if (odd) out[0] |= kFlagOdd;
  return out;
}

std::optional<G2> g2_from_bytes(std::span<const std::uint8_t, kG2Bytes> in) {
  std::uint8_t flags = in[0] & 0xc0;
  std::array<std::uint8_t, 64> buf;
  std::memcpy(buf.data(), in.data(), 64);
  buf[0] &= 0x3f;
  if (flags & kFlagInf) {
    for (std::uint8_t b : buf)
      if (b) return std::nullopt;
    if (flags != kFlagInf) return std::nullopt;
    return G2::infinity();
  }
  auto x1 = Fp::from_bytes(std::span<const std::uint8_t, 32>(buf.data(), 32));
  auto x0 = Fp::from_bytes(std::span<const std::uint8_t, 32>(buf.data() + 32, 32));
  if (!x0 || !x1) return std::nullopt;
  Fp2 x{*x0, *x1};
  Fp2 rhs = x.squared() * x + G2Tag::b();
  // Square root in Fp2 via the norm: if rhs = a^2 then norm(rhs) is a QR in Fp.
  auto n = (rhs.c0.squared() + rhs.c1.squared()).sqrt();
  if (!n) return std::nullopt;
  // a0^2 = (c0 + n) / 2 (or with -n); a1 = c1 / (2 a0).
  Fp half = Fp::from_u64(2).inverse();
  Fp2 y;
  bool found = false;
  for (Fp cand : {*n, -*n}) {
    auto a0 = ((rhs.c0 + cand) * half).sqrt();
    if (!a0) continue;
    if (a0->is_zero()) {
      auto a1 = (-rhs.c0).sqrt();
      if (!a1) continue;
      y = {Fp::zero(), *a1};
    } else {
      y = {*a0, rhs.c1 * half * a0->inverse()};
    }
    if (y.squared() == rhs) {
      found = true;
      break;
    }
  }
  if (!found) return std::nullopt;
  bool odd = y.c0.is_zero() ? y.c1.is_odd() : y.c0.is_odd();
  if (odd != bool(flags & kFlagOdd)) y = -y;
  G2 p = G2::from_affine(x, y);
  if (!p.is_in_prime_subgroup()) return std::nullopt;
  return p;
}

std::array<std::uint8_t, 384> fp12_to_bytes(const Fp12& f) {
  std::array<std::uint8_t, 384> out;
  const Fp* coords[12] = {&f.c0.c0.c0, &f.c0.c0.c1, &f.c0.c1.c0, &f.c0.c1.c1,
                          &f.c0.c2.c0, &f.c0.c2.c1, &f.c1.c0.c0, &f.c1.c0.c1,
                          &f.c1.c1.c0, &f.c1.c1.c1, &f.c1.c2.c0, &f.c1.c2.c1};
  for (int i = 0; i < 12; ++i)
    coords[i]->to_bytes(std::span<std::uint8_t, 32>(out.data() + 32 * i, 32));
  return out;
}

G1 hash_to_group(std::span<const std::uint8_t> domain_tag,
                 std::span<const std::uint8_t> msg) {
  for (std::uint32_t ctr = 0;; ++ctr) {
    Sha256 h;
    std::vector<std::uint8_t> prefix;
    append_u32(prefix, (std::uint32_t)domain_tag.size());
    h.update(prefix);
    h.update(domain_tag);
    h.update(msg);
    std::uint8_t cb[4] = {(std::uint8_t)(ctr >> 24), (std::uint8_t)(ctr >> 16),
                          (std::uint8_t)(ctr >> 8), (std::uint8_t)ctr};
    h.update(cb);
    Digest d = h.finish();
    std::uint8_t sign = d[0] & 1;
    d[0] &= 0x3f;  // candidate x below 2^254
    auto x = Fp::from_bytes(d);
    if (!x) continue;
    auto y = (x->squared() * *x + G1Tag::b()).sqrt();
    if (!y) continue;
    if (y->is_odd() != bool(sign)) *y = -*y;
    return G1::from_affine(*x, *y);
  }
}

Fr hash_to_scalar(std::span<const std::uint8_t> domain_tag,
                  std::span<const std::span<const std::uint8_t>> parts) {
  // 64-byte expanded output, reduced mod the group order; the 2^512 / q bias
  // is negligible.
  std::array<std::uint8_t, 64> wide;
  for (std::uint8_t block = 0; block < 2; ++block) {
    Sha256 h;
    std::uint8_t b[1] = {block};
    h.update(b);
    std::vector<std::uint8_t> len;
    append_u32(len, (std::uint32_t)domain_tag.size());
    h.update(len);
    h.update(domain_tag);
    for (auto part : parts) {
      len.clear();
      append_u32(len, (std::uint32_t)part.size());
      h.update(len);
      h.update(part);
    }
    Digest d = h.finish();
    std::memcpy(wide.data() + 32 * block, d.data(), 32);
  }
  mpz_t z, q;
  mpz_inits(z, q, nullptr);
  mpz_import(z, 64, 1, 1, 0, 0, wide.data());
  mpz_import(q, 4, -1, 8, 0, 0, FrTag::modulus().data());
  mpz_mod(z, z, q);
  Limbs out{};
  size_t count = 0;
  mpz_export(out.data(), &count, -1, 8, 0, 0, z);
  mpz_clears(z, q, nullptr);
  return Fr::from_limbs(out);
}

}  // namespace avss::algebra
