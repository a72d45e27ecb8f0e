#pragma once

#include <string_view>

#include "avss/algebra/fp.hpp"
#include "avss/algebra/sha256.hpp"

namespace avss::algebra {

// Deterministic byte/scalar source: SHA-256 in counter mode over a seed.
// Every randomized protocol step draws from one of these so runs replay
// exactly from (seed, inputs).
class Entropy {
 public:
  explicit Entropy(std::uint64_t seed) {
    Sha256 h;
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = (std::uint8_t)(seed >> (8 * i));
    h.update(b);
    seed_ = h.finish();
  }
  // Domain-separated child stream.
  Entropy fork(std::string_view label) {
    Sha256 h;
    h.update(seed_);
    h.update({reinterpret_cast<const std::uint8_t*>(label.data()), label.size()});
    std::uint64_t n = fork_count_++;
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = (std::uint8_t)(n >> (8 * i));
    h.update(b);
    Entropy e;
    e.seed_ = h.finish();
    return e;
  }

  void fill(std::span<std::uint8_t> out) {
    std::size_t off = 0;
    while (off < out.size()) {
      Digest d = next_block();
      std::size_t take = std::min(out.size() - off, d.size());
      std::copy(d.begin(), d.begin() + take, out.begin() + off);
      off += take;
    }
  }

  std::uint64_t next_u64() {
    std::uint8_t b[8];
    fill(b);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= (std::uint64_t)b[i] << (8 * i);
    return v;
  }
  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t lim = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do v = next_u64(); while (v >= lim);
    return v % bound;
  }

  Fr scalar() {
    // Rejection sampling for an exact uniform draw.
    for (;;) {
      Digest d = next_block();
      d[0] &= 0x3f;
      auto v = Fr::from_bytes(d);
      if (v) return *v;
    }
  }
  Fr nonzero_scalar() {
    for (;;) {
      Fr v = scalar();
      if (!v.is_zero()) return v;
    }
  }

 private:
  Entropy() = default;
  Digest next_block() {
    Sha256 h;
    h.update(seed_);
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = (std::uint8_t)(counter_ >> (8 * i));
    ++counter_;
    h.update(b);
    return h.finish();
  }
  Digest seed_{};
  std::uint64_t counter_ = 0;
  std::uint64_t fork_count_ = 0;
};

}  // namespace avss::algebra
