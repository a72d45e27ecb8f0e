#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avss/algebra/fp.hpp"

namespace avss::codec {

inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) {
  out.push_back(v);
}
inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back((std::uint8_t)(v >> 8));
  out.push_back((std::uint8_t)v);
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back((std::uint8_t)(v >> (8 * i)));
}
inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back((std::uint8_t)(v >> (8 * i)));
}
inline void put_fr(std::vector<std::uint8_t>& out, const algebra::Fr& v) {
  std::array<std::uint8_t, 32> b;
  v.to_bytes(b);
  out.insert(out.end(), b.begin(), b.end());
}
inline void put_bytes(std::vector<std::uint8_t>& out,
                      std::span<const std::uint8_t> b) {
  out.insert(out.end(), b.begin(), b.end());
}
// Length-prefixed variable-size blob.
inline void put_blob(std::vector<std::uint8_t>& out,
                     std::span<const std::uint8_t> b) {
  put_u32(out, (std::uint32_t)b.size());
  put_bytes(out, b);
}
inline void put_str(std::vector<std::uint8_t>& out, const std::string& s) {
  put_blob(out, {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

// Sequential reader with failure latching: any short read poisons the
// reader, and callers check `ok` (or `done`) once at the end.
struct Reader {
  std::span<const std::uint8_t> in;
  std::size_t pos = 0;
  bool ok = true;

  bool need(std::size_t n) {
    if (!ok || in.size() - pos < n) ok = false;
    return ok;
  }
  std::uint8_t u8() { return need(1) ? in[pos++] : 0; }
  std::uint16_t u16() {
    if (!need(2)) return 0;
    std::uint16_t v = (std::uint16_t)(in[pos] << 8 | in[pos + 1]);
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    if (!need(4)) return 0;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | in[pos + i];
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    if (!need(8)) return 0;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | in[pos + i];
    pos += 8;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (!need(n)) return {};
    auto s = in.subspan(pos, n);
    pos += n;
    return s;
  }
  std::span<const std::uint8_t> blob() {
    std::size_t n = u32();
    return take(n);
  }
  std::string str() {
    auto b = blob();
    return ok ? std::string(b.begin(), b.end()) : std::string();
  }
  algebra::Fr fr() {
    auto s = take(32);
    if (!ok) return algebra::Fr::zero();
    auto v = algebra::Fr::from_bytes(
        std::span<const std::uint8_t, 32>(s.data(), 32));
    if (!v) {
      ok = false;
      return algebra::Fr::zero();
    }
    return *v;
  }
  bool done() const { return ok && pos == in.size(); }
};

}  // namespace avss::codec
