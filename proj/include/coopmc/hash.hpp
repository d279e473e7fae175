#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace coopmc {

// 64-bit FNV-1a, used to key cached gains and to stamp CSV headers.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view s) { update(s.data(), s.size()); }
  void update(double v) {
    if (v == 0.0) v = 0.0;  // collapse -0.0
    const auto bits = std::bit_cast<std::uint64_t>(v);
    update(&bits, sizeof bits);
  }
  void update(std::uint64_t v) { update(&v, sizeof v); }
  void update(std::int64_t v) { update(&v, sizeof v); }
  void update(int v) { update(static_cast<std::int64_t>(v)); }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  Fnv1a64 h;
  h.update(s);
  return h.digest();
}

}  // namespace coopmc
