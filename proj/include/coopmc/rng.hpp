#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>

namespace coopmc {

// Philox4x32-10 counter-based generator (Salmon et al. reference constants).
// Streams are cheap and independent: the 64-bit stream id occupies the upper
// counter words, the block index the lower ones, and the 64-bit seed is the
// key. Given (seed, stream), draw n is a pure function of n, which is what
// makes per-trial substreams reproducible under any parallel schedule.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (have_ == 0) refill();
    return out_[--have_];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on (0, 1]; never returns 0 so log() stays finite.
  double next_unit() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double next_normal();

  // Bernoulli(p) with one uniform draw.
  bool next_bernoulli(double p) { return next_unit() <= p; }

 private:
  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
  }

  void refill() {
    std::uint32_t c0 = block_lo_, c1 = block_hi_, c2 = stream_lo_, c3 = stream_hi_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, c0, hi0, lo0);
      mulhilo(0xCD9E8D57u, c2, hi1, lo1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = c0;
    out_[1] = c1;
    out_[2] = c2;
    out_[3] = c3;
    have_ = 4;
    if (++block_lo_ == 0) ++block_hi_;
  }

  std::uint32_t key0_, key1_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint32_t block_lo_ = 0, block_hi_ = 0;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int have_ = 0;
};

namespace detail {

// Marsaglia-Tsang ziggurat tables for the standard normal.
struct ZigguratTables {
  std::uint32_t kn[128];
  double wn[128];
  double fn[128];

  ZigguratTables() {
    const double m1 = 2147483648.0;
    double dn = 3.442619855899, tn = dn;
    const double vn = 9.91256303526217e-3;
    const double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

inline double Philox::next_normal() {
  const auto& z = detail::ziggurat();
  for (;;) {
    const auto hz = static_cast<std::int32_t>(next_u32());
    const std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
    const auto mag = static_cast<std::uint32_t>(hz < 0 ? -static_cast<std::int64_t>(hz)
                                                       : static_cast<std::int64_t>(hz));
    if (mag < z.kn[iz]) return hz * z.wn[iz];

    constexpr double r = 3.442619855899;
    const double x = hz * z.wn[iz];
    if (iz == 0) {
      double xt, yt;
      do {
        xt = -std::log(next_unit()) / r;
        yt = -std::log(next_unit());
      } while (yt + yt < xt * xt);
      return hz > 0 ? r + xt : -(r + xt);
    }
    if (z.fn[iz] + next_unit() * (z.fn[iz - 1] - z.fn[iz]) < std::exp(-0.5 * x * x)) return x;
  }
}

}  // namespace coopmc
