#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coopmc/geometry.hpp"

namespace coopmc {

struct DiffusionParams {
  double d_a = 5e-9;  // m^2/s, type-A molecules (TX -> RX)
  double d_b = 5e-9;  // m^2/s, type-B molecules (RX -> FC)
  long long s_a = 8000;  // molecules released by the TX per "1"
  long long s_b = 667;   // molecules released by each RX per reported "1"

  void validate() const;
};

struct ProtocolTiming {
  double symbol_interval = 1.1e-3;  // T, seconds
  double t_trans = 1.0e-3;          // TX -> RX transmission window
  double t_report = 0.3e-3;         // RX -> FC report window
  int m_rx = 5;
  int m_fc = 5;
  double dt_rx = 1e-4;
  double dt_fc = 3e-5;

  // All 1-based: sample m of symbol j.
  double rx_sample_time(int j, int m) const;
  double fc_sample_time(int j, int m) const;
  double tx_emit_time(int j) const;
  double report_time(int j) const;

  // Enforces the half-duplex sampling conditions. Note that the reference
  // parameter set has t_trans + t_report > T (the last FC samples spill into
  // the next interval), so that combination is legal here.
  void validate() const;
};

// Uniform-concentration observation probability for a point release at
// distance d observed in a volume after time t. The expression can exceed 1
// close to the source; the value is clamped and *clamped set when that
// happens.
double p_ob_uniform(double t, double observer_volume, double d, double D,
                    bool* clamped = nullptr);

// Exact probability that a molecule released at distance d from the centre of
// a sphere of radius r_obs is inside that sphere after time t.
double p_ob_sphere(double t, double r_obs, double d, double D);

// Per-link, per-lag sums of observation probabilities over the sampling
// schedule. Entry [k][l] is the expected per-molecule contribution of a
// release l symbol intervals ago, before scaling by the emission size.
struct ChannelGains {
  std::vector<std::vector<double>> tx_rx;
  std::vector<std::vector<double>> rx_fc;
  int clamp_warnings = 0;

  std::size_t num_receivers() const { return tx_rx.size(); }
  int lags() const { return tx_rx.empty() ? 0 : static_cast<int>(tx_rx.front().size()); }
  bool symmetric(double rel_tol = 1e-9) const;
};

ChannelGains build_gains(const Topology& topo, const DiffusionParams& params,
                         const ProtocolTiming& timing, int sequence_length);

// emission * sum_i seq[i] * gains[j - i] with j = seq.size(); throws when the
// prefix is longer than the gain table.
double poisson_mean(std::span<const std::uint8_t> seq_prefix, std::span<const double> gains_for_link,
                    double emission);

// Binary sidecar cache for gains, keyed by a hash of the inputs. Layout:
// magic "CGNS", u32 format version, u64 key, u32 K, u32 L, i32 clamp
// warnings, then K*L doubles for tx_rx followed by K*L doubles for rx_fc,
// all little-endian host order.
std::uint64_t gains_input_key(const Topology& topo, const DiffusionParams& params,
                              const ProtocolTiming& timing, int sequence_length);
void write_gains(const std::string& path, const ChannelGains& gains, std::uint64_t input_key);
std::optional<ChannelGains> read_gains(const std::string& path, std::uint64_t input_key);

}  // namespace coopmc
