#include "coopmc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "coopmc/hash.hpp"

namespace coopmc {

namespace {
constexpr double kUm = 1e-6;   // micrometres -> metres
constexpr double kUm3 = 1e-18;  // cubic micrometres -> cubic metres
}  // namespace

void DiffusionParams::validate() const {
  if (!(d_a > 0.0) || !(d_b > 0.0))
    throw std::invalid_argument("diffusion: coefficients must be positive");
  if (s_a < 0 || s_b < 0) throw std::invalid_argument("diffusion: emission sizes must be >= 0");
}

double ProtocolTiming::rx_sample_time(int j, int m) const {
  return (j - 1) * symbol_interval + m * dt_rx;
}

double ProtocolTiming::fc_sample_time(int j, int m) const {
  return (j - 1) * symbol_interval + t_trans + m * dt_fc;
}

double ProtocolTiming::tx_emit_time(int j) const { return (j - 1) * symbol_interval; }

double ProtocolTiming::report_time(int j) const { return (j - 1) * symbol_interval + t_trans; }

void ProtocolTiming::validate() const {
  if (!(symbol_interval > 0.0) || !(t_trans > 0.0) || !(t_report > 0.0))
    throw std::invalid_argument("timing: intervals must be positive");
  if (m_rx < 1 || m_fc < 1) throw std::invalid_argument("timing: sample counts must be >= 1");
  if (!(dt_rx > 0.0) || !(dt_fc > 0.0))
    throw std::invalid_argument("timing: sample spacings must be positive");
  if (!(m_rx * dt_rx < t_trans))
    throw std::invalid_argument("timing: M_RX*dt_RX must be < t_trans (half-duplex)");
  if (!(m_fc * dt_fc < t_report))
    throw std::invalid_argument("timing: M_FC*dt_FC must be < t_report");
}

double p_ob_uniform(double t, double observer_volume, double d, double D, bool* clamped) {
  if (!(t > 0.0) || !(observer_volume > 0.0) || !(d > 0.0) || !(D > 0.0))
    throw std::invalid_argument("p_ob_uniform: arguments must be positive");
  const double denom = 4.0 * std::numbers::pi * D * t;
  const double raw = observer_volume / (denom * std::sqrt(denom)) * std::exp(-d * d / (4.0 * D * t));
  if (raw > 1.0) {
    if (clamped) *clamped = true;
    return 1.0;
  }
  return raw;
}

double p_ob_sphere(double t, double r_obs, double d, double D) {
  if (!(t > 0.0) || !(r_obs > 0.0) || !(d > 0.0) || !(D > 0.0))
    throw std::invalid_argument("p_ob_sphere: arguments must be positive");
  const double s = 2.0 * std::sqrt(D * t);
  const double erf_part = 0.5 * (std::erf((r_obs + d) / s) + std::erf((r_obs - d) / s));
  // exp(-(d-r)^2/..) - exp(-(d+r)^2/..) via expm1 to keep the large-t
  // difference accurate.
  const double a = (d - r_obs) * (d - r_obs) / (4.0 * D * t);
  const double delta = d * r_obs / (D * t);  // (d+r)^2/(4Dt) - (d-r)^2/(4Dt)
  const double exp_part = -std::exp(-a) * std::expm1(-delta);
  const double p = erf_part - std::sqrt(D * t) / (d * std::sqrt(std::numbers::pi)) * exp_part;
  return std::clamp(p, 0.0, 1.0);
}

bool ChannelGains::symmetric(double rel_tol) const {
  for (std::size_t k = 1; k < tx_rx.size(); ++k) {
    for (std::size_t l = 0; l < tx_rx[k].size(); ++l) {
      if (std::abs(tx_rx[k][l] - tx_rx[0][l]) > rel_tol * std::max(tx_rx[0][l], 1e-300))
        return false;
      if (std::abs(rx_fc[k][l] - rx_fc[0][l]) > rel_tol * std::max(rx_fc[0][l], 1e-300))
        return false;
    }
  }
  return true;
}

ChannelGains build_gains(const Topology& topo, const DiffusionParams& params,
                         const ProtocolTiming& timing, int sequence_length) {
  topo.validate();
  params.validate();
  timing.validate();
  if (sequence_length < 1) throw std::invalid_argument("build_gains: sequence length must be >= 1");

  const std::size_t K = topo.num_receivers();
  ChannelGains gains;
  gains.tx_rx.assign(K, std::vector<double>(static_cast<std::size_t>(sequence_length), 0.0));
  gains.rx_fc.assign(K, std::vector<double>(static_cast<std::size_t>(sequence_length), 0.0));

  const double r_fc_m = topo.fc.radius * kUm;
  for (std::size_t k = 0; k < K; ++k) {
    const double v_rx = topo.receivers[k].volume_um3() * kUm3;
    const double d_tx = topo.tx_rx_distance(k) * kUm;
    const double d_fc = topo.rx_fc_distance(k) * kUm;
    for (int lag = 0; lag < sequence_length; ++lag) {
      double sum_rx = 0.0;
      for (int m = 1; m <= timing.m_rx; ++m) {
        bool clamped = false;
        sum_rx += p_ob_uniform(lag * timing.symbol_interval + m * timing.dt_rx, v_rx, d_tx,
                               params.d_a, &clamped);
        if (clamped) ++gains.clamp_warnings;
      }
      double sum_fc = 0.0;
      for (int m = 1; m <= timing.m_fc; ++m)
        sum_fc += p_ob_sphere(lag * timing.symbol_interval + m * timing.dt_fc, r_fc_m, d_fc,
                              params.d_b);
      gains.tx_rx[k][static_cast<std::size_t>(lag)] = sum_rx;
      gains.rx_fc[k][static_cast<std::size_t>(lag)] = sum_fc;
    }
  }
  return gains;
}

double poisson_mean(std::span<const std::uint8_t> seq_prefix, std::span<const double> gains_for_link,
                    double emission) {
  if (seq_prefix.size() > gains_for_link.size())
    throw std::invalid_argument("poisson_mean: prefix longer than gain table");
  const std::size_t j = seq_prefix.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < j; ++i)
    if (seq_prefix[i]) acc += gains_for_link[j - 1 - i];
  return emission * acc;
}

std::uint64_t gains_input_key(const Topology& topo, const DiffusionParams& params,
                              const ProtocolTiming& timing, int sequence_length) {
  Fnv1a64 h;
  h.update(topology_hash(topo));
  h.update(params.d_a);
  h.update(params.d_b);
  h.update(timing.symbol_interval);
  h.update(timing.t_trans);
  h.update(timing.t_report);
  h.update(timing.m_rx);
  h.update(timing.m_fc);
  h.update(timing.dt_rx);
  h.update(timing.dt_fc);
  h.update(sequence_length);
  return h.digest();
}

namespace {
constexpr char kGainsMagic[4] = {'C', 'G', 'N', 'S'};
constexpr std::uint32_t kGainsFormat = 1;
}  // namespace

void write_gains(const std::string& path, const ChannelGains& gains, std::uint64_t input_key) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_gains: cannot open " + tmp);
    const auto put = [&out](const void* p, std::size_t n) {
      out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    put(kGainsMagic, sizeof kGainsMagic);
    put(&kGainsFormat, sizeof kGainsFormat);
    put(&input_key, sizeof input_key);
    const std::uint32_t k = static_cast<std::uint32_t>(gains.num_receivers());
    const std::uint32_t l = static_cast<std::uint32_t>(gains.lags());
    const std::int32_t warns = gains.clamp_warnings;
    put(&k, sizeof k);
    put(&l, sizeof l);
    put(&warns, sizeof warns);
    for (const auto& row : gains.tx_rx) put(row.data(), row.size() * sizeof(double));
    for (const auto& row : gains.rx_fc) put(row.data(), row.size() * sizeof(double));
    if (!out) throw std::runtime_error("write_gains: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::optional<ChannelGains> read_gains(const std::string& path, std::uint64_t input_key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  const auto get = [&in](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    return static_cast<bool>(in);
  };
  char magic[4];
  std::uint32_t format = 0, k = 0, l = 0;
  std::uint64_t key = 0;
  std::int32_t warns = 0;
  if (!get(magic, 4) || std::memcmp(magic, kGainsMagic, 4) != 0) return std::nullopt;
  if (!get(&format, sizeof format) || format != kGainsFormat) return std::nullopt;
  if (!get(&key, sizeof key) || key != input_key) return std::nullopt;
  if (!get(&k, sizeof k) || !get(&l, sizeof l) || !get(&warns, sizeof warns)) return std::nullopt;
  if (k == 0 || k > 64 || l == 0 || l > 100000) return std::nullopt;
  ChannelGains gains;
  gains.clamp_warnings = warns;
  gains.tx_rx.assign(k, std::vector<double>(l));
  gains.rx_fc.assign(k, std::vector<double>(l));
  for (auto& row : gains.tx_rx)
    if (!get(row.data(), row.size() * sizeof(double))) return std::nullopt;
  for (auto& row : gains.rx_fc)
    if (!get(row.data(), row.size() * sizeof(double))) return std::nullopt;
  return gains;
}

}  // namespace coopmc
