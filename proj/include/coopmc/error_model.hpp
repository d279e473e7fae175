#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coopmc/channel.hpp"
#include "coopmc/geometry.hpp"

namespace coopmc {

struct Thresholds {
  std::vector<long long> xi_rx;  // one per receiver, constant across symbols
  long long xi_fc = 1;

  static Thresholds shared(std::size_t k, long long xi_rx_value, long long xi_fc_value);
  bool shared_rx() const;
  void validate(std::size_t k) const;  // all thresholds >= 1, one per receiver
};

struct LinkErrors {
  double p_md = 0.0;
  double p_fa = 0.0;
};

// Per-link miss/false-alarm for the current symbol given the TX history
// (`history` excludes the current symbol). The current bit is taken as 1 for
// p_md and 0 for p_fa.
LinkErrors link_md_fa(std::span<const std::uint8_t> history, std::span<const double> gains_for_link,
                      double s_a, long long xi_rx);

enum class TailSide { Below, AtOrAbove };

// Tail of the pooled FC observation: independent Poisson counts across
// receivers sum to a Poisson with the summed mean.
double fc_tail(double total_mean, long long xi_fc, TailSide side);

// p1[k][i] = Pr(receiver k decides 1 at symbol i+1) for the given TX prefix.
// Decisions are independent across receivers and symbols once the prefix is
// fixed.
std::vector<std::vector<double>> decision_profile(std::span<const std::uint8_t> prefix,
                                                  const ChannelGains& gains, double s_a,
                                                  const Thresholds& thresholds);

// Global miss/false-alarm at symbol j = tx_prefix.size() + 1, conditioned on
// complete per-receiver decision histories: enumeration over all 2^K current
// decision vectors. current_bit = 1 yields Q_md, 0 yields Q_fa.
// fc_mean_offset adds a deterministic component to the pooled FC mean (used
// by the windowed averaging to fold in out-of-window history).
double q_md_fa_asym(std::span<const std::uint8_t> tx_prefix, int current_bit,
                    const std::vector<std::vector<std::uint8_t>>& rx_histories,
                    const ChannelGains& gains, const DiffusionParams& params,
                    const Thresholds& thresholds, double fc_mean_offset = 0.0,
                    std::size_t enumeration_cap = 16);

// Symmetric-topology form: binomial weights over the number n of receivers
// currently deciding 1, histories reduced to per-symbol counts.
double q_md_fa_sym(std::span<const std::uint8_t> tx_prefix, int current_bit,
                   std::span<const int> history_counts, const ChannelGains& gains,
                   const DiffusionParams& params, const Thresholds& thresholds,
                   double fc_mean_offset = 0.0);

// Exact joint distribution of the last `isi_window` symbols of receiver
// decisions given the TX prefix. Asymmetric states store one bitmask per
// window symbol (bit k = receiver k); symmetric states store per-symbol
// counts of receivers deciding 1.
struct HistoryState {
  std::vector<std::uint8_t> per_symbol;  // oldest window symbol first
  double weight = 0.0;
};

struct HistoryDistribution {
  std::vector<HistoryState> states;
  bool symmetric = false;
  int window = 0;  // number of prefix symbols actually covered
};

HistoryDistribution history_distribution(std::span<const std::uint8_t> prefix,
                                         const ChannelGains& gains, double s_a,
                                         const Thresholds& thresholds, int isi_window,
                                         bool symmetric_path,
                                         std::size_t state_cap = 1u << 20);

struct SymbolError {
  double q_md = 0.0;
  double q_fa = 0.0;
  double q_fc = 0.0;
};

enum class AveragePath { Auto, Symmetric, Asymmetric };
enum class PrefixPrior { P1Weighted, Uniform };

struct AveragingOptions {
  int isi_window = 2;
  PrefixPrior prior = PrefixPrior::P1Weighted;
  AveragePath path = AveragePath::Auto;
  // exact mode refuses to enumerate more than this many prefixes per symbol
  std::uint64_t exact_prefix_cap = 1ull << 22;
  std::size_t history_state_cap = 1u << 20;
  int threads = 0;
};

// Error probabilities at symbol j = prefix.size() + 1 for one TX prefix,
// marginalized over the decision-history distribution. History older than the
// ISI window contributes its expected value to the pooled FC mean.
SymbolError q_fc_symbol(std::span<const std::uint8_t> prefix, const ChannelGains& gains,
                        const DiffusionParams& params, const Thresholds& thresholds, double p1,
                        const AveragingOptions& opts = {});

struct ErrorReport {
  std::vector<double> q_md;  // per symbol, averaged over prefixes
  std::vector<double> q_fa;
  std::vector<double> q_fc;
  double qbar_fc = 0.0;

  std::uint64_t topology_hash = 0;
  Thresholds thresholds;
  int isi_window = 0;
  std::string averaging;  // "exact" or "mc"
  std::uint64_t mc_seed = 0;
  long long mc_samples = 0;
};

struct ExactAveraging {};
struct MonteCarloAveraging {
  long long samples = 100000;
  std::uint64_t seed = 1;
};

ErrorReport average_error(const Topology& topo, const DiffusionParams& params,
                          const ProtocolTiming& timing, const Thresholds& thresholds, int L,
                          double p1, const ExactAveraging&, const AveragingOptions& opts = {});
ErrorReport average_error(const Topology& topo, const DiffusionParams& params,
                          const ProtocolTiming& timing, const Thresholds& thresholds, int L,
                          double p1, const MonteCarloAveraging& mc,
                          const AveragingOptions& opts = {});

}  // namespace coopmc
