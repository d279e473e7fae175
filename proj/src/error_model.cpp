#include "coopmc/error_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "coopmc/parallel.hpp"
#include "coopmc/poisson.hpp"
#include "coopmc/rng.hpp"

namespace coopmc {

Thresholds Thresholds::shared(std::size_t k, long long xi_rx_value, long long xi_fc_value) {
  Thresholds t;
  t.xi_rx.assign(k, xi_rx_value);
  t.xi_fc = xi_fc_value;
  return t;
}

bool Thresholds::shared_rx() const {
  return std::all_of(xi_rx.begin(), xi_rx.end(), [&](long long v) { return v == xi_rx.front(); });
}

void Thresholds::validate(std::size_t k) const {
  if (xi_rx.size() != k) throw std::invalid_argument("thresholds: need one RX threshold per receiver");
  for (long long v : xi_rx)
    if (v < 1) throw std::invalid_argument("thresholds: RX thresholds must be >= 1");
  if (xi_fc < 1) throw std::invalid_argument("thresholds: FC threshold must be >= 1");
}

LinkErrors link_md_fa(std::span<const std::uint8_t> history, std::span<const double> gains_for_link,
                      double s_a, long long xi_rx) {
  if (history.size() + 1 > gains_for_link.size())
    throw std::invalid_argument("link_md_fa: history longer than gain table allows");
  const std::size_t j = history.size() + 1;
  double isi = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i)
    if (history[i]) isi += gains_for_link[j - 1 - i];
  isi *= s_a;
  const double mu1 = isi + s_a * gains_for_link[0];
  LinkErrors e;
  e.p_md = poisson_cdf(xi_rx - 1, mu1);
  e.p_fa = poisson_sf(xi_rx - 1, isi);
  return e;
}

double fc_tail(double total_mean, long long xi_fc, TailSide side) {
  if (!(total_mean >= 0.0)) throw std::invalid_argument("fc_tail: mean must be >= 0");
  return side == TailSide::Below ? poisson_cdf(xi_fc - 1, total_mean)
                                 : poisson_sf(xi_fc - 1, total_mean);
}

std::vector<std::vector<double>> decision_profile(std::span<const std::uint8_t> prefix,
                                                  const ChannelGains& gains, double s_a,
                                                  const Thresholds& thresholds) {
  const std::size_t K = gains.num_receivers();
  thresholds.validate(K);
  std::vector<std::vector<double>> p1(K, std::vector<double>(prefix.size(), 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 1; i <= prefix.size(); ++i) {
      const double mean = poisson_mean(prefix.first(i), gains.tx_rx[k], s_a);
      p1[k][i - 1] = poisson_sf(thresholds.xi_rx[k] - 1, mean);
    }
  }
  return p1;
}

namespace {

// Pooled FC ISI mean from the given recent histories; entry w of a history
// covers symbol j - len + w, i.e. lag len - w.
double pooled_isi_mean(const std::vector<std::vector<std::uint8_t>>& rx_histories,
                       const ChannelGains& gains, double s_b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < rx_histories.size(); ++k) {
    const auto& hist = rx_histories[k];
    const std::size_t len = hist.size();
    for (std::size_t w = 0; w < len; ++w)
      if (hist[w]) acc += gains.rx_fc[k][len - w];
  }
  return s_b * acc;
}

}  // namespace

double q_md_fa_asym(std::span<const std::uint8_t> tx_prefix, int current_bit,
                    const std::vector<std::vector<std::uint8_t>>& rx_histories,
                    const ChannelGains& gains, const DiffusionParams& params,
                    const Thresholds& thresholds, double fc_mean_offset,
                    std::size_t enumeration_cap) {
  const std::size_t K = gains.num_receivers();
  thresholds.validate(K);
  if (rx_histories.size() != K)
    throw std::invalid_argument("q_md_fa_asym: need one history per receiver");
  if (K > enumeration_cap)
    throw std::length_error("q_md_fa_asym: K exceeds the exact-enumeration cap");
  for (const auto& hist : rx_histories)
    if (hist.size() > tx_prefix.size())
      throw std::invalid_argument("q_md_fa_asym: history longer than TX prefix");

  // Pr(decide 1 now) per receiver for the stated current bit.
  std::vector<double> p_one(K);
  for (std::size_t k = 0; k < K; ++k) {
    const LinkErrors link = link_md_fa(tx_prefix, gains.tx_rx[k], static_cast<double>(params.s_a),
                                       thresholds.xi_rx[k]);
    p_one[k] = current_bit ? 1.0 - link.p_md : link.p_fa;
  }

  const double isi_mean =
      pooled_isi_mean(rx_histories, gains, static_cast<double>(params.s_b)) + fc_mean_offset;
  const TailSide side = current_bit ? TailSide::Below : TailSide::AtOrAbove;

  double total = 0.0;
  for (std::uint64_t r = 0; r < (1ull << K); ++r) {
    double weight = 1.0;
    double mean = isi_mean;
    for (std::size_t k = 0; k < K; ++k) {
      if (r & (1ull << k)) {
        weight *= p_one[k];
        mean += static_cast<double>(params.s_b) * gains.rx_fc[k][0];
      } else {
        weight *= 1.0 - p_one[k];
      }
    }
    if (weight != 0.0) total += weight * fc_tail(mean, thresholds.xi_fc, side);
  }
  return std::clamp(total, 0.0, 1.0);
}

namespace {

double binom_coeff(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

}  // namespace

double q_md_fa_sym(std::span<const std::uint8_t> tx_prefix, int current_bit,
                   std::span<const int> history_counts, const ChannelGains& gains,
                   const DiffusionParams& params, const Thresholds& thresholds,
                   double fc_mean_offset) {
  const std::size_t K = gains.num_receivers();
  thresholds.validate(K);
  if (!gains.symmetric() || !thresholds.shared_rx())
    throw std::invalid_argument("q_md_fa_sym: requires a symmetric topology and shared thresholds");
  if (history_counts.size() > tx_prefix.size())
    throw std::invalid_argument("q_md_fa_sym: history longer than TX prefix");
  for (int n : history_counts)
    if (n < 0 || n > static_cast<int>(K))
      throw std::invalid_argument("q_md_fa_sym: history count out of range");

  const LinkErrors link = link_md_fa(tx_prefix, gains.tx_rx[0], static_cast<double>(params.s_a),
                                     thresholds.xi_rx[0]);
  // n counts receivers deciding 1; with P_md = Pr(decide 0 | 1 sent) the
  // realization weight is C(K,n) (1-P_md)^n P_md^(K-n), and the false-alarm
  // weight pairs P_fa with the n receivers deciding 1.
  const double p_one = current_bit ? 1.0 - link.p_md : link.p_fa;

  const double s_b = static_cast<double>(params.s_b);
  double isi_mean = fc_mean_offset;
  const std::size_t len = history_counts.size();
  for (std::size_t w = 0; w < len; ++w)
    isi_mean += static_cast<double>(history_counts[w]) * s_b * gains.rx_fc[0][len - w];

  const TailSide side = current_bit ? TailSide::Below : TailSide::AtOrAbove;
  const double lambda0 = s_b * gains.rx_fc[0][0];

  double total = 0.0;
  for (int n = 0; n <= static_cast<int>(K); ++n) {
    const double weight = binom_coeff(static_cast<int>(K), n) *
                          std::pow(p_one, n) * std::pow(1.0 - p_one, static_cast<int>(K) - n);
    if (weight != 0.0)
      total += weight * fc_tail(isi_mean + n * lambda0, thresholds.xi_fc, side);
  }
  return std::clamp(total, 0.0, 1.0);
}

HistoryDistribution history_distribution(std::span<const std::uint8_t> prefix,
                                         const ChannelGains& gains, double s_a,
                                         const Thresholds& thresholds, int isi_window,
                                         bool symmetric_path, std::size_t state_cap) {
  if (isi_window < 0) throw std::invalid_argument("history_distribution: window must be >= 0");
  const std::size_t K = gains.num_receivers();
  const int window = std::min<int>(isi_window, static_cast<int>(prefix.size()));

  HistoryDistribution dist;
  dist.symmetric = symmetric_path;
  dist.window = window;
  if (window == 0) {
    dist.states.push_back({{}, 1.0});
    return dist;
  }

  const auto p1 = decision_profile(prefix, gains, s_a, thresholds);
  const std::size_t first_symbol = prefix.size() - static_cast<std::size_t>(window);

  if (symmetric_path) {
    if (!gains.symmetric() || !thresholds.shared_rx())
      throw std::invalid_argument("history_distribution: symmetric path on asymmetric inputs");
    std::size_t n_states = 1;
    for (int w = 0; w < window; ++w) {
      n_states *= K + 1;
      if (n_states > state_cap)
        throw std::length_error("history_distribution: state space exceeds cap");
    }
    dist.states.push_back({{}, 1.0});
    for (int w = 0; w < window; ++w) {
      const double p = p1[0][first_symbol + static_cast<std::size_t>(w)];
      std::vector<HistoryState> next;
      next.reserve(dist.states.size() * (K + 1));
      for (const auto& st : dist.states) {
        for (int n = 0; n <= static_cast<int>(K); ++n) {
          HistoryState ns = st;
          ns.per_symbol.push_back(static_cast<std::uint8_t>(n));
          ns.weight *= binom_coeff(static_cast<int>(K), n) * std::pow(p, n) *
                       std::pow(1.0 - p, static_cast<int>(K) - n);
          next.push_back(std::move(ns));
        }
      }
      dist.states = std::move(next);
    }
  } else {
    if (K > 8) throw std::length_error("history_distribution: asymmetric path limited to K <= 8");
    std::size_t n_states = 1;
    for (int w = 0; w < window; ++w) {
      n_states <<= K;
      if (n_states > state_cap)
        throw std::length_error("history_distribution: state space exceeds cap");
    }
    dist.states.push_back({{}, 1.0});
    for (int w = 0; w < window; ++w) {
      std::vector<HistoryState> next;
      next.reserve(dist.states.size() << K);
      for (const auto& st : dist.states) {
        for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
          HistoryState ns = st;
          ns.per_symbol.push_back(static_cast<std::uint8_t>(mask));
          double wgt = st.weight;
          for (std::size_t k = 0; k < K; ++k) {
            const double p = p1[k][first_symbol + static_cast<std::size_t>(w)];
            wgt *= (mask & (1u << k)) ? p : 1.0 - p;
          }
          ns.weight = wgt;
          next.push_back(std::move(ns));
        }
      }
      dist.states = std::move(next);
    }
  }
  return dist;
}

namespace {

bool use_symmetric_path(const ChannelGains& gains, const Thresholds& thr, AveragePath path) {
  switch (path) {
    case AveragePath::Symmetric:
      return true;
    case AveragePath::Asymmetric:
      return false;
    case AveragePath::Auto:
    default:
      return gains.symmetric() && thr.shared_rx();
  }
}

}  // namespace

SymbolError q_fc_symbol(std::span<const std::uint8_t> prefix, const ChannelGains& gains,
                        const DiffusionParams& params, const Thresholds& thresholds, double p1,
                        const AveragingOptions& opts) {
  const std::size_t K = gains.num_receivers();
  thresholds.validate(K);
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("q_fc_symbol: p1 must be in [0,1]");
  if (prefix.size() + 1 > static_cast<std::size_t>(gains.lags()))
    throw std::invalid_argument("q_fc_symbol: prefix exceeds gain table");

  const bool sym = use_symmetric_path(gains, thresholds, opts.path);
  const auto dist = history_distribution(prefix, gains, static_cast<double>(params.s_a),
                                         thresholds, opts.isi_window, sym,
                                         opts.history_state_cap);

  // Out-of-window history folds its expected decision into the pooled mean.
  double offset = 0.0;
  const std::size_t window = static_cast<std::size_t>(dist.window);
  if (prefix.size() > window) {
    const auto profile = decision_profile(prefix, gains, static_cast<double>(params.s_a), thresholds);
    const std::size_t j = prefix.size() + 1;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 1; i + window < j; ++i)  // symbols 1 .. j-1-window
        offset += static_cast<double>(params.s_b) * profile[k][i - 1] * gains.rx_fc[k][j - i];
  }

  SymbolError out;
  for (const auto& state : dist.states) {
    if (state.weight == 0.0) continue;
    double qmd, qfa;
    if (sym) {
      std::vector<int> counts(state.per_symbol.begin(), state.per_symbol.end());
      qmd = q_md_fa_sym(prefix, 1, counts, gains, params, thresholds, offset);
      qfa = q_md_fa_sym(prefix, 0, counts, gains, params, thresholds, offset);
    } else {
      std::vector<std::vector<std::uint8_t>> histories(K,
                                                       std::vector<std::uint8_t>(window, 0));
      for (std::size_t w = 0; w < window; ++w)
        for (std::size_t k = 0; k < K; ++k)
          histories[k][w] = (state.per_symbol[w] >> k) & 1u;
      qmd = q_md_fa_asym(prefix, 1, histories, gains, params, thresholds, offset);
      qfa = q_md_fa_asym(prefix, 0, histories, gains, params, thresholds, offset);
    }
    out.q_md += state.weight * qmd;
    out.q_fa += state.weight * qfa;
  }
  out.q_fc = p1 * out.q_md + (1.0 - p1) * out.q_fa;
  return out;
}

namespace {

struct SymbolTask {
  int j = 0;                 // 1-based symbol index
  std::uint64_t prefix_id = 0;
  double weight = 0.0;       // prior weight of the prefix
};

std::vector<std::uint8_t> prefix_bits(std::uint64_t id, int len) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) bits[static_cast<std::size_t>(i)] = (id >> i) & 1ull;
  return bits;
}

ErrorReport finalize_report(const Topology& topo, const Thresholds& thresholds,
                            const AveragingOptions& opts, std::vector<double> q_md,
                            std::vector<double> q_fa, std::vector<double> q_fc) {
  ErrorReport rep;
  rep.q_md = std::move(q_md);
  rep.q_fa = std::move(q_fa);
  rep.q_fc = std::move(q_fc);
  rep.qbar_fc = pairwise_sum(rep.q_fc) / static_cast<double>(rep.q_fc.size());
  rep.topology_hash = topology_hash(topo);
  rep.thresholds = thresholds;
  rep.isi_window = opts.isi_window;
  return rep;
}

}  // namespace

ErrorReport average_error(const Topology& topo, const DiffusionParams& params,
                          const ProtocolTiming& timing, const Thresholds& thresholds, int L,
                          double p1, const ExactAveraging&, const AveragingOptions& opts) {
  if (L < 1) throw std::invalid_argument("average_error: L must be >= 1");
  if (L > 62 || (1ull << (L - 1)) > opts.exact_prefix_cap)
    throw std::length_error("average_error: exact prefix enumeration exceeds cap");
  const ChannelGains gains = build_gains(topo, params, timing, L);

  std::vector<SymbolTask> tasks;
  for (int j = 1; j <= L; ++j) {
    const int len = j - 1;
    const std::uint64_t count = 1ull << len;
    for (std::uint64_t id = 0; id < count; ++id) {
      double w;
      if (opts.prior == PrefixPrior::Uniform) {
        w = 1.0 / static_cast<double>(count);
      } else {
        const int ones = std::popcount(id);
        w = std::pow(p1, ones) * std::pow(1.0 - p1, len - ones);
      }
      tasks.push_back({j, id, w});
    }
  }

  std::vector<SymbolError> slot(tasks.size());
  parallel_for(tasks.size(), opts.threads, [&](std::size_t i) {
    const auto& t = tasks[i];
    const auto bits = prefix_bits(t.prefix_id, t.j - 1);
    slot[i] = q_fc_symbol(bits, gains, params, thresholds, p1, opts);
  });

  std::vector<double> q_md(static_cast<std::size_t>(L), 0.0);
  std::vector<double> q_fa(static_cast<std::size_t>(L), 0.0);
  std::vector<double> q_fc(static_cast<std::size_t>(L), 0.0);
  std::size_t cursor = 0;
  for (int j = 1; j <= L; ++j) {
    const std::uint64_t count = 1ull << (j - 1);
    std::vector<double> wmd, wfa, wfc;
    wmd.reserve(count);
    wfa.reserve(count);
    wfc.reserve(count);
    for (std::uint64_t id = 0; id < count; ++id, ++cursor) {
      wmd.push_back(tasks[cursor].weight * slot[cursor].q_md);
      wfa.push_back(tasks[cursor].weight * slot[cursor].q_fa);
      wfc.push_back(tasks[cursor].weight * slot[cursor].q_fc);
    }
    q_md[static_cast<std::size_t>(j - 1)] = pairwise_sum(wmd);
    q_fa[static_cast<std::size_t>(j - 1)] = pairwise_sum(wfa);
    q_fc[static_cast<std::size_t>(j - 1)] = pairwise_sum(wfc);
  }

  ErrorReport rep = finalize_report(topo, thresholds, opts, std::move(q_md), std::move(q_fa),
                                    std::move(q_fc));
  rep.averaging = "exact";
  return rep;
}

ErrorReport average_error(const Topology& topo, const DiffusionParams& params,
                          const ProtocolTiming& timing, const Thresholds& thresholds, int L,
                          double p1, const MonteCarloAveraging& mc, const AveragingOptions& opts) {
  if (L < 1) throw std::invalid_argument("average_error: L must be >= 1");
  if (mc.samples < 1) throw std::invalid_argument("average_error: need at least one MC sample");
  const ChannelGains gains = build_gains(topo, params, timing, L);

  const std::size_t n = static_cast<std::size_t>(mc.samples);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<SymbolError>> chunk_sums(
      chunks, std::vector<SymbolError>(static_cast<std::size_t>(L)));

  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    auto& acc = chunk_sums[c];
    const std::size_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
    std::vector<std::uint8_t> seq(static_cast<std::size_t>(L));
    for (std::size_t s = lo; s < hi; ++s) {
      Philox rng(mc.seed, static_cast<std::uint64_t>(s));
      for (auto& b : seq) b = rng.next_bernoulli(p1) ? 1 : 0;
      for (int j = 1; j <= L; ++j) {
        const auto e = q_fc_symbol(std::span(seq).first(static_cast<std::size_t>(j - 1)), gains,
                                   params, thresholds, p1, opts);
        acc[static_cast<std::size_t>(j - 1)].q_md += e.q_md;
        acc[static_cast<std::size_t>(j - 1)].q_fa += e.q_fa;
        acc[static_cast<std::size_t>(j - 1)].q_fc += e.q_fc;
      }
    }
  });

  std::vector<double> q_md(static_cast<std::size_t>(L), 0.0);
  std::vector<double> q_fa(static_cast<std::size_t>(L), 0.0);
  std::vector<double> q_fc(static_cast<std::size_t>(L), 0.0);
  for (int j = 0; j < L; ++j) {
    std::vector<double> md, fa, fc;
    md.reserve(chunks);
    fa.reserve(chunks);
    fc.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
      md.push_back(chunk_sums[c][static_cast<std::size_t>(j)].q_md);
      fa.push_back(chunk_sums[c][static_cast<std::size_t>(j)].q_fa);
      fc.push_back(chunk_sums[c][static_cast<std::size_t>(j)].q_fc);
    }
    q_md[static_cast<std::size_t>(j)] = pairwise_sum(md) / static_cast<double>(n);
    q_fa[static_cast<std::size_t>(j)] = pairwise_sum(fa) / static_cast<double>(n);
    q_fc[static_cast<std::size_t>(j)] = pairwise_sum(fc) / static_cast<double>(n);
  }

  ErrorReport rep = finalize_report(topo, thresholds, opts, std::move(q_md), std::move(q_fa),
                                    std::move(q_fc));
  rep.averaging = "mc";
  rep.mc_seed = mc.seed;
  rep.mc_samples = mc.samples;
  return rep;
}

}  // namespace coopmc
