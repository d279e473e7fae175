#include "coopmc/schemes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "coopmc/parallel.hpp"
#include "coopmc/poisson.hpp"
#include "coopmc/rng.hpp"

namespace coopmc {

int SchemeSpec::resolved_vote_threshold(std::size_t k) const {
  if (vote_threshold > 0) return vote_threshold;
  return static_cast<int>((k + 2) / 2);  // ceil((K+1)/2)
}

const char* scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::SdConstant:
      return "sd_constant";
    case SchemeKind::Majority:
      return "majority";
    case SchemeKind::SingleLink:
      return "single_link";
  }
  return "unknown";
}

namespace {

std::vector<std::uint8_t> prefix_bits(std::uint64_t id, int len) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) bits[static_cast<std::size_t>(i)] = (id >> i) & 1ull;
  return bits;
}

// Shared exact/MC prefix averaging over a per-prefix symbol evaluator.
template <typename Eval>
ErrorReport average_over_prefixes_exact(const Topology& topo, const Thresholds& thresholds, int L,
                                        double p1, const AveragingOptions& opts, Eval&& eval) {
  if (L < 1) throw std::invalid_argument("average: L must be >= 1");
  if (L > 62 || (1ull << (L - 1)) > opts.exact_prefix_cap)
    throw std::length_error("average: exact prefix enumeration exceeds cap");

  struct Cell {
    double md = 0.0, fa = 0.0, fc = 0.0;
  };
  std::vector<std::pair<int, std::uint64_t>> tasks;
  for (int j = 1; j <= L; ++j)
    for (std::uint64_t id = 0; id < (1ull << (j - 1)); ++id) tasks.emplace_back(j, id);

  std::vector<Cell> slot(tasks.size());
  parallel_for(tasks.size(), opts.threads, [&](std::size_t i) {
    const auto [j, id] = tasks[i];
    const auto bits = prefix_bits(id, j - 1);
    const auto [qmd, qfa] = eval(bits);
    double w;
    if (opts.prior == PrefixPrior::Uniform) {
      w = 1.0 / static_cast<double>(1ull << (j - 1));
    } else {
      const int ones = std::popcount(id);
      w = std::pow(p1, ones) * std::pow(1.0 - p1, j - 1 - ones);
    }
    slot[i] = {w * qmd, w * qfa, w * (p1 * qmd + (1.0 - p1) * qfa)};
  });

  std::vector<double> q_md(static_cast<std::size_t>(L), 0.0), q_fa(q_md), q_fc(q_md);
  std::size_t cursor = 0;
  for (int j = 1; j <= L; ++j) {
    std::vector<double> md, fa, fc;
    for (std::uint64_t id = 0; id < (1ull << (j - 1)); ++id, ++cursor) {
      md.push_back(slot[cursor].md);
      fa.push_back(slot[cursor].fa);
      fc.push_back(slot[cursor].fc);
    }
    q_md[static_cast<std::size_t>(j - 1)] = pairwise_sum(md);
    q_fa[static_cast<std::size_t>(j - 1)] = pairwise_sum(fa);
    q_fc[static_cast<std::size_t>(j - 1)] = pairwise_sum(fc);
  }

  ErrorReport rep;
  rep.q_md = std::move(q_md);
  rep.q_fa = std::move(q_fa);
  rep.q_fc = std::move(q_fc);
  rep.qbar_fc = pairwise_sum(rep.q_fc) / static_cast<double>(L);
  rep.topology_hash = topology_hash(topo);
  rep.thresholds = thresholds;
  rep.isi_window = opts.isi_window;
  rep.averaging = "exact";
  return rep;
}

template <typename Eval>
ErrorReport average_over_prefixes_mc(const Topology& topo, const Thresholds& thresholds, int L,
                                     double p1, const MonteCarloAveraging& mc,
                                     const AveragingOptions& opts, Eval&& eval) {
  if (L < 1) throw std::invalid_argument("average: L must be >= 1");
  if (mc.samples < 1) throw std::invalid_argument("average: need at least one MC sample");

  const std::size_t n = static_cast<std::size_t>(mc.samples);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  struct Cell {
    double md = 0.0, fa = 0.0, fc = 0.0;
  };
  std::vector<std::vector<Cell>> sums(chunks, std::vector<Cell>(static_cast<std::size_t>(L)));

  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    const std::size_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
    std::vector<std::uint8_t> seq(static_cast<std::size_t>(L));
    for (std::size_t s = lo; s < hi; ++s) {
      Philox rng(mc.seed, static_cast<std::uint64_t>(s));
      for (auto& b : seq) b = rng.next_bernoulli(p1) ? 1 : 0;
      for (int j = 1; j <= L; ++j) {
        const auto [qmd, qfa] = eval(std::span(seq).first(static_cast<std::size_t>(j - 1)));
        auto& cell = sums[c][static_cast<std::size_t>(j - 1)];
        cell.md += qmd;
        cell.fa += qfa;
        cell.fc += p1 * qmd + (1.0 - p1) * qfa;
      }
    }
  });

  std::vector<double> q_md(static_cast<std::size_t>(L), 0.0), q_fa(q_md), q_fc(q_md);
  for (int j = 0; j < L; ++j) {
    std::vector<double> md, fa, fc;
    for (std::size_t c = 0; c < chunks; ++c) {
      md.push_back(sums[c][static_cast<std::size_t>(j)].md);
      fa.push_back(sums[c][static_cast<std::size_t>(j)].fa);
      fc.push_back(sums[c][static_cast<std::size_t>(j)].fc);
    }
    q_md[static_cast<std::size_t>(j)] = pairwise_sum(md) / static_cast<double>(n);
    q_fa[static_cast<std::size_t>(j)] = pairwise_sum(fa) / static_cast<double>(n);
    q_fc[static_cast<std::size_t>(j)] = pairwise_sum(fc) / static_cast<double>(n);
  }

  ErrorReport rep;
  rep.q_md = std::move(q_md);
  rep.q_fa = std::move(q_fa);
  rep.q_fc = std::move(q_fc);
  rep.qbar_fc = pairwise_sum(rep.q_fc) / static_cast<double>(L);
  rep.topology_hash = topology_hash(topo);
  rep.thresholds = thresholds;
  rep.isi_window = opts.isi_window;
  rep.averaging = "mc";
  rep.mc_seed = mc.seed;
  rep.mc_samples = mc.samples;
  return rep;
}

}  // namespace

ErrorReport single_link_error(const Topology& topo, const DiffusionParams& params,
                              const ProtocolTiming& timing, long long xi_rx, int L, double p1,
                              const ExactAveraging&, const AveragingOptions& opts) {
  if (xi_rx < 1) throw std::invalid_argument("single_link_error: xi_rx must be >= 1");
  const ChannelGains gains = build_gains(topo, params, timing, L);
  auto eval = [&](std::span<const std::uint8_t> prefix) {
    const LinkErrors link =
        link_md_fa(prefix, gains.tx_rx[0], static_cast<double>(params.s_a), xi_rx);
    return std::pair(link.p_md, link.p_fa);
  };
  auto rep = average_over_prefixes_exact(topo, Thresholds::shared(topo.num_receivers(), xi_rx, 1),
                                         L, p1, opts, eval);
  return rep;
}

ErrorReport single_link_error(const Topology& topo, const DiffusionParams& params,
                              const ProtocolTiming& timing, long long xi_rx, int L, double p1,
                              const MonteCarloAveraging& mc, const AveragingOptions& opts) {
  if (xi_rx < 1) throw std::invalid_argument("single_link_error: xi_rx must be >= 1");
  const ChannelGains gains = build_gains(topo, params, timing, L);
  auto eval = [&](std::span<const std::uint8_t> prefix) {
    const LinkErrors link =
        link_md_fa(prefix, gains.tx_rx[0], static_cast<double>(params.s_a), xi_rx);
    return std::pair(link.p_md, link.p_fa);
  };
  return average_over_prefixes_mc(topo, Thresholds::shared(topo.num_receivers(), xi_rx, 1), L, p1,
                                  mc, opts, eval);
}

double majority_q_symbol(std::span<const std::uint8_t> prefix, int current_bit,
                         const ChannelGains& gains, const DiffusionParams& params,
                         const Thresholds& thresholds, int vote_threshold,
                         const AveragingOptions& opts) {
  const std::size_t K = gains.num_receivers();
  thresholds.validate(K);
  if (vote_threshold < 1 || vote_threshold > static_cast<int>(K))
    throw std::invalid_argument("majority_q_symbol: vote threshold must be in 1..K");
  const std::size_t j = prefix.size() + 1;
  if (j > static_cast<std::size_t>(gains.lags()))
    throw std::invalid_argument("majority_q_symbol: prefix exceeds gain table");

  const double s_a = static_cast<double>(params.s_a);
  const double s_b = static_cast<double>(params.s_b);
  const auto p1 = decision_profile(prefix, gains, s_a, thresholds);
  const int win = std::min<int>(opts.isi_window, static_cast<int>(prefix.size()));
  const std::size_t first_win = prefix.size() - static_cast<std::size_t>(win);

  // Marginal probability that the FC decodes receiver k's report as 1.
  std::vector<double> decode(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double tail = 0.0;
    for (std::size_t i = 1; i <= first_win; ++i)
      tail += s_b * p1[k][i - 1] * gains.rx_fc[k][j - i];

    const LinkErrors link = link_md_fa(prefix, gains.tx_rx[k], s_a, thresholds.xi_rx[k]);
    const double p_cur = current_bit ? 1.0 - link.p_md : link.p_fa;
    const double lambda0 = s_b * gains.rx_fc[k][0];

    for (std::uint32_t h = 0; h < (1u << win); ++h) {
      double hw = 1.0;
      double mu_isi = tail;
      for (int w = 0; w < win; ++w) {
        const std::size_t i = first_win + static_cast<std::size_t>(w) + 1;  // symbol index
        const double p = p1[k][i - 1];
        if (h & (1u << w)) {
          hw *= p;
          mu_isi += s_b * gains.rx_fc[k][j - i];
        } else {
          hw *= 1.0 - p;
        }
      }
      if (hw == 0.0) continue;
      decode[k] += hw * ((1.0 - p_cur) * poisson_sf(thresholds.xi_fc - 1, mu_isi) +
                         p_cur * poisson_sf(thresholds.xi_fc - 1, mu_isi + lambda0));
    }
  }

  // Votes are independent across receivers: Poisson-binomial tail.
  std::vector<double> dp(K + 1, 0.0);
  dp[0] = 1.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t v = K; v-- > 0;) {
      dp[v + 1] += dp[v] * decode[k];
      dp[v] *= 1.0 - decode[k];
    }
  }
  double below = 0.0;
  for (int v = 0; v < vote_threshold; ++v) below += dp[static_cast<std::size_t>(v)];
  return current_bit ? below : 1.0 - below;
}

ErrorReport majority_rule_error(const Topology& topo, const DiffusionParams& params,
                                const ProtocolTiming& timing, const Thresholds& thresholds,
                                const SchemeSpec& scheme, int L, double p1, const ExactAveraging&,
                                const AveragingOptions& opts) {
  const ChannelGains gains = build_gains(topo, params, timing, L);
  const int n_vote = scheme.resolved_vote_threshold(topo.num_receivers());
  auto eval = [&](std::span<const std::uint8_t> prefix) {
    return std::pair(majority_q_symbol(prefix, 1, gains, params, thresholds, n_vote, opts),
                     majority_q_symbol(prefix, 0, gains, params, thresholds, n_vote, opts));
  };
  return average_over_prefixes_exact(topo, thresholds, L, p1, opts, eval);
}

ErrorReport majority_rule_error(const Topology& topo, const DiffusionParams& params,
                                const ProtocolTiming& timing, const Thresholds& thresholds,
                                const SchemeSpec& scheme, int L, double p1,
                                const MonteCarloAveraging& mc, const AveragingOptions& opts) {
  const ChannelGains gains = build_gains(topo, params, timing, L);
  const int n_vote = scheme.resolved_vote_threshold(topo.num_receivers());
  auto eval = [&](std::span<const std::uint8_t> prefix) {
    return std::pair(majority_q_symbol(prefix, 1, gains, params, thresholds, n_vote, opts),
                     majority_q_symbol(prefix, 0, gains, params, thresholds, n_vote, opts));
  };
  return average_over_prefixes_mc(topo, thresholds, L, p1, mc, opts, eval);
}

}  // namespace coopmc
