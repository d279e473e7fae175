#include "coopmc/error_surface.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "coopmc/poisson.hpp"

namespace coopmc {

namespace {

// Convolution support for a Poisson(lambda) factor: tail mass beyond this is
// below 1e-19 at the magnitudes used here.
std::size_t poisson_support(double lambda) {
  return static_cast<std::size_t>(std::ceil(lambda + 12.0 * std::sqrt(lambda) + 25.0));
}

// Trims a pmf table to the entries that matter for double accumulation.
std::size_t effective_support(std::span<const double> pmf, double mean) {
  std::size_t s = pmf.size();
  while (s > 1 && pmf[s - 1] < 1e-22 && static_cast<double>(s - 1) > mean) --s;
  return s;
}

// In-place convolution of dist with the compound factor
// (1-p) delta_0 + p Poisson(lambda), truncated to dist.size().
void convolve_compound(std::vector<double>& dist, std::vector<double>& scratch, double p,
                       double lambda, std::vector<double>& pmf_buf) {
  if (p == 0.0 || lambda == 0.0) return;  // identity factor
  std::size_t support = std::min(dist.size(), poisson_support(lambda) + 1);
  if (pmf_buf.size() < support) pmf_buf.resize(support);
  poisson_pmf_table(lambda, std::span(pmf_buf).first(support));
  support = effective_support(std::span(pmf_buf).first(support), lambda);

  scratch.assign(dist.size(), 0.0);
  const double q = 1.0 - p;
  for (std::size_t c = 0; c < dist.size(); ++c) {
    const double d = dist[c];
    if (d == 0.0) continue;
    scratch[c] += q * d;
    const std::size_t top = std::min(support, dist.size() - c);
    for (std::size_t u = 0; u < top; ++u) scratch[c + u] += p * pmf_buf[u] * d;
  }
  dist.swap(scratch);
}

double prefix_weight(std::uint64_t id, int len, double p1, PrefixPrior prior) {
  if (prior == PrefixPrior::Uniform) return 1.0 / static_cast<double>(1ull << len);
  const int ones = std::popcount(id);
  return std::pow(p1, ones) * std::pow(1.0 - p1, len - ones);
}

}  // namespace

PrefixEnsemble::PrefixEnsemble(const ChannelGains& gains, const DiffusionParams& params, int L,
                               double p1, const AveragingOptions& opts) {
  if (L < 1 || L > gains.lags()) throw std::invalid_argument("PrefixEnsemble: bad L");
  if (L > 62 || (1ull << (L - 1)) > opts.exact_prefix_cap)
    throw std::length_error("PrefixEnsemble: exact prefix enumeration exceeds cap");
  K_ = gains.num_receivers();
  L_ = L;
  p1_ = p1;
  s_b_ = static_cast<double>(params.s_b);
  const double s_a = static_cast<double>(params.s_a);

  lambda0_.resize(K_);
  for (std::size_t k = 0; k < K_; ++k) lambda0_[k] = s_b_ * gains.rx_fc[k][0];

  // Upper bound on the pooled FC mean (every report present at every lag).
  double mu_bound = 0.0;
  for (std::size_t k = 0; k < K_; ++k)
    for (int l = 0; l < L; ++l) mu_bound += s_b_ * gains.rx_fc[k][static_cast<std::size_t>(l)];
  hist_len_ = poisson_support(mu_bound) + 1;

  std::vector<std::uint8_t> bits;
  for (int j = 1; j <= L; ++j) {
    const int len = j - 1;
    const int win = std::min(opts.isi_window, len);
    for (std::uint64_t id = 0; id < (1ull << len); ++id) {
      bits.assign(static_cast<std::size_t>(len), 0);
      for (int i = 0; i < len; ++i) bits[static_cast<std::size_t>(i)] = (id >> i) & 1ull;

      Task t;
      t.weight = prefix_weight(id, len, p1, opts.prior) / static_cast<double>(L);
      t.j = j;
      t.win = win;
      t.mu_off = static_cast<std::uint32_t>(mu0_pool_.size());
      t.win_off = static_cast<std::uint32_t>(win_pool_.size());
      t.tail_off = static_cast<std::uint32_t>(tail_pool_.size());

      for (std::size_t k = 0; k < K_; ++k) {
        double isi = 0.0;
        for (int i = 1; i <= len; ++i)
          if (bits[static_cast<std::size_t>(i - 1)])
            isi += gains.tx_rx[k][static_cast<std::size_t>(j - i)];
        mu0_pool_.push_back(s_a * isi);
        mu1_pool_.push_back(s_a * (isi + gains.tx_rx[k][0]));
      }
      // window symbols i = j-win .. j-1, oldest first, receiver-major per symbol
      for (int i = j - win; i <= len; ++i) {
        for (std::size_t k = 0; k < K_; ++k) {
          double mean = 0.0;
          for (int ii = 1; ii <= i; ++ii)
            if (bits[static_cast<std::size_t>(ii - 1)])
              mean += gains.tx_rx[k][static_cast<std::size_t>(i - ii)];
          win_pool_.push_back({s_a * mean, s_b_ * gains.rx_fc[k][static_cast<std::size_t>(j - i)]});
        }
      }
      // older symbols feed the mean-field tail
      std::uint32_t tail_count = 0;
      for (int i = 1; i < j - win; ++i) {
        for (std::size_t k = 0; k < K_; ++k) {
          double mean = 0.0;
          for (int ii = 1; ii <= i; ++ii)
            if (bits[static_cast<std::size_t>(ii - 1)])
              mean += gains.tx_rx[k][static_cast<std::size_t>(i - ii)];
          tail_pool_.push_back({s_a * mean, s_b_ * gains.rx_fc[k][static_cast<std::size_t>(j - i)]});
          ++tail_count;
        }
      }
      t.tail_count = tail_count;
      tasks_.push_back(t);
    }
  }
}

namespace {

// Per-row cache of Pr(decide 1) keyed by the exact mean bits; the same
// subset-sum means recur across thousands of prefixes.
class DecideCache {
 public:
  explicit DecideCache(long long xi_rx) : xi_(xi_rx) {}
  double operator()(double mean) {
    const std::uint64_t key = std::bit_cast<std::uint64_t>(mean);
    auto [it, inserted] = map_.try_emplace(key, 0.0);
    if (inserted) it->second = poisson_sf(xi_ - 1, mean);
    return it->second;
  }

 private:
  long long xi_;
  std::unordered_map<std::uint64_t, double> map_;
};

}  // namespace

std::vector<double> PrefixEnsemble::sd_row(long long xi_rx, std::span<const long long> xi_fc) const {
  if (xi_rx < 1) throw std::invalid_argument("sd_row: xi_rx must be >= 1");
  DecideCache p_one(xi_rx);

  std::vector<double> h_md(hist_len_, 0.0), h_fa(hist_len_, 0.0);
  std::vector<double> dist, scratch, pmf_buf, dist_cur;
  double fa_weight = 0.0, md_weight = 0.0;

  for (const auto& t : tasks_) {
    // Mean-field tail: expected out-of-window reports as a deterministic mean.
    double base = 0.0;
    for (std::uint32_t u = 0; u < t.tail_count; ++u) {
      const auto& ml = tail_pool_[t.tail_off + u];
      base += p_one(ml.tx_mean) * ml.lambda;
    }

    dist.assign(hist_len_, 0.0);
    if (base > 0.0) {
      const std::size_t support = std::min(hist_len_, poisson_support(base) + 1);
      poisson_pmf_table(base, std::span(dist).first(support));
    } else {
      dist[0] = 1.0;
    }
    const std::size_t win_entries = static_cast<std::size_t>(t.win) * K_;
    for (std::size_t u = 0; u < win_entries; ++u) {
      const auto& ml = win_pool_[t.win_off + u];
      convolve_compound(dist, scratch, p_one(ml.tx_mean), ml.lambda, pmf_buf);
    }

    for (int b = 0; b < 2; ++b) {
      dist_cur = dist;
      for (std::size_t k = 0; k < K_; ++k) {
        const double mu = b ? mu1_pool_[t.mu_off + k] : mu0_pool_[t.mu_off + k];
        convolve_compound(dist_cur, scratch, p_one(mu), lambda0_[k], pmf_buf);
      }
      const double w = t.weight * (b ? p1_ : 1.0 - p1_);
      auto& h = b ? h_md : h_fa;
      (b ? md_weight : fa_weight) += w;
      for (std::size_t c = 0; c < hist_len_; ++c) h[c] += w * dist_cur[c];
    }
  }

  // Q(xi) = P(pooled < xi | md side) + P(pooled >= xi | fa side)
  std::vector<double> cum_md(hist_len_ + 1, 0.0), cum_fa(hist_len_ + 1, 0.0);
  for (std::size_t c = 0; c < hist_len_; ++c) {
    cum_md[c + 1] = cum_md[c] + h_md[c];
    cum_fa[c + 1] = cum_fa[c] + h_fa[c];
  }
  std::vector<double> row(xi_fc.size());
  for (std::size_t i = 0; i < xi_fc.size(); ++i) {
    const auto xi = static_cast<std::size_t>(std::min<long long>(
        xi_fc[i], static_cast<long long>(hist_len_)));
    row[i] = cum_md[xi] + (fa_weight - cum_fa[xi]);
  }
  return row;
}

std::vector<double> PrefixEnsemble::majority_row(long long xi_rx, std::span<const long long> xi_type,
                                                 int vote_threshold) const {
  if (xi_rx < 1) throw std::invalid_argument("majority_row: xi_rx must be >= 1");
  if (vote_threshold < 1 || vote_threshold > static_cast<int>(K_))
    throw std::invalid_argument("majority_row: vote threshold must be in 1..K");
  DecideCache p_one(xi_rx);

  // sf tables, indexed by requested threshold, per receiver and current bit
  const std::size_t F = xi_type.size();
  std::vector<double> q_tilde(2 * K_ * F, 0.0);
  std::vector<double> pmf_buf, suffix;
  std::vector<double> row(F, 0.0);
  std::vector<double> vote_dp(K_ + 1);

  for (const auto& t : tasks_) {
    std::fill(q_tilde.begin(), q_tilde.end(), 0.0);
    for (std::size_t k = 0; k < K_; ++k) {
      // tail entries are receiver-major per symbol: entry u belongs to
      // receiver u % K
      double tail_k = 0.0;
      for (std::uint32_t u = static_cast<std::uint32_t>(k); u < t.tail_count;
           u += static_cast<std::uint32_t>(K_)) {
        const auto& ml = tail_pool_[t.tail_off + u];
        tail_k += p_one(ml.tx_mean) * ml.lambda;
      }
      // own-window states of this receiver
      const int win = t.win;
      std::vector<double> win_p(static_cast<std::size_t>(win));
      std::vector<double> win_lambda(static_cast<std::size_t>(win));
      for (int w = 0; w < win; ++w) {
        const auto& ml = win_pool_[t.win_off + static_cast<std::size_t>(w) * K_ + k];
        win_p[static_cast<std::size_t>(w)] = p_one(ml.tx_mean);
        win_lambda[static_cast<std::size_t>(w)] = ml.lambda;
      }
      const double p_cur_1 = p_one(mu1_pool_[t.mu_off + k]);
      const double p_cur_0 = p_one(mu0_pool_[t.mu_off + k]);

      for (std::uint32_t h = 0; h < (1u << win); ++h) {
        double hw = 1.0;
        double mu_isi = tail_k;
        for (int w = 0; w < win; ++w) {
          if (h & (1u << w)) {
            hw *= win_p[static_cast<std::size_t>(w)];
            mu_isi += win_lambda[static_cast<std::size_t>(w)];
          } else {
            hw *= 1.0 - win_p[static_cast<std::size_t>(w)];
          }
        }
        if (hw == 0.0) continue;
        for (int r = 0; r < 2; ++r) {
          const double mu = mu_isi + (r ? lambda0_[k] : 0.0);
          // Pr(count >= xi) for every requested threshold
          const std::size_t support = poisson_support(mu) + 1;
          if (pmf_buf.size() < support) pmf_buf.resize(support);
          poisson_pmf_table(mu, std::span(pmf_buf).first(support));
          if (suffix.size() < support + 1) suffix.resize(support + 1);
          suffix[support] = 0.0;
          for (std::size_t c = support; c-- > 0;) suffix[c] = suffix[c + 1] + pmf_buf[c];
          for (std::size_t f = 0; f < F; ++f) {
            const auto xi = static_cast<std::size_t>(xi_type[f]);
            const double sf = xi < support ? suffix[xi] : 0.0;
            const double w1 = r ? p_cur_1 : 1.0 - p_cur_1;
            const double w0 = r ? p_cur_0 : 1.0 - p_cur_0;
            q_tilde[(0 * K_ + k) * F + f] += hw * w0 * sf;  // current bit 0
            q_tilde[(1 * K_ + k) * F + f] += hw * w1 * sf;  // current bit 1
          }
        }
      }
    }

    for (std::size_t f = 0; f < F; ++f) {
      for (int b = 0; b < 2; ++b) {
        // Poisson-binomial over receivers of the decoded-1 probabilities
        std::fill(vote_dp.begin(), vote_dp.end(), 0.0);
        vote_dp[0] = 1.0;
        for (std::size_t k = 0; k < K_; ++k) {
          const double q = q_tilde[(static_cast<std::size_t>(b) * K_ + k) * F + f];
          for (std::size_t v = K_; v-- > 0;) {
            vote_dp[v + 1] += vote_dp[v] * q;
            vote_dp[v] *= 1.0 - q;
          }
        }
        double below = 0.0;
        for (int v = 0; v < vote_threshold; ++v) below += vote_dp[static_cast<std::size_t>(v)];
        const double err = b ? below : 1.0 - below;
        row[f] += t.weight * (b ? p1_ : 1.0 - p1_) * err;
      }
    }
  }
  return row;
}

double PrefixEnsemble::single_link_qbar(long long xi_rx) const {
  if (xi_rx < 1) throw std::invalid_argument("single_link_qbar: xi_rx must be >= 1");
  double acc = 0.0;
  for (const auto& t : tasks_) {
    const double q_md = poisson_cdf(xi_rx - 1, mu1_pool_[t.mu_off]);
    const double q_fa = poisson_sf(xi_rx - 1, mu0_pool_[t.mu_off]);
    acc += t.weight * (p1_ * q_md + (1.0 - p1_) * q_fa);
  }
  return acc;
}

}  // namespace coopmc
