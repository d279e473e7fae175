#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coopmc/channel.hpp"
#include "coopmc/error_model.hpp"

namespace coopmc {

// Threshold-sweep evaluator. The prefix enumeration, TX-side means and
// FC-side lag structure do not depend on the thresholds, so they are
// precomputed once and shared across the whole (xi_rx, xi_fc) grid. Row
// evaluation factorizes the realization sums as a convolution of independent
// per-receiver contributions, which is algebraically identical to the
// realization enumeration used by q_fc_symbol / average_error (the unit suite
// pins the two paths against each other).
class PrefixEnsemble {
 public:
  PrefixEnsemble(const ChannelGains& gains, const DiffusionParams& params, int L, double p1,
                 const AveragingOptions& opts = {});

  // Sequence-averaged global error of the pooled-report scheme for one RX
  // threshold over a list of FC thresholds.
  std::vector<double> sd_row(long long xi_rx, std::span<const long long> xi_fc) const;

  // Majority baseline: the FC decodes each receiver's report against the
  // per-type threshold, then takes an N-out-of-K vote.
  std::vector<double> majority_row(long long xi_rx, std::span<const long long> xi_type,
                                   int vote_threshold) const;

  // Single link: the decision of receiver 0 is final.
  double single_link_qbar(long long xi_rx) const;

  int sequence_length() const { return L_; }
  std::size_t num_receivers() const { return K_; }

 private:
  struct Task {
    double weight = 0.0;  // prefix prior / L
    int j = 0;
    int win = 0;
    std::uint32_t win_off = 0;   // win*K entries
    std::uint32_t tail_off = 0;  // tail_count entries
    std::uint32_t tail_count = 0;
    std::uint32_t mu_off = 0;  // K entries in mu0_/mu1_
  };

  struct MeanLambda {
    double tx_mean = 0.0;  // TX-side Poisson mean at that symbol
    double lambda = 0.0;   // FC-side per-report mean for the lag
  };

  std::size_t K_ = 0;
  int L_ = 0;
  double p1_ = 0.5;
  double s_b_ = 0.0;
  std::vector<double> lambda0_;  // per receiver, current-lag FC mean per report
  std::vector<Task> tasks_;
  std::vector<MeanLambda> win_pool_;
  std::vector<MeanLambda> tail_pool_;
  std::vector<double> mu0_pool_;  // ISI-only TX-side mean, per receiver
  std::vector<double> mu1_pool_;  // with the current "1" added
  std::size_t hist_len_ = 0;      // pmf histogram length
};

}  // namespace coopmc
