#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coopmc/channel.hpp"
#include "coopmc/geometry.hpp"
#include "coopmc/rng.hpp"
#include "coopmc/schemes.hpp"

namespace coopmc {

struct SimConfig {
  double sim_step = 1e-5;  // Brownian marching step (marching mode only)
  std::uint64_t rng_seed = 1;
  long long trials = 10000;
  // Molecules are dropped this many symbol intervals after emission;
  // 0 keeps every molecule for the whole sequence.
  int cull_horizon = 0;
  // Opt-in approximation: drop molecules that cannot reach any observer
  // within 6 sigma of their remaining diffusion budget.
  bool aggressive_cull = false;
  // Free diffusion past passive observers is exact for any step length, so
  // by default molecules jump directly between consecutive observation and
  // emission events. Turning this off marches in sim_step increments with
  // events scheduled between steps; the two modes sample the same law.
  bool event_jumps = true;
  SchemeKind scheme = SchemeKind::SdConstant;
  int vote_threshold = 0;  // majority: 0 = ceil((K+1)/2)
  int threads = 0;
  bool trial_log = false;  // keep per-trial records for the debug log

  void validate() const;
};

struct MoleculeBatch {
  double birth = 0.0;  // emission time, seconds
  double t = 0.0;      // time the positions are valid for
  int emitter = -1;    // receiver index for reports, -1 for the TX
  std::vector<double> x, y, z;  // micrometres

  std::size_t size() const { return x.size(); }
};

struct MoleculeCloud {
  std::vector<MoleculeBatch> batches;

  std::size_t population() const;
};

// One Brownian increment of duration dt for every molecule: independent
// zero-mean Gaussians with variance 2*D*dt on each coordinate.
void step_brownian(MoleculeCloud& cloud, double d_coeff, double dt, Philox& rng);

// Molecules with |pos - centre| <= radius; emitter_filter < 0 counts all.
long long count_inside(const MoleculeCloud& cloud, const SphericalObserver& observer,
                       int emitter_filter = -1);

struct SymbolOutcome {
  std::uint8_t tx_bit = 0;
  std::vector<std::uint8_t> rx_decisions;
  long long fc_count = 0;  // pooled type-B count (sd), votes (majority), RX statistic (single link)
  std::uint8_t fc_decision = 0;
};

// Runs the full three-phase protocol for one TX sequence. Dynamics draw from
// the documented substream (rng_seed, 2*trial_index + 1).
std::vector<SymbolOutcome> run_sequence_trial(const Topology& topo, const DiffusionParams& params,
                                              const ProtocolTiming& timing,
                                              const Thresholds& thresholds,
                                              std::span<const std::uint8_t> tx_sequence,
                                              const SimConfig& cfg, std::uint64_t trial_index = 0);

struct SimEstimate {
  double qbar = 0.0;
  double se_pooled = 0.0;  // binomial on pooled symbol-error indicators
  double se_trial = 0.0;   // from the spread of per-trial error fractions
  long long trials = 0;
  int sequence_length = 0;
  long long total_errors = 0;
  // per-symbol integer tallies, index j-1
  std::vector<long long> err_when_1, err_when_0, ones, zeros;

  double per_symbol_error(int j) const;
};

// Fresh random TX sequence per trial (bits from substream 2*trial_index).
// With cfg.trial_log set and trial_log non-null, one newline-delimited JSON
// record per trial is stored in trial order.
SimEstimate estimate_error(const Topology& topo, const DiffusionParams& params,
                           const ProtocolTiming& timing, const Thresholds& thresholds, int L,
                           double p1, const SimConfig& cfg,
                           std::vector<std::string>* trial_log = nullptr);

}  // namespace coopmc
