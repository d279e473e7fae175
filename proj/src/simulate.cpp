#include "coopmc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coopmc/parallel.hpp"

namespace coopmc {

void SimConfig::validate() const {
  if (!(sim_step > 0.0)) throw std::invalid_argument("sim: sim_step must be positive");
  if (trials < 1) throw std::invalid_argument("sim: trials must be >= 1");
  if (cull_horizon < 0) throw std::invalid_argument("sim: cull_horizon must be >= 0");
}

std::size_t MoleculeCloud::population() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.size();
  return n;
}

namespace {

constexpr double kMPerUm = 1e-6;

// sigma in micrometres for a Brownian increment of dt seconds
double step_sigma_um(double d_coeff, double dt) { return std::sqrt(2.0 * d_coeff * dt) / kMPerUm; }

void advance_batch(MoleculeBatch& batch, double d_coeff, double dt, Philox& rng) {
  if (dt == 0.0) return;
  const double sigma = step_sigma_um(d_coeff, dt);
  const std::size_t n = batch.size();
  for (std::size_t i = 0; i < n; ++i) batch.x[i] += sigma * rng.next_normal();
  for (std::size_t i = 0; i < n; ++i) batch.y[i] += sigma * rng.next_normal();
  for (std::size_t i = 0; i < n; ++i) batch.z[i] += sigma * rng.next_normal();
  batch.t += dt;
}

// Advance a batch to an event time: either one exact jump, or sim_step
// marching with the event as an explicit intermediate boundary.
void advance_batch_to(MoleculeBatch& batch, double t_target, double d_coeff, const SimConfig& cfg,
                      Philox& rng) {
  if (t_target <= batch.t) return;
  if (cfg.event_jumps) {
    advance_batch(batch, d_coeff, t_target - batch.t, rng);
    return;
  }
  while (batch.t + cfg.sim_step < t_target - 1e-15) advance_batch(batch, d_coeff, cfg.sim_step, rng);
  advance_batch(batch, d_coeff, t_target - batch.t, rng);
  batch.t = t_target;  // absorb rounding drift
}

long long count_batch_inside(const MoleculeBatch& batch, const SphericalObserver& obs) {
  const double r2 = obs.radius * obs.radius;
  const double cx = obs.center.x, cy = obs.center.y, cz = obs.center.z;
  long long count = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double dx = batch.x[i] - cx, dy = batch.y[i] - cy, dz = batch.z[i] - cz;
    if (dx * dx + dy * dy + dz * dz <= r2) ++count;
  }
  return count;
}

// Jump a batch to the sampling instant and tally sphere occupancy in the same
// pass; the per-molecule draw order (x, y, z) matches advance_batch.
template <std::size_t MaxObs>
void jump_and_count(MoleculeBatch& batch, double t_target, double d_coeff, Philox& rng,
                    std::span<const SphericalObserver> observers, long long* counts) {
  const double dt = t_target - batch.t;
  const double sigma = dt > 0.0 ? step_sigma_um(d_coeff, dt) : 0.0;
  const std::size_t n_obs = observers.size();
  double cx[MaxObs], cy[MaxObs], cz[MaxObs], r2[MaxObs];
  for (std::size_t o = 0; o < n_obs; ++o) {
    cx[o] = observers[o].center.x;
    cy[o] = observers[o].center.y;
    cz[o] = observers[o].center.z;
    r2[o] = observers[o].radius * observers[o].radius;
  }
  const std::size_t n = batch.size();
  for (std::size_t i = 0; i < n; ++i) {
    double x = batch.x[i], y = batch.y[i], z = batch.z[i];
    if (sigma != 0.0) {
      x += sigma * rng.next_normal();
      y += sigma * rng.next_normal();
      z += sigma * rng.next_normal();
      batch.x[i] = x;
      batch.y[i] = y;
      batch.z[i] = z;
    }
    for (std::size_t o = 0; o < n_obs; ++o) {
      const double dx = x - cx[o], dy = y - cy[o], dz = z - cz[o];
      if (dx * dx + dy * dy + dz * dz <= r2[o]) ++counts[o];
    }
  }
  if (dt > 0.0) batch.t = t_target;
}

struct Event {
  double t = 0.0;
  int kind = 0;  // 0 TX emission, 1 RX sample, 2 report, 3 FC sample
  int j = 0;     // 1-based symbol
  int m = 0;     // 1-based sample index for kinds 1 and 3
};

std::vector<Event> build_schedule(const ProtocolTiming& timing, int L, bool with_fc_stage) {
  std::vector<Event> events;
  for (int j = 1; j <= L; ++j) {
    events.push_back({timing.tx_emit_time(j), 0, j, 0});
    for (int m = 1; m <= timing.m_rx; ++m) events.push_back({timing.rx_sample_time(j, m), 1, j, m});
    events.push_back({timing.report_time(j), 2, j, 0});
    if (with_fc_stage)
      for (int m = 1; m <= timing.m_fc; ++m)
        events.push_back({timing.fc_sample_time(j, m), 3, j, m});
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.kind < b.kind;  // emissions before observations at shared instants
  });
  return events;
}

MoleculeBatch make_point_batch(const Vec3& origin, long long n, double t, int emitter) {
  MoleculeBatch batch;
  batch.birth = t;
  batch.t = t;
  batch.emitter = emitter;
  batch.x.assign(static_cast<std::size_t>(n), origin.x);
  batch.y.assign(static_cast<std::size_t>(n), origin.y);
  batch.z.assign(static_cast<std::size_t>(n), origin.z);
  return batch;
}

// Drops molecules that cannot reach any of the given observers before
// t_last within a 6-sigma displacement budget. Positions are taken at the
// batch's own clock, which keeps the bound valid without advancing it.
void aggressive_cull_batch(MoleculeBatch& batch, std::span<const SphericalObserver> observers,
                           double d_coeff, double t_last) {
  const double t_rem = t_last - batch.t;
  if (t_rem <= 0.0) return;
  const double reach = 6.0 * step_sigma_um(d_coeff, t_rem);
  std::size_t keep = 0;
  const std::size_t n = batch.size();
  for (std::size_t i = 0; i < n; ++i) {
    bool reachable = false;
    for (const auto& obs : observers) {
      const double dx = batch.x[i] - obs.center.x;
      const double dy = batch.y[i] - obs.center.y;
      const double dz = batch.z[i] - obs.center.z;
      const double lim = reach + obs.radius;
      if (dx * dx + dy * dy + dz * dz <= lim * lim) {
        reachable = true;
        break;
      }
    }
    if (reachable) {
      batch.x[keep] = batch.x[i];
      batch.y[keep] = batch.y[i];
      batch.z[keep] = batch.z[i];
      ++keep;
    }
  }
  batch.x.resize(keep);
  batch.y.resize(keep);
  batch.z.resize(keep);
}

void cull_cloud(MoleculeCloud& cloud, double now, double horizon_seconds,
                std::span<const SphericalObserver> observers, double d_coeff, double t_last,
                const SimConfig& cfg) {
  if (horizon_seconds > 0.0) {
    std::erase_if(cloud.batches,
                  [&](const MoleculeBatch& b) { return now >= b.birth + horizon_seconds - 1e-15; });
  }
  if (cfg.aggressive_cull) {
    for (auto& b : cloud.batches) aggressive_cull_batch(b, observers, d_coeff, t_last);
    std::erase_if(cloud.batches, [](const MoleculeBatch& b) { return b.size() == 0; });
  }
}

}  // namespace

void step_brownian(MoleculeCloud& cloud, double d_coeff, double dt, Philox& rng) {
  if (!(dt >= 0.0)) throw std::invalid_argument("step_brownian: dt must be >= 0");
  if (!(d_coeff >= 0.0)) throw std::invalid_argument("step_brownian: D must be >= 0");
  if (d_coeff == 0.0 || dt == 0.0) {
    for (auto& b : cloud.batches) b.t += dt;
    return;
  }
  for (auto& b : cloud.batches) advance_batch(b, d_coeff, dt, rng);
}

long long count_inside(const MoleculeCloud& cloud, const SphericalObserver& observer,
                       int emitter_filter) {
  long long total = 0;
  for (const auto& b : cloud.batches) {
    if (emitter_filter >= 0 && b.emitter != emitter_filter) continue;
    total += count_batch_inside(b, observer);
  }
  return total;
}

std::vector<SymbolOutcome> run_sequence_trial(const Topology& topo, const DiffusionParams& params,
                                              const ProtocolTiming& timing,
                                              const Thresholds& thresholds,
                                              std::span<const std::uint8_t> tx_sequence,
                                              const SimConfig& cfg, std::uint64_t trial_index) {
  topo.validate();
  params.validate();
  timing.validate();
  cfg.validate();
  const std::size_t K = topo.num_receivers();
  thresholds.validate(K);
  if (tx_sequence.empty()) throw std::invalid_argument("run_sequence_trial: empty TX sequence");
  if (cfg.scheme == SchemeKind::SingleLink && K != 1)
    throw std::invalid_argument("run_sequence_trial: single-link scheme needs exactly one receiver");

  const int L = static_cast<int>(tx_sequence.size());
  const bool fc_stage = cfg.scheme != SchemeKind::SingleLink;
  const auto events = build_schedule(timing, L, fc_stage);
  const double horizon_seconds =
      cfg.cull_horizon > 0 ? cfg.cull_horizon * timing.symbol_interval : 0.0;
  const double t_last_rx = timing.rx_sample_time(L, timing.m_rx);
  const double t_last_fc = timing.fc_sample_time(L, timing.m_fc);
  const int n_vote = SchemeSpec{cfg.scheme, cfg.vote_threshold}.resolved_vote_threshold(K);

  Philox rng(cfg.rng_seed, 2 * trial_index + 1);

  MoleculeCloud cloud_a, cloud_b;
  std::vector<long long> rx_sum(K, 0);
  std::vector<long long> fc_type_sum(K, 0);
  long long fc_sum = 0;

  std::vector<SymbolOutcome> outcomes(static_cast<std::size_t>(L));
  for (int j = 1; j <= L; ++j) {
    outcomes[static_cast<std::size_t>(j - 1)].tx_bit = tx_sequence[static_cast<std::size_t>(j - 1)];
    outcomes[static_cast<std::size_t>(j - 1)].rx_decisions.assign(K, 0);
  }

  for (const auto& ev : events) {
    switch (ev.kind) {
      case 0: {  // TX emission; also the per-interval housekeeping point
        cull_cloud(cloud_a, ev.t, horizon_seconds,
                   std::span(topo.receivers.data(), topo.receivers.size()), params.d_a, t_last_rx,
                   cfg);
        if (fc_stage) cull_cloud(cloud_b, ev.t, horizon_seconds, std::span(&topo.fc, 1), params.d_b,
                                 t_last_fc, cfg);
        if (tx_sequence[static_cast<std::size_t>(ev.j - 1)] && params.s_a > 0)
          cloud_a.batches.push_back(make_point_batch(topo.tx, params.s_a, ev.t, -1));
        break;
      }
      case 1: {  // RX sample
        if (cfg.event_jumps && K <= 8) {
          long long counts[8] = {0, 0, 0, 0, 0, 0, 0, 0};
          for (auto& b : cloud_a.batches)
            jump_and_count<8>(b, ev.t, params.d_a, rng,
                              std::span(topo.receivers.data(), K), counts);
          for (std::size_t k = 0; k < K; ++k) rx_sum[k] += counts[k];
        } else {
          for (auto& b : cloud_a.batches) advance_batch_to(b, ev.t, params.d_a, cfg, rng);
          for (std::size_t k = 0; k < K; ++k)
            for (const auto& b : cloud_a.batches)
              rx_sum[k] += count_batch_inside(b, topo.receivers[k]);
        }
        break;
      }
      case 2: {  // decisions + report emission
        auto& out = outcomes[static_cast<std::size_t>(ev.j - 1)];
        for (std::size_t k = 0; k < K; ++k) {
          const bool one = rx_sum[k] >= thresholds.xi_rx[k];
          out.rx_decisions[k] = one ? 1 : 0;
          if (one && fc_stage && params.s_b > 0)
            cloud_b.batches.push_back(
                make_point_batch(topo.receivers[k].center, params.s_b, ev.t, static_cast<int>(k)));
        }
        if (!fc_stage) {
          out.fc_count = rx_sum[0];
          out.fc_decision = out.rx_decisions[0];
        }
        std::fill(rx_sum.begin(), rx_sum.end(), 0);
        break;
      }
      case 3: {  // FC sample
        if (cfg.event_jumps) {
          for (auto& b : cloud_b.batches) {
            long long count = 0;
            jump_and_count<1>(b, ev.t, params.d_b, rng, std::span(&topo.fc, 1), &count);
            if (cfg.scheme == SchemeKind::Majority)
              fc_type_sum[static_cast<std::size_t>(b.emitter)] += count;
            else
              fc_sum += count;
          }
        } else {
          for (auto& b : cloud_b.batches) advance_batch_to(b, ev.t, params.d_b, cfg, rng);
          if (cfg.scheme == SchemeKind::Majority) {
            for (const auto& b : cloud_b.batches)
              fc_type_sum[static_cast<std::size_t>(b.emitter)] += count_batch_inside(b, topo.fc);
          } else {
            for (const auto& b : cloud_b.batches) fc_sum += count_batch_inside(b, topo.fc);
          }
        }
        if (ev.m == timing.m_fc) {
          auto& out = outcomes[static_cast<std::size_t>(ev.j - 1)];
          if (cfg.scheme == SchemeKind::Majority) {
            int votes = 0;
            for (std::size_t k = 0; k < K; ++k)
              if (fc_type_sum[k] >= thresholds.xi_fc) ++votes;
            out.fc_count = votes;
            out.fc_decision = votes >= n_vote ? 1 : 0;
            std::fill(fc_type_sum.begin(), fc_type_sum.end(), 0);
          } else {
            out.fc_count = fc_sum;
            out.fc_decision = fc_sum >= thresholds.xi_fc ? 1 : 0;
            fc_sum = 0;
          }
        }
        break;
      }
      default:
        break;
    }
  }
  return outcomes;
}

double SimEstimate::per_symbol_error(int j) const {
  const auto idx = static_cast<std::size_t>(j - 1);
  const long long n = ones[idx] + zeros[idx];
  return n == 0 ? 0.0 : static_cast<double>(err_when_1[idx] + err_when_0[idx]) / static_cast<double>(n);
}

namespace {

std::string trial_log_line(std::uint64_t trial, std::span<const SymbolOutcome> outcome) {
  std::string line = "{\"trial\":" + std::to_string(trial) + ",\"tx\":\"";
  for (const auto& s : outcome) line += s.tx_bit ? '1' : '0';
  line += "\",\"fc\":\"";
  for (const auto& s : outcome) line += s.fc_decision ? '1' : '0';
  line += "\",\"fc_counts\":[";
  for (std::size_t j = 0; j < outcome.size(); ++j) {
    if (j) line += ',';
    line += std::to_string(outcome[j].fc_count);
  }
  line += "],\"rx\":[";
  for (std::size_t k = 0; k < outcome.front().rx_decisions.size(); ++k) {
    if (k) line += ',';
    line += '"';
    for (const auto& s : outcome) line += s.rx_decisions[k] ? '1' : '0';
    line += '"';
  }
  line += "]}";
  return line;
}

}  // namespace

SimEstimate estimate_error(const Topology& topo, const DiffusionParams& params,
                           const ProtocolTiming& timing, const Thresholds& thresholds, int L,
                           double p1, const SimConfig& cfg, std::vector<std::string>* trial_log) {
  cfg.validate();
  if (L < 1) throw std::invalid_argument("estimate_error: L must be >= 1");
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("estimate_error: p1 must be in [0,1]");

  const auto trials = static_cast<std::size_t>(cfg.trials);
  const bool want_log = cfg.trial_log && trial_log != nullptr;
  if (want_log) trial_log->assign(trials, {});
  // Per-trial packed results keep the reduction independent of thread count.
  std::vector<std::uint8_t> tx_bits(trials * static_cast<std::size_t>(L));
  std::vector<std::uint8_t> err_bits(trials * static_cast<std::size_t>(L));

  parallel_for(trials, cfg.threads, [&](std::size_t t) {
    Philox bits_rng(cfg.rng_seed, 2 * static_cast<std::uint64_t>(t));
    std::vector<std::uint8_t> seq(static_cast<std::size_t>(L));
    for (auto& b : seq) b = bits_rng.next_bernoulli(p1) ? 1 : 0;
    const auto outcome =
        run_sequence_trial(topo, params, timing, thresholds, seq, cfg, static_cast<std::uint64_t>(t));
    for (int j = 0; j < L; ++j) {
      tx_bits[t * static_cast<std::size_t>(L) + static_cast<std::size_t>(j)] =
          seq[static_cast<std::size_t>(j)];
      err_bits[t * static_cast<std::size_t>(L) + static_cast<std::size_t>(j)] =
          outcome[static_cast<std::size_t>(j)].fc_decision != seq[static_cast<std::size_t>(j)] ? 1
                                                                                               : 0;
    }
    if (want_log) (*trial_log)[t] = trial_log_line(static_cast<std::uint64_t>(t), outcome);
  });

  SimEstimate est;
  est.trials = cfg.trials;
  est.sequence_length = L;
  est.err_when_1.assign(static_cast<std::size_t>(L), 0);
  est.err_when_0.assign(static_cast<std::size_t>(L), 0);
  est.ones.assign(static_cast<std::size_t>(L), 0);
  est.zeros.assign(static_cast<std::size_t>(L), 0);

  long long total_err = 0;
  long long sum_trial_err = 0, sum_trial_err_sq = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    long long trial_err = 0;
    for (int j = 0; j < L; ++j) {
      const std::size_t idx = t * static_cast<std::size_t>(L) + static_cast<std::size_t>(j);
      const bool one = tx_bits[idx] != 0;
      const bool err = err_bits[idx] != 0;
      if (one) {
        ++est.ones[static_cast<std::size_t>(j)];
        if (err) ++est.err_when_1[static_cast<std::size_t>(j)];
      } else {
        ++est.zeros[static_cast<std::size_t>(j)];
        if (err) ++est.err_when_0[static_cast<std::size_t>(j)];
      }
      trial_err += err ? 1 : 0;
    }
    total_err += trial_err;
    sum_trial_err += trial_err;
    sum_trial_err_sq += trial_err * trial_err;
  }

  est.total_errors = total_err;
  const double n_symbols = static_cast<double>(cfg.trials) * L;
  est.qbar = static_cast<double>(total_err) / n_symbols;
  est.se_pooled = std::sqrt(std::max(0.0, est.qbar * (1.0 - est.qbar)) / n_symbols);
  if (cfg.trials > 1) {
    const double mean = static_cast<double>(sum_trial_err) / static_cast<double>(cfg.trials) / L;
    const double mean_sq =
        static_cast<double>(sum_trial_err_sq) / static_cast<double>(cfg.trials) / (static_cast<double>(L) * L);
    const double var = std::max(0.0, (mean_sq - mean * mean) * static_cast<double>(cfg.trials) /
                                         static_cast<double>(cfg.trials - 1));
    est.se_trial = std::sqrt(var / static_cast<double>(cfg.trials));
  }
  return est;
}

}  // namespace coopmc
