#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coopmc/config.hpp"

namespace coopmc {

struct RunnerOptions {
  std::string out_dir = ".";
  int threads = 0;
};

// Each runner writes one CSV (write-then-rename; no partial file on failure)
// and returns its path. Header comments carry the tool version, config hash,
// seed and the canonical config text.
std::string run_analytic(const ExperimentConfig& cfg, const RunnerOptions& opts);
std::string run_simulate(const ExperimentConfig& cfg, const RunnerOptions& opts);
std::string run_optimize(const ExperimentConfig& cfg, const RunnerOptions& opts);
std::string run_sweep(const ExperimentConfig& cfg, const RunnerOptions& opts);

// Preset experiment rows, exposed so tests can assert on them directly.
struct Fig2Row {
  long long xi_rx = 0;
  double q_sd = 0.0;
  double q_majority = 0.0;
  double q_single = 0.0;
};
std::vector<Fig2Row> preset_fig2(int threads);

struct Fig3Row {
  int k = 0;
  long long xi_rx_sd = 0, xi_fc_sd = 0;
  double q_sd = 0.0;
  long long xi_rx_majority = 0, xi_type_majority = 0;
  double q_majority = 0.0;
  long long xi_rx_single = 0;
  double q_single = 0.0;
};
std::vector<Fig3Row> preset_fig3(int threads, bool include_majority = true,
                                 bool include_single = true);

struct Fig4Row {
  double d_tx3 = 0.0;
  long long xi_rx_star = 0, xi_fc_star = 0;
  double q_star_analytic = 0.0;
  double q_star_sim = 0.0;
  double sim_stderr = 0.0;
};
std::vector<Fig4Row> preset_fig4(long long trials, std::uint64_t seed, int threads,
                                 bool with_simulation = true);

std::string run_reproduce(const std::string& which, const RunnerOptions& opts,
                          std::optional<long long> trials_override = {},
                          std::optional<std::uint64_t> seed_override = {});

}  // namespace coopmc
