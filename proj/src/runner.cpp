#include "coopmc/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "coopmc/error_surface.hpp"
#include "coopmc/parallel.hpp"
#include "coopmc/version.hpp"

namespace coopmc {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class CsvFile {
 public:
  CsvFile(const ExperimentConfig* cfg, std::uint64_t seed, const std::string& extra = "") {
    out_ << "# coopmc " << kVersion << "\n";
    if (cfg) out_ << "# config_hash=" << hex64(cfg->hash()) << "\n";
    out_ << "# seed=" << seed << "\n";
    if (!extra.empty()) out_ << "# " << extra << "\n";
    if (cfg) {
      std::istringstream lines(cfg->emit());
      std::string line;
      while (std::getline(lines, line)) out_ << "# config: " << line << "\n";
    }
  }

  std::ostringstream& stream() { return out_; }

  // Write-then-rename so a failure never leaves a partial CSV behind.
  std::string commit(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot open output file: " + tmp);
      const std::string body = out_.str();
      f.write(body.data(), static_cast<std::streamsize>(body.size()));
      if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
    return path.string();
  }

 private:
  std::ostringstream out_;
};

ErrorReport analytic_report(const ExperimentConfig& cfg, int threads) {
  const Topology topo = cfg.topology.build();
  const AveragingOptions opts = cfg.averaging_options(threads);
  const int L = cfg.run.sequence_length;
  const double p1 = cfg.run.p1;
  const MonteCarloAveraging mc{cfg.run.mc_samples, cfg.run.mc_seed};

  switch (cfg.scheme) {
    case SchemeKind::SdConstant:
      return cfg.run.monte_carlo
                 ? average_error(topo, cfg.diffusion, cfg.timing, cfg.thresholds(), L, p1, mc, opts)
                 : average_error(topo, cfg.diffusion, cfg.timing, cfg.thresholds(), L, p1,
                                 ExactAveraging{}, opts);
    case SchemeKind::Majority: {
      const SchemeSpec spec{SchemeKind::Majority, cfg.vote_threshold};
      return cfg.run.monte_carlo
                 ? majority_rule_error(topo, cfg.diffusion, cfg.timing, cfg.thresholds(), spec, L,
                                       p1, mc, opts)
                 : majority_rule_error(topo, cfg.diffusion, cfg.timing, cfg.thresholds(), spec, L,
                                       p1, ExactAveraging{}, opts);
    }
    case SchemeKind::SingleLink:
      return cfg.run.monte_carlo
                 ? single_link_error(topo, cfg.diffusion, cfg.timing, cfg.xi_rx, L, p1, mc, opts)
                 : single_link_error(topo, cfg.diffusion, cfg.timing, cfg.xi_rx, L, p1,
                                     ExactAveraging{}, opts);
  }
  throw std::logic_error("analytic_report: bad scheme");
}

}  // namespace

std::string run_analytic(const ExperimentConfig& cfg, const RunnerOptions& opts) {
  const ErrorReport rep = analytic_report(cfg, opts.threads);
  CsvFile csv(&cfg, cfg.run.monte_carlo ? cfg.run.mc_seed : 0,
              std::string("scheme=") + scheme_name(cfg.scheme));
  auto& out = csv.stream();
  out << "# averaging=" << rep.averaging << "\n";
  out << "# qbar_fc=" << fmt(rep.qbar_fc) << "\n";
  out << "symbol,q_md,q_fa,q_fc\n";
  for (std::size_t j = 0; j < rep.q_fc.size(); ++j)
    out << (j + 1) << "," << fmt(rep.q_md[j]) << "," << fmt(rep.q_fa[j]) << "," << fmt(rep.q_fc[j])
        << "\n";
  return csv.commit(opts.out_dir, "analytic.csv");
}

std::string run_simulate(const ExperimentConfig& cfg, const RunnerOptions& opts) {
  const Topology topo = cfg.topology.build();
  const SimConfig sim = cfg.sim_config(opts.threads);
  std::vector<std::string> trial_log;
  const SimEstimate est =
      estimate_error(topo, cfg.diffusion, cfg.timing, cfg.thresholds(), cfg.run.sequence_length,
                     cfg.run.p1, sim, sim.trial_log ? &trial_log : nullptr);
  if (sim.trial_log) {
    std::filesystem::create_directories(opts.out_dir);
    const auto log_path = std::filesystem::path(opts.out_dir) / "simulate_trials.ndjson";
    const auto tmp = log_path.string() + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot open " + tmp);
      for (const auto& line : trial_log) f << line << "\n";
    }
    std::filesystem::rename(tmp, log_path);
  }
  CsvFile csv(&cfg, sim.rng_seed, std::string("scheme=") + scheme_name(cfg.scheme));
  auto& out = csv.stream();
  out << "# trials=" << est.trials << "\n";
  out << "# total_errors=" << est.total_errors << "\n";
  out << "# qbar=" << fmt(est.qbar) << "\n";
  out << "# se_pooled=" << fmt(est.se_pooled) << "\n";
  out << "# se_trial=" << fmt(est.se_trial) << "\n";
  out << "symbol,err_when_1,err_when_0,ones,zeros,error_rate\n";
  for (int j = 1; j <= est.sequence_length; ++j) {
    const auto idx = static_cast<std::size_t>(j - 1);
    out << j << "," << est.err_when_1[idx] << "," << est.err_when_0[idx] << "," << est.ones[idx]
        << "," << est.zeros[idx] << "," << fmt(est.per_symbol_error(j)) << "\n";
  }
  return csv.commit(opts.out_dir, "simulate.csv");
}

namespace {

OptimizationResult optimize_for_scheme(const ExperimentConfig& cfg, int threads) {
  const Topology topo = cfg.topology.build();
  const int L = cfg.run.sequence_length;
  const ChannelGains gains = build_gains(topo, cfg.diffusion, cfg.timing, L);
  const PrefixEnsemble ensemble(gains, cfg.diffusion, L, cfg.run.p1,
                                cfg.averaging_options(threads));

  RowObjective objective;
  ThresholdRange fc_range = cfg.optimize.xi_fc;
  switch (cfg.scheme) {
    case SchemeKind::SdConstant:
      objective = [&](long long xi_rx, std::span<const long long> xi_fc) {
        return ensemble.sd_row(xi_rx, xi_fc);
      };
      break;
    case SchemeKind::Majority: {
      const int n_vote =
          SchemeSpec{SchemeKind::Majority, cfg.vote_threshold}.resolved_vote_threshold(
              topo.num_receivers());
      objective = [&, n_vote](long long xi_rx, std::span<const long long> xi_type) {
        return ensemble.majority_row(xi_rx, xi_type, n_vote);
      };
      break;
    }
    case SchemeKind::SingleLink:
      fc_range = {1, 1};  // no FC stage; collapse the second axis
      objective = [&](long long xi_rx, std::span<const long long> xi_fc) {
        return std::vector<double>(xi_fc.size(), ensemble.single_link_qbar(xi_rx));
      };
      break;
  }
  return joint_optimize(objective, cfg.optimize.xi_rx, fc_range, cfg.optimize.strategy, threads,
                        cfg.optimize.stride);
}

}  // namespace

std::string run_optimize(const ExperimentConfig& cfg, const RunnerOptions& opts) {
  const OptimizationResult res = optimize_for_scheme(cfg, opts.threads);
  CsvFile csv(&cfg, 0, std::string("scheme=") + scheme_name(cfg.scheme));
  auto& out = csv.stream();
  out << "# xi_rx_star=" << res.xi_rx_star << "\n";
  out << "# xi_fc_star=" << res.xi_fc_star << "\n";
  out << "# q_star=" << fmt(res.q_star) << "\n";
  out << "# evaluations=" << res.evaluations << "\n";
  out << "xi_rx,xi_fc,qbar\n";
  for (const auto& p : res.surface)
    out << p.xi_rx << "," << p.xi_fc << "," << fmt(p.qbar) << "\n";
  return csv.commit(opts.out_dir, "optimize.csv");
}

std::string run_sweep(const ExperimentConfig& cfg, const RunnerOptions& opts) {
  if (!cfg.sweep) throw std::invalid_argument("run_sweep: config has no [sweep] section");
  const auto values = cfg.sweep->values();
  if (values.empty()) throw std::invalid_argument("run_sweep: empty sweep range");

  std::vector<double> qbars(values.size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig point = cfg;
    point.sweep.reset();
    const double v = values[i];
    const std::string& p = cfg.sweep->parameter;
    if (p == "xi_rx") {
      point.xi_rx = static_cast<long long>(v);
    } else if (p == "xi_fc") {
      point.xi_fc = static_cast<long long>(v);
    } else if (p == "s_a") {
      point.diffusion.s_a = static_cast<long long>(v);
    } else if (p == "s_b") {
      point.diffusion.s_b = static_cast<long long>(v);
    } else if (p == "p1") {
      point.run.p1 = v;
    } else if (p == "k") {
      if (point.topology.builder != TopologyBuilder::SymmetricRing)
        throw std::invalid_argument("run_sweep: k sweep needs the symmetric_ring builder");
      point.topology.k = static_cast<int>(v);
    } else if (p == "case_index") {
      if (point.topology.builder != TopologyBuilder::AsymmetricLine)
        throw std::invalid_argument("run_sweep: case_index sweep needs the asymmetric_line builder");
      point.topology.case_index = static_cast<int>(v);
    } else {
      throw std::invalid_argument("run_sweep: unknown parameter " + p);
    }
    qbars[i] = analytic_report(point, opts.threads).qbar_fc;
  }

  CsvFile csv(&cfg, cfg.run.monte_carlo ? cfg.run.mc_seed : 0,
              "sweep parameter=" + cfg.sweep->parameter);
  auto& out = csv.stream();
  out << "value,qbar\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    out << fmt(values[i]) << "," << fmt(qbars[i]) << "\n";
  return csv.commit(opts.out_dir, "sweep.csv");
}

namespace {

ExperimentConfig fig_base_config(double rx_radius) {
  ExperimentConfig cfg = default_config();
  cfg.topology.builder = TopologyBuilder::SymmetricRing;
  cfg.topology.k = 3;
  cfg.topology.rx_radius_um = rx_radius;
  cfg.topology.fc_radius_um = 0.225;
  cfg.diffusion.s_a = 8000;
  cfg.diffusion.s_b = 667;
  cfg.run.sequence_length = 10;
  cfg.run.p1 = 0.5;
  return cfg;
}

}  // namespace

std::vector<Fig2Row> preset_fig2(int threads) {
  const ExperimentConfig base = fig_base_config(0.225);
  const Topology topo = base.topology.build();
  const int L = base.run.sequence_length;
  const AveragingOptions opts = base.averaging_options(threads);

  const ChannelGains gains = build_gains(topo, base.diffusion, base.timing, L);
  const PrefixEnsemble coop(gains, base.diffusion, L, base.run.p1, opts);

  ExperimentConfig single_cfg = base;
  single_cfg.topology.k = 1;
  single_cfg.diffusion.s_a = 10000;
  const Topology single_topo = single_cfg.topology.build();
  const ChannelGains single_gains = build_gains(single_topo, single_cfg.diffusion, base.timing, L);
  const PrefixEnsemble single(single_gains, single_cfg.diffusion, L, base.run.p1, opts);

  const long long xi_fc_sd = 6, xi_type_majority = 4;
  const int n_vote = 2;

  std::vector<Fig2Row> rows(120);
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const long long xi_rx = static_cast<long long>(i) + 1;
    const long long fc[1] = {xi_fc_sd};
    const long long ty[1] = {xi_type_majority};
    rows[i].xi_rx = xi_rx;
    rows[i].q_sd = coop.sd_row(xi_rx, fc)[0];
    rows[i].q_majority = coop.majority_row(xi_rx, ty, n_vote)[0];
    rows[i].q_single = single.single_link_qbar(xi_rx);
  });
  return rows;
}

std::vector<Fig3Row> preset_fig3(int threads, bool include_majority, bool include_single) {
  std::vector<Fig3Row> rows;
  const ThresholdRange rx_range{1, 200}, fc_range{1, 400};

  for (int k = 1; k <= 6; ++k) {
    ExperimentConfig cfg = fig_base_config(0.2);
    cfg.topology.k = k;
    cfg.diffusion.s_b = (2000 + k - 1) / k;  // report budget split across receivers
    cfg.optimize.xi_rx = rx_range;
    cfg.optimize.xi_fc = fc_range;

    Fig3Row row;
    row.k = k;

    const Topology topo = cfg.topology.build();
    const ChannelGains gains = build_gains(topo, cfg.diffusion, cfg.timing, cfg.run.sequence_length);
    const PrefixEnsemble ensemble(gains, cfg.diffusion, cfg.run.sequence_length, cfg.run.p1,
                                  cfg.averaging_options(threads));

    const auto sd = joint_optimize(
        [&](long long xi_rx, std::span<const long long> xi_fc) { return ensemble.sd_row(xi_rx, xi_fc); },
        rx_range, fc_range, SearchStrategy::Exhaustive, threads);
    row.xi_rx_sd = sd.xi_rx_star;
    row.xi_fc_sd = sd.xi_fc_star;
    row.q_sd = sd.q_star;

    if (include_majority) {
      const int n_vote = (k + 2) / 2;
      const auto maj = joint_optimize(
          [&](long long xi_rx, std::span<const long long> xi_type) {
            return ensemble.majority_row(xi_rx, xi_type, n_vote);
          },
          rx_range, fc_range, SearchStrategy::Exhaustive, threads);
      row.xi_rx_majority = maj.xi_rx_star;
      row.xi_type_majority = maj.xi_fc_star;
      row.q_majority = maj.q_star;
    }

    if (include_single) {
      ExperimentConfig single_cfg = fig_base_config(0.2);
      single_cfg.topology.k = 1;
      single_cfg.diffusion.s_a = 10000;
      const Topology single_topo = single_cfg.topology.build();
      const ChannelGains sg =
          build_gains(single_topo, single_cfg.diffusion, single_cfg.timing, cfg.run.sequence_length);
      const PrefixEnsemble single(sg, single_cfg.diffusion, cfg.run.sequence_length, cfg.run.p1,
                                  cfg.averaging_options(threads));
      const auto res = joint_optimize(
          [&](long long xi_rx, std::span<const long long> xi_fc) {
            return std::vector<double>(xi_fc.size(), single.single_link_qbar(xi_rx));
          },
          rx_range, {1, 1}, SearchStrategy::Exhaustive, threads);
      row.xi_rx_single = res.xi_rx_star;
      row.q_single = res.q_star;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<Fig4Row> preset_fig4(long long trials, std::uint64_t seed, int threads,
                                 bool with_simulation) {
  std::vector<Fig4Row> rows;
  for (int case_index = 1; case_index <= 5; ++case_index) {
    ExperimentConfig cfg = fig_base_config(0.225);
    cfg.topology.builder = TopologyBuilder::AsymmetricLine;
    cfg.topology.case_index = case_index;
    const Topology topo = cfg.topology.build();
    const ChannelGains gains = build_gains(topo, cfg.diffusion, cfg.timing, cfg.run.sequence_length);
    const PrefixEnsemble ensemble(gains, cfg.diffusion, cfg.run.sequence_length, cfg.run.p1,
                                  cfg.averaging_options(threads));
    const auto res = joint_optimize(
        [&](long long xi_rx, std::span<const long long> xi_fc) { return ensemble.sd_row(xi_rx, xi_fc); },
        {1, 200}, {1, 400}, SearchStrategy::Exhaustive, threads);

    Fig4Row row;
    row.d_tx3 = topo.tx_rx_distance(2);
    row.xi_rx_star = res.xi_rx_star;
    row.xi_fc_star = res.xi_fc_star;
    row.q_star_analytic = res.q_star;

    if (with_simulation) {
      SimConfig sim = cfg.sim_config(threads);
      sim.trials = trials;
      sim.rng_seed = seed;
      const Thresholds thr =
          Thresholds::shared(topo.num_receivers(), res.xi_rx_star, res.xi_fc_star);
      const SimEstimate est = estimate_error(topo, cfg.diffusion, cfg.timing, thr,
                                             cfg.run.sequence_length, cfg.run.p1, sim);
      row.q_star_sim = est.qbar;
      row.sim_stderr = est.se_pooled;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string run_reproduce(const std::string& which, const RunnerOptions& opts,
                          std::optional<long long> trials_override,
                          std::optional<std::uint64_t> seed_override) {
  if (which == "fig2") {
    const auto rows = preset_fig2(opts.threads);
    const ExperimentConfig base = fig_base_config(0.225);
    CsvFile csv(&base, 0, "preset=fig2 xi_fc_sd=6 xi_type_majority=4 vote_threshold=2");
    auto& out = csv.stream();
    out << "xi_rx,q_sd,q_majority,q_single\n";
    for (const auto& r : rows)
      out << r.xi_rx << "," << fmt(r.q_sd) << "," << fmt(r.q_majority) << "," << fmt(r.q_single)
          << "\n";
    return csv.commit(opts.out_dir, "fig2.csv");
  }
  if (which == "fig3") {
    const auto rows = preset_fig3(opts.threads);
    ExperimentConfig base = fig_base_config(0.2);
    CsvFile csv(&base, 0, "preset=fig3 jointly optimized thresholds per scheme");
    auto& out = csv.stream();
    out << "k,xi_rx_star_sd,xi_fc_star_sd,q_star_sd,xi_rx_star_majority,xi_type_star_majority,"
           "q_star_majority,xi_rx_star_single,q_star_single\n";
    for (const auto& r : rows)
      out << r.k << "," << r.xi_rx_sd << "," << r.xi_fc_sd << "," << fmt(r.q_sd) << ","
          << r.xi_rx_majority << "," << r.xi_type_majority << "," << fmt(r.q_majority) << ","
          << r.xi_rx_single << "," << fmt(r.q_single) << "\n";
    return csv.commit(opts.out_dir, "fig3.csv");
  }
  if (which == "fig4") {
    const long long trials = trials_override.value_or(2000);
    const std::uint64_t seed = seed_override.value_or(1);
    const auto rows = preset_fig4(trials, seed, opts.threads);
    ExperimentConfig base = fig_base_config(0.225);
    base.topology.builder = TopologyBuilder::AsymmetricLine;
    base.topology.case_index = 1;
    base.sim.trials = trials;
    base.sim.rng_seed = seed;
    CsvFile csv(&base, seed, "preset=fig4 trials=" + std::to_string(trials));
    auto& out = csv.stream();
    out << "d_tx3,xi_rx_star,xi_fc_star,q_star_analytic,q_star_sim,sim_stderr\n";
    for (const auto& r : rows)
      out << fmt(r.d_tx3) << "," << r.xi_rx_star << "," << r.xi_fc_star << ","
          << fmt(r.q_star_analytic) << "," << fmt(r.q_star_sim) << "," << fmt(r.sim_stderr) << "\n";
    return csv.commit(opts.out_dir, "fig4.csv");
  }
  throw std::invalid_argument("reproduce: unknown preset '" + which + "' (fig2|fig3|fig4)");
}

}  // namespace coopmc
