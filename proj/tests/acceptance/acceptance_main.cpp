// Acceptance suite: one self-contained check per numbered criterion, each
// printing a single PASS/FAIL line. Run everything or select with --only N.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coopmc/config.hpp"
#include "coopmc/error_surface.hpp"
#include "coopmc/runner.hpp"
#include "coopmc/simulate.hpp"
#include "coopmc/stats.hpp"
#include "support/oracles.hpp"

using namespace coopmc;

namespace {

struct Context {
  std::string cli_path;
  std::string work_dir = "acceptance_work";
};

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1. Particle simulation vs closed form at the reference parameters.
bool criterion_1(const Context&, std::string& detail) {
  const Topology topo = build_symmetric_ring(3);
  const DiffusionParams params;  // S_A 8000, S_B 667, D 5e-9
  const ProtocolTiming timing;
  const Thresholds thr = Thresholds::shared(3, 20, 6);
  const int L = 10;

  const auto analytic = average_error(topo, params, timing, thr, L, 0.5, ExactAveraging{});

  SimConfig sim;
  sim.trials = 10000;
  sim.rng_seed = 20240601;
  sim.aggressive_cull = true;
  const auto est = estimate_error(topo, params, timing, thr, L, 0.5, sim);

  const double diff = std::abs(est.qbar - analytic.qbar_fc);
  const double bound = 3.0 * est.se_pooled;
  std::ostringstream os;
  os << "analytic=" << analytic.qbar_fc << " sim=" << est.qbar << " |diff|=" << diff
     << " 3*se=" << bound << " trials=" << est.trials;
  detail = os.str();
  return diff <= bound;
}

// 2. Exhaustive micro-instance oracle.
bool criterion_2(const Context&, std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Topology topo;
  topo.tx = {0, 0, 0};
  topo.fc = {{2, 0, 0}, 0.225};
  topo.receivers = {{{2, 0.6, 0}, 0.225}, {{1.6, 0.48, 0}, 0.225}};
  DiffusionParams params;
  params.s_a = 2000;  // all Poisson means stay below 5
  params.s_b = 150;
  const ProtocolTiming timing;
  const Thresholds thr = Thresholds::shared(2, 3, 4);
  const int L = 2;

  const auto gains = build_gains(topo, params, timing, L);
  const auto brute = oracles::brute_force_average(gains, 2000.0, 150.0, thr, L, 0.5, 1e-12);
  AveragingOptions opts;
  opts.isi_window = 2;  // covers the entire history at L = 2
  const auto rep = average_error(topo, params, timing, thr, L, 0.5, ExactAveraging{}, opts);

  const double rel = std::abs(rep.qbar_fc - brute.qbar) / brute.qbar;
  const double secs = elapsed_seconds(start);
  std::ostringstream os;
  os << "analytic=" << rep.qbar_fc << " brute=" << brute.qbar << " rel=" << rel
     << " runtime=" << secs << "s";
  detail = os.str();
  return rel <= 1e-6 && secs < 1.0;
}

// 3. Binomial-form and realization-enumeration paths coincide when symmetric.
bool criterion_3(const Context&, std::string& detail) {
  std::mt19937 rng(31337);
  const DiffusionParams params;
  const ProtocolTiming timing;
  double worst = 0.0;
  int checked = 0;
  for (int k : {1, 2, 3, 6}) {
    const Topology topo = build_symmetric_ring(k);
    const auto gains = build_gains(topo, params, timing, 8);
    const Thresholds thr =
        Thresholds::shared(static_cast<std::size_t>(k),
                           std::uniform_int_distribution<int>(1, 30)(rng),
                           std::uniform_int_distribution<int>(1, 12)(rng));
    for (int trial = 0; trial < 25; ++trial) {
      const int len = std::uniform_int_distribution<int>(0, 7)(rng);
      std::vector<std::uint8_t> prefix(static_cast<std::size_t>(len));
      for (auto& b : prefix) b = rng() & 1u;
      std::vector<std::vector<std::uint8_t>> histories(
          static_cast<std::size_t>(k), std::vector<std::uint8_t>(prefix.size()));
      std::vector<int> counts(prefix.size(), 0);
      for (auto& h : histories)
        for (std::size_t i = 0; i < h.size(); ++i) {
          h[i] = rng() & 1u;
          counts[i] += h[i];
        }
      for (int bit : {0, 1}) {
        const double asym = q_md_fa_asym(prefix, bit, histories, gains, params, thr);
        const double sym = q_md_fa_sym(prefix, bit, counts, gains, params, thr);
        worst = std::max(worst, std::abs(asym - sym));
        ++checked;
      }
    }
  }
  std::ostringstream os;
  os << checked << " randomized cases, worst |sym - asym| = " << worst;
  detail = os.str();
  return worst <= 1e-12;
}

// 4. Optimized error is non-increasing in the receiver count and at least
//    halves from K=1 to K=6 under the fixed report budget.
bool criterion_4(const Context&, std::string& detail) {
  const auto rows = preset_fig3(0, /*include_majority=*/false, /*include_single=*/false);
  std::ostringstream os;
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << "K=" << rows[i].k << ":" << rows[i].q_sd << " ";
    if (i > 0 && rows[i].q_sd > rows[i - 1].q_sd * (1.0 + 1e-12)) monotone = false;
  }
  const bool halves = rows.back().q_sd < rows.front().q_sd / 2.0;
  detail = os.str() + (monotone ? "(non-increasing)" : "(NOT monotone)") +
           (halves ? " and Q*(6) < Q*(1)/2" : " but Q*(6) >= Q*(1)/2");
  return monotone && halves;
}

// 5. Moving the third receiver: the middle position wins.
bool criterion_5(const Context&, std::string& detail) {
  const auto rows = preset_fig4(0, 0, 0, /*with_simulation=*/false);
  std::ostringstream os;
  for (const auto& r : rows) os << "d=" << r.d_tx3 << ":" << r.q_star_analytic << " ";
  detail = os.str();
  // rows are ordered by case index: d = 2.088, 1.6705, 1.2528, 0.8352, 0.4176
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].q_star_analytic < rows[best].q_star_analytic) best = i;
  const bool at_167 = std::abs(rows[best].d_tx3 - 1.6704490414256880) < 1e-6;
  const bool below_ends = rows[1].q_star_analytic < rows[0].q_star_analytic &&
                          rows[1].q_star_analytic < rows[4].q_star_analytic;
  detail += at_167 ? "(minimum at 1.67 um)" : "(minimum elsewhere)";
  return at_167 && below_ends;
}

// 6. Scheme ordering at the respective optimal RX thresholds.
bool criterion_6(const Context&, std::string& detail) {
  const auto rows = preset_fig2(0);
  double q_sd = 2.0, q_majority = 2.0, q_single = 2.0;
  for (const auto& r : rows) {
    q_sd = std::min(q_sd, r.q_sd);
    q_majority = std::min(q_majority, r.q_majority);
    q_single = std::min(q_single, r.q_single);
  }
  std::ostringstream os;
  os << "q*(majority)=" << q_majority << " q*(sd)=" << q_sd << " q*(single)=" << q_single
     << " single/sd=" << q_single / q_sd << " sd/majority=" << q_sd / q_majority;
  detail = os.str();
  return q_majority < q_sd && q_sd < q_single && q_single / q_sd >= 2.0 &&
         q_sd / q_majority <= 1.5;
}

// 7. Closed-form sphere observation vs direct quadrature of the kernel.
bool criterion_7(const Context&, std::string& detail) {
  const double r = 0.225e-6, D = 5e-9;
  double worst = 0.0;
  int points = 0;
  for (double t : {1e-5, 3e-5, 1e-4, 5e-4, 1.1e-3}) {
    for (double d : {0.3e-6, 0.6e-6, 1.2e-6, 2.088e-6}) {
      const double closed = p_ob_sphere(t, r, d, D);
      const double quad = oracles::sphere_observation_quadrature(t, r, d, D, 96);
      worst = std::max(worst, std::abs(closed - quad) / quad);
      ++points;
    }
  }
  std::ostringstream os;
  os << points << " grid points, worst relative difference " << worst;
  detail = os.str();
  return points == 20 && worst <= 1e-4;
}

// 8. Simulated counts at one sampling instant are Poisson to a chi-square.
bool criterion_8(const Context&, std::string& detail) {
  const Topology topo = build_symmetric_ring(1);
  const DiffusionParams params;
  const double t = 1e-4;  // the first scheduled receiver sample
  const long long s_a = 8000;
  const int n_samples = 10000;

  std::vector<long long> histogram(48, 0);
  for (int s = 0; s < n_samples; ++s) {
    MoleculeCloud cloud;
    cloud.batches.push_back(MoleculeBatch{});
    auto& batch = cloud.batches.back();
    batch.x.assign(static_cast<std::size_t>(s_a), 0.0);
    batch.y.assign(static_cast<std::size_t>(s_a), 0.0);
    batch.z.assign(static_cast<std::size_t>(s_a), 0.0);
    Philox rng(8891, static_cast<std::uint64_t>(s));
    step_brownian(cloud, params.d_a, t, rng);
    const long long count = count_inside(cloud, topo.receivers[0]);
    if (count < static_cast<long long>(histogram.size()))
      ++histogram[static_cast<std::size_t>(count)];
  }
  const double mean = static_cast<double>(s_a) *
                      p_ob_uniform(t, topo.receivers[0].volume_um3() * 1e-18,
                                   topo.tx_rx_distance(0) * 1e-6, params.d_a);
  const auto res = chi_square_poisson_gof(histogram, mean);
  std::ostringstream os;
  os << "mean=" << mean << " chi2=" << res.statistic << " dof=" << res.dof
     << " p=" << res.p_value << " samples=" << n_samples;
  detail = os.str();
  return res.p_value > 0.01;
}

// 9. Byte-identical simulate CSVs across thread counts via the CLI.
bool criterion_9(const Context& ctx, std::string& detail) {
  if (ctx.cli_path.empty()) {
    detail = "no --cli path given";
    return false;
  }
  namespace fs = std::filesystem;
  const fs::path work = fs::path(ctx.work_dir) / "criterion9";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path cfg_path = work / "experiment.ini";
  {
    std::ofstream cfg(cfg_path);
    cfg << "[topology]\nbuilder = \"symmetric_ring\"\nk = 3\n"
        << "[detection]\nxi_rx = 20\nxi_fc = 6\n"
        << "[scheme]\nvariant = \"sd_constant\"\n"
        << "[run]\nsequence_length = 10\n"
        << "[sim]\ntrials = 300\nseed = 4242\n";
  }
  const auto run = [&](const std::string& out, int threads) {
    std::ostringstream cmd;
    cmd << '"' << ctx.cli_path << '"' << " simulate --config " << cfg_path.string() << " --out "
        << (work / out).string() << " --threads " << threads;
    return std::system(cmd.str().c_str());
  };
  if (run("t1", 1) != 0 || run("t4", 4) != 0) {
    detail = "CLI invocation failed";
    return false;
  }
  const auto read_all = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  const std::string a = read_all(work / "t1" / "simulate.csv");
  const std::string b = read_all(work / "t4" / "simulate.csv");
  detail = a.empty() ? "empty CSV" : (a == b ? "CSVs byte-identical (1 vs 4 threads)" : "CSVs differ");
  return !a.empty() && a == b;
}

// 10. Runtime envelope for the exact averaging and the exhaustive optimizer.
bool criterion_10(const Context&, std::string& detail) {
  const Topology topo = build_symmetric_ring(3);
  const DiffusionParams params;
  const ProtocolTiming timing;
  const Thresholds thr = Thresholds::shared(3, 20, 6);

  AveragingOptions opts;
  opts.threads = 1;
  auto start = std::chrono::steady_clock::now();
  const auto rep = average_error(topo, params, timing, thr, 10, 0.5, ExactAveraging{}, opts);
  const double avg_secs = elapsed_seconds(start);

  const ChannelGains gains = build_gains(topo, params, timing, 10);
  const PrefixEnsemble ensemble(gains, params, 10, 0.5);
  start = std::chrono::steady_clock::now();
  const auto res = joint_optimize(
      [&](long long xi_rx, std::span<const long long> xi_fc) { return ensemble.sd_row(xi_rx, xi_fc); },
      {1, 200}, {1, 400}, SearchStrategy::Exhaustive, 0);
  const double opt_secs = elapsed_seconds(start);

  std::ostringstream os;
  os << "average_error " << avg_secs << "s (limit 10), optimizer " << opt_secs
     << "s (limit 600), evaluations=" << res.evaluations << " qbar=" << rep.qbar_fc
     << " q*=" << res.q_star << " at (" << res.xi_rx_star << "," << res.xi_fc_star << ")";
  detail = os.str();
  return avg_secs < 10.0 && opt_secs < 600.0;
}

using CriterionFn = bool (*)(const Context&, std::string&);

struct Criterion {
  int id;
  const char* label;
  CriterionFn fn;
};

const Criterion kCriteria[] = {
    {1, "particle simulation matches the closed form within 3 pooled SE", &criterion_1},
    {2, "micro-instance exhaustive enumeration oracle", &criterion_2},
    {3, "symmetric path equals asymmetric path", &criterion_3},
    {4, "optimized error improves with receiver count", &criterion_4},
    {5, "third-receiver sweep is minimized at 1.67 um", &criterion_5},
    {6, "majority < pooled < single-link ordering with margins", &criterion_6},
    {7, "sphere observation probability matches quadrature", &criterion_7},
    {8, "simulated counts pass a Poisson chi-square", &criterion_8},
    {9, "simulate CSVs are byte-identical across thread counts", &criterion_9},
    {10, "runtime envelope", &criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    if (arg == "--cli" && i + 1 < argc) ctx.cli_path = argv[++i];
    if (arg == "--work" && i + 1 < argc) ctx.work_dir = argv[++i];
  }

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(ctx, detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %2d [%s]: %s — %s\n", c.id, ok ? "PASS" : "FAIL", c.label,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
