#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coopmc/config.hpp"
#include "coopmc/error_surface.hpp"
#include "coopmc/optimize.hpp"
#include "coopmc/poisson.hpp"
#include "coopmc/runner.hpp"
#include "coopmc/stats.hpp"
#include "coopmc/version.hpp"

namespace py = pybind11;
using namespace coopmc;

namespace {

ErrorReport average_error_py(const Topology& topo, const DiffusionParams& params,
                             const ProtocolTiming& timing, const Thresholds& thr, int L, double p1,
                             bool monte_carlo, long long mc_samples, std::uint64_t mc_seed,
                             int isi_window, int threads) {
  AveragingOptions opts;
  opts.isi_window = isi_window;
  opts.threads = threads;
  if (monte_carlo)
    return average_error(topo, params, timing, thr, L, p1, MonteCarloAveraging{mc_samples, mc_seed},
                         opts);
  return average_error(topo, params, timing, thr, L, p1, ExactAveraging{}, opts);
}

OptimizationResult optimize_sd_py(const Topology& topo, const DiffusionParams& params,
                                  const ProtocolTiming& timing, int L, double p1,
                                  long long xi_rx_lo, long long xi_rx_hi, long long xi_fc_lo,
                                  long long xi_fc_hi, int isi_window, int threads) {
  const ChannelGains gains = build_gains(topo, params, timing, L);
  AveragingOptions opts;
  opts.isi_window = isi_window;
  opts.threads = threads;
  const PrefixEnsemble ensemble(gains, params, L, p1, opts);
  return joint_optimize(
      [&](long long xi_rx, std::span<const long long> xi_fc) { return ensemble.sd_row(xi_rx, xi_fc); },
      {xi_rx_lo, xi_rx_hi}, {xi_fc_lo, xi_fc_hi}, SearchStrategy::Exhaustive, threads);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cooperative molecular-communication error toolkit";
  m.attr("__version__") = kVersion;

  py::class_<Vec3>(m, "Vec3")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"))
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z)
      .def("__repr__", [](const Vec3& v) {
        return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " +
               std::to_string(v.z) + ")";
      });

  py::class_<SphericalObserver>(m, "SphericalObserver")
      .def(py::init<>())
      .def(py::init([](const Vec3& center, double radius) {
             return SphericalObserver{center, radius};
           }),
           py::arg("center"), py::arg("radius"))
      .def_readwrite("center", &SphericalObserver::center)
      .def_readwrite("radius", &SphericalObserver::radius)
      .def("volume_um3", &SphericalObserver::volume_um3);

  py::class_<Topology>(m, "Topology")
      .def(py::init<>())
      .def_readwrite("tx", &Topology::tx)
      .def_readwrite("receivers", &Topology::receivers)
      .def_readwrite("fc", &Topology::fc)
      .def("num_receivers", &Topology::num_receivers)
      .def("tx_rx_distance", &Topology::tx_rx_distance, py::arg("k"))
      .def("rx_fc_distance", &Topology::rx_fc_distance, py::arg("k"))
      .def("validate", &Topology::validate);

  m.def("distance", &distance, py::arg("a"), py::arg("b"));
  m.def("is_symmetric", &is_symmetric, py::arg("topology"), py::arg("rel_tol") = 1e-9);
  m.def("build_symmetric_ring", &build_symmetric_ring, py::arg("k"),
        py::arg("rx_radius_um") = 0.225, py::arg("fc_radius_um") = 0.225);
  m.def("build_asymmetric_line", &build_asymmetric_line, py::arg("case_index"),
        py::arg("rx_radius_um") = 0.225, py::arg("fc_radius_um") = 0.225);

  py::class_<DiffusionParams>(m, "DiffusionParams")
      .def(py::init<>())
      .def_readwrite("d_a", &DiffusionParams::d_a)
      .def_readwrite("d_b", &DiffusionParams::d_b)
      .def_readwrite("s_a", &DiffusionParams::s_a)
      .def_readwrite("s_b", &DiffusionParams::s_b);

  py::class_<ProtocolTiming>(m, "ProtocolTiming")
      .def(py::init<>())
      .def_readwrite("symbol_interval", &ProtocolTiming::symbol_interval)
      .def_readwrite("t_trans", &ProtocolTiming::t_trans)
      .def_readwrite("t_report", &ProtocolTiming::t_report)
      .def_readwrite("m_rx", &ProtocolTiming::m_rx)
      .def_readwrite("m_fc", &ProtocolTiming::m_fc)
      .def_readwrite("dt_rx", &ProtocolTiming::dt_rx)
      .def_readwrite("dt_fc", &ProtocolTiming::dt_fc)
      .def("validate", &ProtocolTiming::validate);

  py::class_<Thresholds>(m, "Thresholds")
      .def(py::init<>())
      .def_static("shared", &Thresholds::shared, py::arg("k"), py::arg("xi_rx"), py::arg("xi_fc"))
      .def_readwrite("xi_rx", &Thresholds::xi_rx)
      .def_readwrite("xi_fc", &Thresholds::xi_fc);

  py::class_<ChannelGains>(m, "ChannelGains")
      .def_readonly("tx_rx", &ChannelGains::tx_rx)
      .def_readonly("rx_fc", &ChannelGains::rx_fc)
      .def_readonly("clamp_warnings", &ChannelGains::clamp_warnings)
      .def("symmetric", &ChannelGains::symmetric, py::arg("rel_tol") = 1e-9);

  m.def(
      "p_ob_uniform",
      [](double t, double volume, double d, double D) { return p_ob_uniform(t, volume, d, D); },
      py::arg("t"), py::arg("observer_volume"), py::arg("d"), py::arg("D"));
  m.def("p_ob_sphere", &p_ob_sphere, py::arg("t"), py::arg("r_obs"), py::arg("d"), py::arg("D"));
  m.def("poisson_cdf", &poisson_cdf, py::arg("k_max"), py::arg("mean"));
  m.def("poisson_sf", &poisson_sf, py::arg("k_max"), py::arg("mean"));
  m.def("build_gains", &build_gains, py::arg("topology"), py::arg("params"), py::arg("timing"),
        py::arg("sequence_length"));

  py::class_<ErrorReport>(m, "ErrorReport")
      .def_readonly("q_md", &ErrorReport::q_md)
      .def_readonly("q_fa", &ErrorReport::q_fa)
      .def_readonly("q_fc", &ErrorReport::q_fc)
      .def_readonly("qbar_fc", &ErrorReport::qbar_fc)
      .def_readonly("isi_window", &ErrorReport::isi_window)
      .def_readonly("averaging", &ErrorReport::averaging);

  m.def("average_error", &average_error_py, py::arg("topology"), py::arg("params"),
        py::arg("timing"), py::arg("thresholds"), py::arg("sequence_length"), py::arg("p1"),
        py::arg("monte_carlo") = false, py::arg("mc_samples") = 100000, py::arg("mc_seed") = 1,
        py::arg("isi_window") = 2, py::arg("threads") = 0);

  m.def(
      "single_link_error",
      [](const Topology& topo, const DiffusionParams& params, const ProtocolTiming& timing,
         long long xi_rx, int L, double p1, int isi_window, int threads) {
        AveragingOptions opts;
        opts.isi_window = isi_window;
        opts.threads = threads;
        return single_link_error(topo, params, timing, xi_rx, L, p1, ExactAveraging{}, opts);
      },
      py::arg("topology"), py::arg("params"), py::arg("timing"), py::arg("xi_rx"),
      py::arg("sequence_length"), py::arg("p1"), py::arg("isi_window") = 2, py::arg("threads") = 0);

  m.def(
      "majority_rule_error",
      [](const Topology& topo, const DiffusionParams& params, const ProtocolTiming& timing,
         const Thresholds& thr, int vote_threshold, int L, double p1, int isi_window, int threads) {
        AveragingOptions opts;
        opts.isi_window = isi_window;
        opts.threads = threads;
        const SchemeSpec spec{SchemeKind::Majority, vote_threshold};
        return majority_rule_error(topo, params, timing, thr, spec, L, p1, ExactAveraging{}, opts);
      },
      py::arg("topology"), py::arg("params"), py::arg("timing"), py::arg("thresholds"),
      py::arg("vote_threshold"), py::arg("sequence_length"), py::arg("p1"),
      py::arg("isi_window") = 2, py::arg("threads") = 0);

  py::enum_<SchemeKind>(m, "SchemeKind")
      .value("SD_CONSTANT", SchemeKind::SdConstant)
      .value("MAJORITY", SchemeKind::Majority)
      .value("SINGLE_LINK", SchemeKind::SingleLink);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("sim_step", &SimConfig::sim_step)
      .def_readwrite("rng_seed", &SimConfig::rng_seed)
      .def_readwrite("trials", &SimConfig::trials)
      .def_readwrite("cull_horizon", &SimConfig::cull_horizon)
      .def_readwrite("aggressive_cull", &SimConfig::aggressive_cull)
      .def_readwrite("event_jumps", &SimConfig::event_jumps)
      .def_readwrite("scheme", &SimConfig::scheme)
      .def_readwrite("vote_threshold", &SimConfig::vote_threshold)
      .def_readwrite("threads", &SimConfig::threads)
      .def_readwrite("trial_log", &SimConfig::trial_log);

  py::class_<SimEstimate>(m, "SimEstimate")
      .def_readonly("qbar", &SimEstimate::qbar)
      .def_readonly("se_pooled", &SimEstimate::se_pooled)
      .def_readonly("se_trial", &SimEstimate::se_trial)
      .def_readonly("trials", &SimEstimate::trials)
      .def_readonly("total_errors", &SimEstimate::total_errors)
      .def_readonly("err_when_1", &SimEstimate::err_when_1)
      .def_readonly("err_when_0", &SimEstimate::err_when_0)
      .def_readonly("ones", &SimEstimate::ones)
      .def_readonly("zeros", &SimEstimate::zeros)
      .def("per_symbol_error", &SimEstimate::per_symbol_error, py::arg("j"));

  m.def(
      "estimate_error",
      [](const Topology& topo, const DiffusionParams& params, const ProtocolTiming& timing,
         const Thresholds& thr, int L, double p1, const SimConfig& cfg) {
        return estimate_error(topo, params, timing, thr, L, p1, cfg);
      },
      py::arg("topology"), py::arg("params"), py::arg("timing"), py::arg("thresholds"),
      py::arg("sequence_length"), py::arg("p1"), py::arg("sim_config"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<OptimizationResult>(m, "OptimizationResult")
      .def_readonly("xi_rx_star", &OptimizationResult::xi_rx_star)
      .def_readonly("xi_fc_star", &OptimizationResult::xi_fc_star)
      .def_readonly("q_star", &OptimizationResult::q_star)
      .def_readonly("evaluations", &OptimizationResult::evaluations);

  m.def("optimize_sd", &optimize_sd_py, py::arg("topology"), py::arg("params"), py::arg("timing"),
        py::arg("sequence_length"), py::arg("p1"), py::arg("xi_rx_lo") = 1,
        py::arg("xi_rx_hi") = 200, py::arg("xi_fc_lo") = 1, py::arg("xi_fc_hi") = 400,
        py::arg("isi_window") = 2, py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

  m.def("chi_square_poisson_gof",
        [](const std::vector<long long>& observed, double mean, double min_expected) {
          const auto res = chi_square_poisson_gof(observed, mean, min_expected);
          return py::make_tuple(res.statistic, res.dof, res.p_value);
        },
        py::arg("observed"), py::arg("mean"), py::arg("min_expected") = 5.0);
}
