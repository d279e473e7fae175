#include <doctest.h>

#include <stdexcept>

#include <cstdio>
#include <filesystem>
#include <numbers>

#include "coopmc/channel.hpp"
#include "support/oracles.hpp"

using namespace coopmc;

namespace {

double rx_volume_m3(double radius_um) {
  const double r = radius_um * 1e-6;
  return (4.0 / 3.0) * std::numbers::pi * r * r * r;
}

DiffusionParams table_params() { return {}; }
ProtocolTiming table_timing() { return {}; }

}  // namespace

TEST_CASE("p_ob_uniform limits and reference value") {
  const double v = rx_volume_m3(0.225);
  const double d = 2.088e-6, D = 5e-9;
  CHECK(p_ob_uniform(1e-12, v, d, D) == doctest::Approx(0.0).epsilon(1e-30));
  CHECK(p_ob_uniform(1e6, v, d, D) < 1e-12);
  // frozen from an arbitrary-precision evaluation of the closed form
  CHECK(p_ob_uniform(1e-4, v, d, D) == doctest::Approx(3.4249953030130421e-4).epsilon(1e-12));
  CHECK_THROWS_AS(p_ob_uniform(0.0, v, d, D), std::invalid_argument);
  CHECK_THROWS_AS(p_ob_uniform(1e-4, v, -d, D), std::invalid_argument);
}

TEST_CASE("p_ob_uniform clamps near-source breakdown and flags it") {
  bool clamped = false;
  // tiny distance, tiny time: the closed form blows past 1
  const double p = p_ob_uniform(1e-9, rx_volume_m3(0.225), 1e-9, 5e-9, &clamped);
  CHECK(p == 1.0);
  CHECK(clamped);
}

TEST_CASE("p_ob_sphere limits") {
  const double r = 0.225e-6, D = 5e-9;
  CHECK(p_ob_sphere(1e-12, r, 0.6e-6, D) == doctest::Approx(0.0).epsilon(1e-30));    // outside
  CHECK(p_ob_sphere(1e-12, r, 0.1e-6, D) == doctest::Approx(1.0).epsilon(1e-12));    // inside
  CHECK(p_ob_sphere(1e5, r, 0.6e-6, D) < 1e-12);
  CHECK_THROWS_AS(p_ob_sphere(-1.0, r, 0.6e-6, D), std::invalid_argument);
}

TEST_CASE("p_ob_sphere matches ball quadrature of the Gaussian kernel") {
  const double r = 0.225e-6, D = 5e-9;
  // frozen reference value at the report-window scale
  CHECK(p_ob_sphere(3e-5, r, 0.6e-6, D) ==
        doctest::Approx(9.8155063555931553e-3).epsilon(1e-12));
  for (double t : {1e-5, 3e-5, 2e-4, 1.1e-3}) {
    for (double d : {0.3e-6, 0.6e-6, 1.2e-6, 2.088e-6}) {
      const double quad = oracles::sphere_observation_quadrature(t, r, d, D);
      CHECK(p_ob_sphere(t, r, d, D) == doctest::Approx(quad).epsilon(1e-6));
    }
  }
}

TEST_CASE("p_ob_sphere decreases with distance") {
  const double r = 0.225e-6, D = 5e-9;
  for (double t : {1e-5, 1e-4, 1e-3}) {
    double prev = 2.0;
    for (double d = 0.3e-6; d < 3e-6; d += 0.15e-6) {
      const double p = p_ob_sphere(t, r, d, D);
      CHECK(p < prev);
      prev = p;
    }
  }
}

TEST_CASE("p_ob_sphere approaches the uniform-concentration form far away") {
  const double r = 0.1e-6, D = 5e-9;
  const double volume = rx_volume_m3(0.1);
  for (double d : {1.0e-6, 1.5e-6, 2.5e-6}) {
    const double t = d * d / (4.0 * D) * 1.5;  // 4Dt >= d^2
    const double exact = p_ob_sphere(t, r, d, D);
    const double approx = p_ob_uniform(t, volume, d, D);
    CHECK(std::abs(exact - approx) / exact < 0.01);
  }
}

TEST_CASE("build_gains shapes and decay") {
  const Topology topo = build_symmetric_ring(3);
  const auto gains1 = build_gains(topo, table_params(), table_timing(), 1);
  CHECK(gains1.lags() == 1);
  CHECK(gains1.num_receivers() == 3);

  const auto gains = build_gains(topo, table_params(), table_timing(), 10);
  CHECK(gains.lags() == 10);
  // symmetric topology: per-receiver columns agree
  for (int l = 0; l < 10; ++l) {
    for (std::size_t k = 1; k < 3; ++k) {
      CHECK(gains.tx_rx[k][static_cast<std::size_t>(l)] ==
            doctest::Approx(gains.tx_rx[0][static_cast<std::size_t>(l)]).epsilon(1e-12));
      CHECK(gains.rx_fc[k][static_cast<std::size_t>(l)] ==
            doctest::Approx(gains.rx_fc[0][static_cast<std::size_t>(l)]).epsilon(1e-12));
    }
  }
  CHECK(gains.symmetric());
  // the diffusion tail after one full interval sits below the in-window peak
  CHECK(gains.tx_rx[0][1] < gains.tx_rx[0][0]);
  CHECK(gains.rx_fc[0][1] < gains.rx_fc[0][0]);
  for (int l = 1; l + 1 < 10; ++l) {
    CHECK(gains.tx_rx[0][static_cast<std::size_t>(l + 1)] <=
          gains.tx_rx[0][static_cast<std::size_t>(l)]);
    CHECK(gains.rx_fc[0][static_cast<std::size_t>(l + 1)] <=
          gains.rx_fc[0][static_cast<std::size_t>(l)]);
  }
}

TEST_CASE("build_gains is invariant under receiver re-ordering") {
  Topology topo = build_asymmetric_line(3);
  const auto gains = build_gains(topo, table_params(), table_timing(), 4);
  Topology permuted = topo;
  std::swap(permuted.receivers[0], permuted.receivers[2]);
  const auto gains_p = build_gains(permuted, table_params(), table_timing(), 4);
  for (int l = 0; l < 4; ++l) {
    CHECK(gains.tx_rx[0][static_cast<std::size_t>(l)] ==
          gains_p.tx_rx[2][static_cast<std::size_t>(l)]);
    CHECK(gains.rx_fc[2][static_cast<std::size_t>(l)] ==
          gains_p.rx_fc[0][static_cast<std::size_t>(l)]);
  }
}

TEST_CASE("poisson_mean linearity") {
  const std::vector<double> gains = {0.5, 0.25, 0.125};
  const std::vector<std::uint8_t> zeros = {0, 0, 0};
  CHECK(poisson_mean(zeros, gains, 100.0) == 0.0);
  const std::vector<std::uint8_t> single = {1};
  CHECK(poisson_mean(single, gains, 100.0) == doctest::Approx(50.0));
  const std::vector<std::uint8_t> two = {1, 1};
  CHECK(poisson_mean(two, gains, 100.0) == doctest::Approx(100.0 * (0.25 + 0.5)));
  const std::vector<std::uint8_t> too_long = {1, 1, 1, 1};
  CHECK_THROWS_AS(poisson_mean(too_long, gains, 1.0), std::invalid_argument);
}

TEST_CASE("gains sidecar cache round-trips and rejects stale keys") {
  const Topology topo = build_symmetric_ring(2);
  const auto gains = build_gains(topo, table_params(), table_timing(), 5);
  const auto key = gains_input_key(topo, table_params(), table_timing(), 5);

  const auto path = std::filesystem::temp_directory_path() / "coopmc_gains_test.bin";
  write_gains(path.string(), gains, key);
  const auto loaded = read_gains(path.string(), key);
  REQUIRE(loaded.has_value());
  CHECK(loaded->tx_rx == gains.tx_rx);
  CHECK(loaded->rx_fc == gains.rx_fc);
  CHECK_FALSE(read_gains(path.string(), key + 1).has_value());
  std::filesystem::remove(path);
}

TEST_CASE("half-duplex timing constraints are enforced") {
  ProtocolTiming timing = table_timing();
  CHECK_NOTHROW(timing.validate());
  timing.dt_rx = 2.5e-4;  // 5 * 0.25 ms >= 1 ms
  CHECK_THROWS_AS(timing.validate(), std::invalid_argument);
  timing = table_timing();
  timing.dt_fc = 1e-4;  // 5 * 0.1 ms >= 0.3 ms
  CHECK_THROWS_AS(timing.validate(), std::invalid_argument);
}
