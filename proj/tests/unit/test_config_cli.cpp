#include <doctest.h>

#include <string>

#include "coopmc/config.hpp"

using namespace coopmc;

namespace {

const char* kReferenceConfig = R"(# reference parameter set
[topology]
builder = "symmetric_ring"
k = 3
rx_radius_um = 0.225
fc_radius_um = 0.225

[detection]
xi_rx = 20
xi_fc = 6

[scheme]
variant = "sd_constant"

[run]
sequence_length = 10
)";

}  // namespace

TEST_CASE("reference parameters are accepted with defaults filled in") {
  const auto result = validate_config(kReferenceConfig);
  REQUIRE(result.ok());
  const auto& cfg = *result.config;
  CHECK(cfg.diffusion.s_a == 8000);
  CHECK(cfg.diffusion.s_b == 667);  // ceil(2000 / 3)
  CHECK(cfg.diffusion.d_a == 5e-9);
  CHECK(cfg.timing.symbol_interval == doctest::Approx(1.1e-3));
  CHECK(cfg.timing.t_trans == doctest::Approx(1e-3));
  CHECK(cfg.timing.t_report == doctest::Approx(3e-4));
  CHECK(cfg.timing.m_rx == 5);
  CHECK(cfg.timing.m_fc == 5);
  CHECK(cfg.timing.dt_rx == doctest::Approx(1e-4));
  CHECK(cfg.timing.dt_fc == doctest::Approx(3e-5));
  CHECK(cfg.run.sequence_length == 10);
  CHECK(cfg.run.p1 == 0.5);
  CHECK(cfg.xi_rx == 20);
  CHECK(cfg.xi_fc == 6);

  // the reference timing overruns the symbol interval; that is a warning only
  bool has_spill_warning = false;
  for (const auto& d : result.diagnostics)
    if (!d.error && d.message.find("spill") != std::string::npos) has_spill_warning = true;
  CHECK(has_spill_warning);
}

TEST_CASE("half-duplex violations are rejected with a pointed diagnostic") {
  std::string text = kReferenceConfig;
  text += "\n[timing]\ndt_rx = 0.00025\n";  // 5 * 0.25 ms >= 1 ms
  const auto result = validate_config(text);
  CHECK_FALSE(result.ok());
  bool found = false;
  for (const auto& d : result.diagnostics)
    if (d.error && d.message.find("half-duplex") != std::string::npos) {
      found = true;
      CHECK(d.line > 0);
    }
  CHECK(found);
}

TEST_CASE("empty config lists every missing required key") {
  const auto result = validate_config("");
  CHECK_FALSE(result.ok());
  int missing = 0;
  for (const auto& d : result.diagnostics)
    if (d.message.find("missing required key") != std::string::npos) ++missing;
  CHECK(missing == 5);
}

TEST_CASE("unknown keys and sections are rejected") {
  std::string text = kReferenceConfig;
  text += "\n[timing]\nwarp_factor = 9\n";
  const auto r1 = validate_config(text);
  CHECK_FALSE(r1.ok());
  bool found = false;
  for (const auto& d : r1.diagnostics)
    if (d.message.find("unknown key 'timing.warp_factor'") != std::string::npos) found = true;
  CHECK(found);

  std::string text2 = kReferenceConfig;
  text2 += "\n[warp]\nfactor = 9\n";
  CHECK_FALSE(validate_config(text2).ok());
}

TEST_CASE("multiple violations are all reported") {
  std::string text = kReferenceConfig;
  text += "\n[run]\np1 = 1.5\n\n[sim]\ntrials = 0\n";
  const auto result = validate_config(text);
  CHECK_FALSE(result.ok());
  int errors = 0;
  for (const auto& d : result.diagnostics)
    if (d.error) ++errors;
  CHECK(errors >= 2);
}

TEST_CASE("emitted configs re-parse to an identical config") {
  const auto result = validate_config(kReferenceConfig);
  REQUIRE(result.ok());
  const std::string emitted = result.config->emit();
  const auto round = validate_config(emitted);
  REQUIRE(round.ok());
  CHECK(round.config->emit() == emitted);
  CHECK(round.config->hash() == result.config->hash());
}

TEST_CASE("explicit topologies and sweeps round-trip") {
  const char* text = R"(
[topology]
builder = "explicit"
rx_radius_um = 0.2
fc_radius_um = 0.225
tx = [0, 0, 0]
fc_center = [2, 0, 0]
rx_centers = [2, 0.6, 0, 1.6, 0.48, 0]

[detection]
xi_rx = 5
xi_fc = 3

[scheme]
variant = "sd_constant"

[run]
sequence_length = 4

[sweep]
parameter = "xi_rx"
from = 1
to = 12
step = 1
)";
  const auto result = validate_config(text);
  REQUIRE(result.ok());
  const auto& cfg = *result.config;
  CHECK(cfg.topology.receiver_count() == 2);
  const Topology topo = cfg.topology.build();
  CHECK(topo.tx_rx_distance(1) == doctest::Approx(1.670449).epsilon(1e-5));
  REQUIRE(cfg.sweep.has_value());
  CHECK(cfg.sweep->values().size() == 12);

  const std::string emitted = cfg.emit();
  const auto round = validate_config(emitted);
  REQUIRE(round.ok());
  CHECK(round.config->emit() == emitted);
}

TEST_CASE("single-link scheme requires exactly one receiver") {
  std::string text = kReferenceConfig;
  text += "\n[scheme]\nvariant = \"single_link\"\n";
  // duplicate section key: the parser flags the duplicate [scheme] variant
  const auto result = validate_config(text);
  CHECK_FALSE(result.ok());

  const char* text2 = R"(
[topology]
builder = "symmetric_ring"
k = 3

[detection]
xi_rx = 5
xi_fc = 3

[scheme]
variant = "single_link"

[run]
sequence_length = 4
)";
  const auto r2 = validate_config(text2);
  CHECK_FALSE(r2.ok());
  bool found = false;
  for (const auto& d : r2.diagnostics)
    if (d.message.find("single_link") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("bad values carry their line numbers") {
  const char* text = R"([topology]
builder = "symmetric_ring"
k = banana
)";
  const auto result = validate_config(text);
  CHECK_FALSE(result.ok());
  bool found = false;
  for (const auto& d : result.diagnostics)
    if (d.line == 3) found = true;
  CHECK(found);
}

TEST_CASE("default_config builds and validates") {
  const ExperimentConfig cfg = default_config();
  const auto round = validate_config(cfg.emit());
  REQUIRE(round.ok());
  CHECK(round.config->emit() == cfg.emit());
  CHECK_NOTHROW(cfg.topology.build().validate());
}
