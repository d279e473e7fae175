#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coopmc/error_model.hpp"
#include "coopmc/optimize.hpp"
#include "coopmc/simulate.hpp"

namespace coopmc {

enum class TopologyBuilder { SymmetricRing, AsymmetricLine, Explicit };

struct TopologySpec {
  TopologyBuilder builder = TopologyBuilder::SymmetricRing;
  int k = 3;           // symmetric_ring
  int case_index = 1;  // asymmetric_line
  double rx_radius_um = 0.225;
  double fc_radius_um = 0.225;
  // explicit coordinates
  Vec3 tx{0.0, 0.0, 0.0};
  Vec3 fc_center{2.0, 0.0, 0.0};
  std::vector<double> rx_centers;  // flattened x,y,z triples

  Topology build() const;
  std::size_t receiver_count() const;
};

struct RunSpec {
  int sequence_length = 10;
  double p1 = 0.5;
  bool monte_carlo = false;
  long long mc_samples = 100000;
  std::uint64_t mc_seed = 1;
  PrefixPrior prior = PrefixPrior::P1Weighted;
  int isi_window = 2;
};

struct OptimizeSpec {
  ThresholdRange xi_rx{1, 200};
  ThresholdRange xi_fc{1, 400};
  SearchStrategy strategy = SearchStrategy::Exhaustive;
  long long stride = 8;
};

struct SweepSpec {
  std::string parameter = "xi_rx";  // xi_rx | xi_fc | s_a | s_b | p1 | k | case_index
  double from = 1;
  double to = 1;
  double step = 1;

  std::vector<double> values() const;
};

struct ExperimentConfig {
  TopologySpec topology;
  DiffusionParams diffusion;
  ProtocolTiming timing;
  long long xi_rx = 1;
  long long xi_fc = 1;
  SchemeKind scheme = SchemeKind::SdConstant;
  int vote_threshold = 0;
  RunSpec run;
  SimConfig sim;
  OptimizeSpec optimize;
  std::optional<SweepSpec> sweep;

  Thresholds thresholds() const;
  AveragingOptions averaging_options(int threads = 0) const;
  SimConfig sim_config(int threads = 0) const;

  // Canonical text form; parsing it back yields an identical config.
  std::string emit() const;
  std::uint64_t hash() const;
};

struct Diagnostic {
  int line = 0;  // 0 when not tied to a specific line
  bool error = true;
  std::string message;
};

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return config.has_value(); }
};

// Parses and validates; on failure the diagnostics list every violation
// found, not just the first.
ConfigResult validate_config(std::string_view text);
ConfigResult load_config_file(const std::string& path);

// Reference parameter set (three-receiver ring, shared radii and timing).
ExperimentConfig default_config();

}  // namespace coopmc
