#pragma once

#include "coopmc/error_model.hpp"

namespace coopmc {

enum class SchemeKind { SdConstant, Majority, SingleLink };

struct SchemeSpec {
  SchemeKind variant = SchemeKind::SdConstant;
  // Majority only: global 1 iff at least this many reports decode as 1.
  // 0 means ceil((K+1)/2). The per-type detection threshold is Thresholds::xi_fc.
  int vote_threshold = 0;

  int resolved_vote_threshold(std::size_t k) const;
};

const char* scheme_name(SchemeKind kind);

// Single TX-RX link, the receiver decision is final. Uses receiver 0 of the
// topology; params.s_a is the single-link release size.
ErrorReport single_link_error(const Topology& topo, const DiffusionParams& params,
                              const ProtocolTiming& timing, long long xi_rx, int L, double p1,
                              const ExactAveraging&, const AveragingOptions& opts = {});
ErrorReport single_link_error(const Topology& topo, const DiffusionParams& params,
                              const ProtocolTiming& timing, long long xi_rx, int L, double p1,
                              const MonteCarloAveraging& mc, const AveragingOptions& opts = {});

// Distinct-molecule-type baseline: the FC decodes each receiver's report
// against thresholds.xi_fc (per-type count threshold) and declares 1 iff at
// least vote_threshold receivers decode as 1. Each type's Poisson mean
// carries only its own receiver's decision history.
ErrorReport majority_rule_error(const Topology& topo, const DiffusionParams& params,
                                const ProtocolTiming& timing, const Thresholds& thresholds,
                                const SchemeSpec& scheme, int L, double p1, const ExactAveraging&,
                                const AveragingOptions& opts = {});
ErrorReport majority_rule_error(const Topology& topo, const DiffusionParams& params,
                                const ProtocolTiming& timing, const Thresholds& thresholds,
                                const SchemeSpec& scheme, int L, double p1,
                                const MonteCarloAveraging& mc, const AveragingOptions& opts = {});

// Global miss (current_bit = 1) or false alarm (current_bit = 0) for the
// majority rule at symbol j = prefix.size() + 1, marginalized over each
// receiver's own decision-history window.
double majority_q_symbol(std::span<const std::uint8_t> prefix, int current_bit,
                         const ChannelGains& gains, const DiffusionParams& params,
                         const Thresholds& thresholds, int vote_threshold,
                         const AveragingOptions& opts = {});

}  // namespace coopmc
