#pragma once

#include <functional>
#include <span>
#include <vector>

namespace coopmc {

enum class SearchStrategy { Exhaustive, CoarseToFine };

struct ThresholdRange {
  long long lo = 1;
  long long hi = 1;  // inclusive
};

struct SurfacePoint {
  long long xi_rx = 0;
  long long xi_fc = 0;
  double qbar = 0.0;
};

struct OptimizationResult {
  long long xi_rx_star = 0;
  long long xi_fc_star = 0;
  double q_star = 0.0;
  long long evaluations = 0;
  std::vector<SurfacePoint> surface;  // every evaluated point, (xi_rx, xi_fc) ordered
};

// Objective evaluated one RX-threshold row at a time; returns Q-bar for each
// requested FC threshold. Row calls are independent and may run in parallel.
using RowObjective =
    std::function<std::vector<double>(long long xi_rx, std::span<const long long> xi_fc)>;

RowObjective row_objective_from_pairs(std::function<double(long long, long long)> objective);

// Integer grid minimization of Q-bar. Exhaustive evaluates every pair;
// coarse-to-fine scans a stride subgrid and then refines around its best
// point (best effort, not guaranteed to find the grid optimum). Ties break
// toward the smallest (xi_rx, xi_fc).
OptimizationResult joint_optimize(const RowObjective& objective, ThresholdRange xi_rx_range,
                                  ThresholdRange xi_fc_range,
                                  SearchStrategy strategy = SearchStrategy::Exhaustive,
                                  int threads = 0, long long coarse_stride = 8);

}  // namespace coopmc
