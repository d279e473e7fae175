#include "coopmc/optimize.hpp"

#include <algorithm>
#include <stdexcept>

#include "coopmc/parallel.hpp"

namespace coopmc {

RowObjective row_objective_from_pairs(std::function<double(long long, long long)> objective) {
  return [obj = std::move(objective)](long long xi_rx, std::span<const long long> xi_fc) {
    std::vector<double> row(xi_fc.size());
    for (std::size_t i = 0; i < xi_fc.size(); ++i) row[i] = obj(xi_rx, xi_fc[i]);
    return row;
  };
}

namespace {

void check_range(const ThresholdRange& r, const char* name) {
  if (r.lo < 1 || r.hi < r.lo)
    throw std::invalid_argument(std::string("joint_optimize: empty ") + name + " range");
}

std::vector<long long> stride_values(const ThresholdRange& r, long long stride) {
  std::vector<long long> vs;
  for (long long v = r.lo; v <= r.hi; v += stride) vs.push_back(v);
  if (vs.back() != r.hi) vs.push_back(r.hi);
  return vs;
}

struct GridScan {
  std::vector<SurfacePoint> points;
  long long evaluations = 0;
};

GridScan scan(const RowObjective& objective, const std::vector<long long>& rx_values,
              const std::vector<long long>& fc_values, int threads) {
  GridScan out;
  std::vector<std::vector<double>> rows(rx_values.size());
  parallel_for(rx_values.size(), threads, [&](std::size_t i) {
    rows[i] = objective(rx_values[i], fc_values);
    if (rows[i].size() != fc_values.size())
      throw std::runtime_error("joint_optimize: objective returned a short row");
  });
  out.points.reserve(rx_values.size() * fc_values.size());
  for (std::size_t i = 0; i < rx_values.size(); ++i)
    for (std::size_t f = 0; f < fc_values.size(); ++f)
      out.points.push_back({rx_values[i], fc_values[f], rows[i][f]});
  out.evaluations = static_cast<long long>(out.points.size());
  return out;
}

}  // namespace

OptimizationResult joint_optimize(const RowObjective& objective, ThresholdRange xi_rx_range,
                                  ThresholdRange xi_fc_range, SearchStrategy strategy, int threads,
                                  long long coarse_stride) {
  check_range(xi_rx_range, "xi_rx");
  check_range(xi_fc_range, "xi_fc");
  if (coarse_stride < 1) throw std::invalid_argument("joint_optimize: stride must be >= 1");

  GridScan merged;
  if (strategy == SearchStrategy::Exhaustive) {
    merged = scan(objective, stride_values(xi_rx_range, 1), stride_values(xi_fc_range, 1), threads);
  } else {
    merged = scan(objective, stride_values(xi_rx_range, coarse_stride),
                  stride_values(xi_fc_range, coarse_stride), threads);
    SurfacePoint coarse_best = merged.points.front();
    for (const auto& p : merged.points)
      if (p.qbar < coarse_best.qbar ||
          (p.qbar == coarse_best.qbar &&
           std::pair(p.xi_rx, p.xi_fc) < std::pair(coarse_best.xi_rx, coarse_best.xi_fc)))
        coarse_best = p;
    const ThresholdRange rx_fine{std::max(xi_rx_range.lo, coarse_best.xi_rx - coarse_stride),
                                 std::min(xi_rx_range.hi, coarse_best.xi_rx + coarse_stride)};
    const ThresholdRange fc_fine{std::max(xi_fc_range.lo, coarse_best.xi_fc - coarse_stride),
                                 std::min(xi_fc_range.hi, coarse_best.xi_fc + coarse_stride)};
    GridScan fine = scan(objective, stride_values(rx_fine, 1), stride_values(fc_fine, 1), threads);
    merged.evaluations += fine.evaluations;
    merged.points.insert(merged.points.end(), fine.points.begin(), fine.points.end());
    std::sort(merged.points.begin(), merged.points.end(), [](const auto& a, const auto& b) {
      return std::pair(a.xi_rx, a.xi_fc) < std::pair(b.xi_rx, b.xi_fc);
    });
    merged.points.erase(std::unique(merged.points.begin(), merged.points.end(),
                                    [](const auto& a, const auto& b) {
                                      return a.xi_rx == b.xi_rx && a.xi_fc == b.xi_fc;
                                    }),
                        merged.points.end());
  }

  OptimizationResult result;
  result.evaluations = merged.evaluations;
  result.surface = std::move(merged.points);
  const SurfacePoint* best = &result.surface.front();
  for (const auto& p : result.surface)
    if (p.qbar < best->qbar) best = &p;  // surface is (xi_rx, xi_fc) ordered
  result.xi_rx_star = best->xi_rx;
  result.xi_fc_star = best->xi_fc;
  result.q_star = best->qbar;
  return result;
}

}  // namespace coopmc
