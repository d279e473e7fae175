#pragma once

#include <span>
#include <vector>

namespace coopmc {

// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of observed integer counts against Poisson(mean).
// observed[v] is the number of samples equal to v; bins with expected count
// below min_expected are pooled from both tails.
ChiSquareResult chi_square_poisson_gof(std::span<const long long> observed, double mean,
                                       double min_expected = 5.0);

}  // namespace coopmc
