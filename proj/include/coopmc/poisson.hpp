#pragma once

#include <span>

namespace coopmc {

// Pr(X <= k_max) for X ~ Poisson(mean). k_max = -1 is the empty sum (0).
// Direct stable summation; renormalized products for very large means.
double poisson_cdf(long long k_max, double mean);

// Pr(X > k_max), summed from the upper tail so small survival probabilities
// keep full relative precision.
double poisson_sf(long long k_max, double mean);

// Fills out[n] with Pr(X = n) for n = 0..out.size()-1.
void poisson_pmf_table(double mean, std::span<double> out);

}  // namespace coopmc
