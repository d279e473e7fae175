#include "coopmc/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace coopmc {

namespace {

void check_mean(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
}

// Renormalized-product fallback for means too large for exp(-mean) to be
// representable: terms are scaled to the mode and the sum normalized.
double cdf_renormalized(long long k_max, double mean) {
  const auto mode = static_cast<long long>(mean);
  const long long spread = static_cast<long long>(60.0 * std::sqrt(mean)) + 40;
  const long long lo = std::max<long long>(0, mode - spread);
  const long long hi = mode + spread;
  std::vector<double> terms(static_cast<std::size_t>(hi - lo + 1));
  terms[static_cast<std::size_t>(mode - lo)] = 1.0;
  for (long long n = mode; n > lo; --n)
    terms[static_cast<std::size_t>(n - 1 - lo)] =
        terms[static_cast<std::size_t>(n - lo)] * static_cast<double>(n) / mean;
  for (long long n = mode; n < hi; ++n)
    terms[static_cast<std::size_t>(n + 1 - lo)] =
        terms[static_cast<std::size_t>(n - lo)] * mean / static_cast<double>(n + 1);
  double total = 0.0, below = 0.0;
  for (long long n = lo; n <= hi; ++n) {
    total += terms[static_cast<std::size_t>(n - lo)];
    if (n <= k_max) below += terms[static_cast<std::size_t>(n - lo)];
  }
  if (k_max < lo) return 0.0;
  return std::min(below / total, 1.0);
}

}  // namespace

double poisson_cdf(long long k_max, double mean) {
  check_mean(mean);
  if (k_max < 0) return 0.0;
  if (mean == 0.0) return 1.0;
  if (mean >= 700.0) return cdf_renormalized(k_max, mean);

  double term = std::exp(-mean);
  double sum = term;
  for (long long n = 1; n <= k_max; ++n) {
    term *= mean / static_cast<double>(n);
    sum += term;
    if (static_cast<double>(n) > mean && term < sum * 1e-18) break;
  }
  return std::min(sum, 1.0);
}

double poisson_sf(long long k_max, double mean) {
  check_mean(mean);
  if (k_max < 0) return 1.0;
  if (mean == 0.0) return 0.0;
  // Below the mean the survival probability is large; the complement costs no
  // relative precision there.
  if (static_cast<double>(k_max) < mean || mean >= 700.0)
    return std::clamp(1.0 - poisson_cdf(k_max, mean), 0.0, 1.0);

  double logpmf = -mean + static_cast<double>(k_max + 1) * std::log(mean) -
                  std::lgamma(static_cast<double>(k_max + 2));
  if (logpmf < -745.0) return 0.0;
  double term = std::exp(logpmf);
  double sum = 0.0;
  for (long long n = k_max + 1;; ++n) {
    sum += term;
    term *= mean / static_cast<double>(n + 1);
    if (term < sum * 1e-18 || term < 1e-320) break;
  }
  return std::min(sum, 1.0);
}

void poisson_pmf_table(double mean, std::span<double> out) {
  check_mean(mean);
  if (out.empty()) return;
  if (mean == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    return;
  }
  if (mean < 700.0) {
    double term = std::exp(-mean);
    for (std::size_t n = 0; n < out.size(); ++n) {
      out[n] = term;
      term *= mean / static_cast<double>(n + 1);
    }
    return;
  }
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double logpmf = -mean + static_cast<double>(n) * std::log(mean) -
                          std::lgamma(static_cast<double>(n + 1));
    out[n] = logpmf < -745.0 ? 0.0 : std::exp(logpmf);
  }
}

}  // namespace coopmc
