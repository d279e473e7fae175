#include "coopmc/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "coopmc/poisson.hpp"

namespace coopmc {

namespace {

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), valid for x >= a + 1 (modified Lentz).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

ChiSquareResult chi_square_poisson_gof(std::span<const long long> observed, double mean,
                                       double min_expected) {
  if (!(mean >= 0.0)) throw std::invalid_argument("chi_square: mean must be >= 0");
  long long n_samples = 0;
  for (long long c : observed) n_samples += c;
  if (n_samples < 1) throw std::invalid_argument("chi_square: no samples");

  // Expected per-value counts; the final cell absorbs the upper tail.
  const std::size_t v_max = observed.size();
  std::vector<double> expected(v_max + 1, 0.0);
  std::vector<double> obs(v_max + 1, 0.0);
  for (std::size_t v = 0; v < v_max; ++v) {
    const double pmf = poisson_cdf(static_cast<long long>(v), mean) -
                       poisson_cdf(static_cast<long long>(v) - 1, mean);
    expected[v] = pmf * static_cast<double>(n_samples);
    obs[v] = static_cast<double>(observed[v]);
  }
  expected[v_max] = poisson_sf(static_cast<long long>(v_max) - 1, mean) * static_cast<double>(n_samples);
  obs[v_max] = 0.0;

  // Pool sparse cells from both ends toward the middle.
  std::vector<double> e_pooled, o_pooled;
  double e_acc = 0.0, o_acc = 0.0;
  for (std::size_t v = 0; v <= v_max; ++v) {
    e_acc += expected[v];
    o_acc += obs[v];
    if (e_acc >= min_expected) {
      e_pooled.push_back(e_acc);
      o_pooled.push_back(o_acc);
      e_acc = 0.0;
      o_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (!e_pooled.empty()) {
      e_pooled.back() += e_acc;
      o_pooled.back() += o_acc;
    } else {
      e_pooled.push_back(e_acc);
      o_pooled.push_back(o_acc);
    }
  }

  ChiSquareResult res;
  if (e_pooled.size() < 2) {
    res.dof = 0;
    res.p_value = 1.0;
    return res;
  }
  for (std::size_t i = 0; i < e_pooled.size(); ++i) {
    const double diff = o_pooled[i] - e_pooled[i];
    res.statistic += diff * diff / e_pooled[i];
  }
  res.dof = static_cast<int>(e_pooled.size()) - 1;
  res.p_value = gamma_q(0.5 * res.dof, 0.5 * res.statistic);
  return res;
}

}  // namespace coopmc
