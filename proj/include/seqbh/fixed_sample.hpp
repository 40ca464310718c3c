#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqbh {

// Step-up rule at level alpha: sort p-values ascending, find the largest i
// with p_(i) <= i*alpha/K, reject the hypotheses holding the i smallest
// p-values. Returns rejected indices in ascending index order.
inline std::vector<int> fixed_sample_bh(const std::vector<double>& p_values, double alpha) {
  if (p_values.empty()) throw std::invalid_argument("fixed_sample_bh: empty p-value list");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("fixed_sample_bh: alpha must be in (0,1)");
  const int k = static_cast<int>(p_values.size());
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("fixed_sample_bh: p-values must lie in [0,1]");
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return p_values[a] < p_values[b] || (p_values[a] == p_values[b] && a < b); });
  int cut = 0;
  for (int i = 1; i <= k; ++i)
    if (p_values[order[i - 1]] <= static_cast<double>(i) * alpha / k) cut = i;
  std::vector<int> rejected(order.begin(), order.begin() + cut);
  std::sort(rejected.begin(), rejected.end());
  return rejected;
}

// Exact one-sided binomial tail P(X >= successes) for X ~ Bin(n, p0).
// Summed from the smallest terms upward in long double to keep the tail
// accurate for the modest n used here.
inline double binomial_tail_pvalue(long long n, long long successes, double p0) {
  if (n < 1) throw std::invalid_argument("binomial_tail_pvalue: n must be >= 1");
  if (!(p0 > 0.0 && p0 < 1.0))
    throw std::invalid_argument("binomial_tail_pvalue: p0 must be in (0,1)");
  if (successes <= 0) return 1.0;
  if (successes > n) return 0.0;
  const long double logp = std::log(static_cast<long double>(p0));
  const long double logq = std::log(1.0L - static_cast<long double>(p0));
  long double total = 0.0L;
  for (long long j = n; j >= successes; --j) {
    const long double logpmf = std::lgammal(static_cast<long double>(n) + 1.0L) -
                               std::lgammal(static_cast<long double>(j) + 1.0L) -
                               std::lgammal(static_cast<long double>(n - j) + 1.0L) +
                               j * logp + (n - j) * logq;
    total += std::exp(logpmf);
  }
  return std::min(1.0, static_cast<double>(total));
}

// One-sided upper-tail standard-normal p-value of sqrt(n)*(mean - theta0).
inline double normal_tail_pvalue(long long n, double sample_mean, double theta0 = 0.0) {
  if (n < 1) throw std::invalid_argument("normal_tail_pvalue: n must be >= 1");
  const double z = std::sqrt(static_cast<double>(n)) * (sample_mean - theta0);
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace seqbh
