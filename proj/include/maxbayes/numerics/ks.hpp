#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "maxbayes/errors.hpp"

namespace maxbayes::numerics {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov limiting survival function Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
inline double kolmogorov_sf(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF, with
/// Stephens' small-sample scaling of the statistic.
inline KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

}  // namespace maxbayes::numerics
