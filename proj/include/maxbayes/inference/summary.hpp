#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "maxbayes/errors.hpp"
#include "maxbayes/inference/chain.hpp"

namespace maxbayes::inference {

/// Linear-interpolation sample quantile (R type 7).
inline double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw DomainError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: level outside [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

inline double mean(const std::vector<double>& x) {
  if (x.empty()) throw DomainError("mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

/// Sample autocorrelation; a constant series has autocorrelation 1 at every lag.
inline double autocorrelation(const std::vector<double>& x, int lag) {
  if (x.empty()) throw DomainError("autocorrelation: empty series");
  if (lag < 0) throw DomainError("autocorrelation: negative lag");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return 1.0;
  const double m = mean(x);
  double den = 0.0;
  for (double v : x) den += (v - m) * (v - m);
  double num = 0.0;
  for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < x.size(); ++t)
    num += (x[t] - m) * (x[t + static_cast<std::size_t>(lag)] - m);
  return num / den;
}

/// Integrated autocorrelation time 1 + 2 sum_t rho_t by Geyer's initial monotone sequence
/// (pairs of lags summed while positive and forced non-increasing). 1 for a constant series.
inline double autocorrelation_time(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return std::numeric_limits<double>::quiet_NaN();
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return 1.0;
  const double m = mean(x);
  auto gamma = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - m) * (x[t + lag] - m);
    return s / static_cast<double>(n);
  };
  const double g0 = gamma(0);
  double sum = 0.0, prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = gamma(2 * k) + gamma(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    prev = pair;
    sum += pair;
  }
  return std::max(1.0, (2.0 * sum - g0) / g0);
}

/// Monte Carlo standard error of the mean, sd * sqrt(tau / n).
inline double mcse_mean(const std::vector<double>& x) {
  if (x.size() < 4) return std::numeric_limits<double>::quiet_NaN();
  return sample_sd(x) * std::sqrt(autocorrelation_time(x) / static_cast<double>(x.size()));
}

/// Silverman's rule, 0.9 min(sd, IQR / 1.34) n^(-1/5); zero for a constant sample.
inline double silverman_bandwidth(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return 0.0;
  const double sd = sample_sd(x);
  const double iqr = quantile(x, 0.75) - quantile(x, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

/// Monte Carlo standard error of the median: the error of the mean of 1{x <= median},
/// divided by a Gaussian-kernel density estimate at the median. Zero when the
/// draws pile up on the median (the estimate is then exact up to the atom).
inline double mcse_median(const std::vector<double>& x) {
  if (x.size() < 4) return std::numeric_limits<double>::quiet_NaN();
  const double med = median(x);
  const double h = silverman_bandwidth(x);
  if (!(h > 0.0)) return 0.0;
  std::vector<double> ind;
  ind.reserve(x.size());
  double f = 0.0;
  for (double v : x) {
    ind.push_back(v <= med ? 1.0 : 0.0);
    const double u = (v - med) / h;
    f += std::exp(-0.5 * u * u);
  }
  f /= static_cast<double>(x.size()) * h * std::sqrt(2.0 * 3.14159265358979323846);
  return mcse_mean(ind) / f;
}

struct ParameterSummary {
  std::string name;
  double median = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;  // equal-tailed credible interval
  double upper = 0.0;
  double mc_se = 0.0;         // Monte Carlo error of the posterior mean
  double mc_se_median = 0.0;  // Monte Carlo error of the posterior median
  std::map<int, double> acf;
};

struct PosteriorSummary {
  double level = 0.95;
  std::vector<ParameterSummary> parameters;
  double mean_blocks = 0.0;

  const ParameterSummary& at(const std::string& name) const {
    for (const auto& p : parameters)
      if (p.name == name) return p;
    throw DomainError("PosteriorSummary: no parameter named " + name);
  }
};

inline const std::vector<int>& default_acf_lags() {
  static const std::vector<int> lags{1, 5, 10, 30};
  return lags;
}

inline ParameterSummary summarize(std::string name, const std::vector<double>& x, double level = 0.95,
                                  const std::vector<int>& lags = default_acf_lags()) {
  if (x.empty()) throw DomainError("summarize: empty trace");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("summarize: level must lie in (0, 1)");
  ParameterSummary s;
  s.name = std::move(name);
  s.median = median(x);
  s.mean = mean(x);
  s.sd = sample_sd(x);
  s.lower = quantile(x, 0.5 * (1.0 - level));
  s.upper = quantile(x, 0.5 * (1.0 + level));
  s.mc_se = mcse_mean(x);
  s.mc_se_median = mcse_median(x);
  for (int lag : lags)
    if (static_cast<std::size_t>(lag) < x.size()) s.acf[lag] = autocorrelation(x, lag);
  return s;
}

inline PosteriorSummary posterior_summary(const Trace& trace, double level = 0.95, const std::vector<int>& lags = default_acf_lags()) {
  if (trace.size() <= trace.burn_in) throw DomainError("posterior_summary: no post-burn-in draws");
  PosteriorSummary out;
  out.level = level;
  for (std::size_t p = 0; p < trace.names.size(); ++p)
    out.parameters.push_back(summarize(trace.names[p], trace.kept(static_cast<int>(p)), level, lags));
  out.mean_blocks = mean(trace.kept_mean_blocks());
  return out;
}

}  // namespace maxbayes::inference
