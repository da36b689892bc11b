#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "maxbayes/errors.hpp"
#include "maxbayes/inference/chain.hpp"
#include "maxbayes/inference/summary.hpp"
#include "maxbayes/models/model.hpp"

namespace maxbayes::inference {

struct PairStatistic {
  int i = 0;
  int j = 0;
  double t_inv = 0.0;    // (1/N) sum 1 / max(z_i, z_j)
  double tau_inv = 0.0;  // 1 / tau_ij under the null
};

struct ExtremalCoeffTest {
  std::vector<PairStatistic> pairs;
  double max_deviation = 0.0;
  double delta = 0.0;
  bool reject = false;
  double chebyshev_bound = 0.0;  // k(k-1) / (2 N delta^2), bound on the false-alarm rate
};

/// Rejects theta_0 when some pair has |T^{-1} - 1/tau(theta_0)| > delta. Under the null
/// 1/max(Z_i, Z_j) is Exp(tau) with variance 1/tau^2 <= 1, so Chebyshev plus a union bound
/// over the pairs gives the reported false-alarm bound. Data must be on unit-Frechet scale.
inline ExtremalCoeffTest extremal_coeff_test(const std::vector<std::vector<double>>& data, const models::ModelSpec& null_spec,
                                             double delta) {
  if (data.empty()) throw DomainError("extremal_coeff_test: no observations");
  if (!(delta > 0.0)) throw DomainError("extremal_coeff_test: delta must be positive");
  const int k = null_spec.dimension();
  ExtremalCoeffTest out;
  out.delta = delta;
  const double n = static_cast<double>(data.size());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      PairStatistic s{i, j, 0.0, 1.0 / null_spec.pairwise_extremal_coefficient(i, j)};
      for (const auto& z : data) s.t_inv += 1.0 / std::max(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]);
      s.t_inv /= n;
      out.max_deviation = std::max(out.max_deviation, std::abs(s.t_inv - s.tau_inv));
      out.pairs.push_back(s);
    }
  }
  out.reject = out.max_deviation > delta;
  out.chebyshev_bound = k * (k - 1.0) / (2.0 * n * delta * delta);
  return out;
}

struct BayesFactor {
  enum class Kind { point, lower_bound, upper_bound };
  double b12 = 0.0;  // evidence for {beta = 0} against {beta != 0}
  double mc_se = 0.0;
  Kind kind = Kind::point;
  long count_null = 0;
  long count_alt = 0;
};

/// B_12 = posterior odds of {param = 0} divided by the prior odds p0 / (1 - p0).
/// With no draws on one side only a one-sided bound (one pseudo-draw) is reported.
inline BayesFactor bayes_factor_from_trace(const Trace& trace, int param, double prior_null = 0.5) {
  const auto x = trace.kept(param);
  if (x.empty()) throw DomainError("bayes_factor: empty trace");
  BayesFactor out;
  std::vector<double> ind;
  for (double v : x) {
    const bool null = v == 0.0;
    ind.push_back(null ? 1.0 : 0.0);
    (null ? out.count_null : out.count_alt) += 1;
  }
  const double prior_odds = prior_null / (1.0 - prior_null);
  if (out.count_alt == 0) {
    out.kind = BayesFactor::Kind::lower_bound;
    out.b12 = static_cast<double>(out.count_null) / prior_odds;
    out.mc_se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  if (out.count_null == 0) {
    out.kind = BayesFactor::Kind::upper_bound;
    out.b12 = 1.0 / static_cast<double>(out.count_alt) / prior_odds;
    out.mc_se = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double p = static_cast<double>(out.count_null) / static_cast<double>(x.size());
  out.b12 = p / (1.0 - p) / prior_odds;
  out.mc_se = mcse_mean(ind) / ((1.0 - p) * (1.0 - p)) / prior_odds;
  return out;
}

/// Runs the chain on a shape-trend template and reads off B_12 for the slope.
inline BayesFactor bayes_factor_trend(const std::vector<std::vector<double>>& data, const ModelTemplate& tmpl, const McmcConfig& cfg,
                                      std::uint64_t seed, std::vector<ParameterDef> defs = {}) {
  if (tmpl.margins != MarginModel::shape_trend) throw ConfigError("bayes_factor_trend: template needs shape-trend margins");
  if (defs.empty()) defs = tmpl.parameters();
  const int slope = static_cast<int>(defs.size()) - 1;
  if (defs[static_cast<std::size_t>(slope)].prior.kind() != Prior::Kind::spike_slab)
    throw ConfigError("bayes_factor_trend: the slope needs a spike-and-slab prior");
  const double p0 = defs[static_cast<std::size_t>(slope)].prior.a();
  Chain chain(data, tmpl, std::move(defs), cfg, seed);
  return bayes_factor_from_trace(chain.run(), slope, p0);
}

}  // namespace maxbayes::inference
