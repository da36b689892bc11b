#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "maxbayes/errors.hpp"
#include "maxbayes/inference/model_template.hpp"
#include "maxbayes/inference/optimize.hpp"
#include "maxbayes/inference/prior.hpp"
#include "maxbayes/models/model.hpp"
#include "maxbayes/numerics/special.hpp"
#include "maxbayes/partition.hpp"
#include "maxbayes/simulate/dataset.hpp"

namespace maxbayes::inference {

struct Estimate {
  std::vector<std::string> names;
  std::vector<double> values;
  double log_objective = -std::numeric_limits<double>::infinity();
  bool boundary = false;  // some bounded parameter ended next to its boundary
  int converged_starts = 0;

  double at(const std::string& name) const {
    for (std::size_t p = 0; p < names.size(); ++p)
      if (names[p] == name) return values[p];
    throw DomainError("Estimate: no parameter named " + name);
  }
};

namespace detail {

inline constexpr double kBoxLimit = 30.0;
inline constexpr double kBoundaryFlag = 15.0;

/// Unconstrained optimizer coordinate for a parameter with support (lower, upper).
inline double to_free(const ParameterDef& d, double x) {
  const bool lo = std::isfinite(d.lower), hi = std::isfinite(d.upper);
  if (lo && hi) {
    const double t = (x - d.lower) / (d.upper - d.lower);
    return std::log(t) - std::log1p(-t);
  }
  if (lo) return std::log(x - d.lower);
  if (hi) return -std::log(d.upper - x);
  return x;
}

inline double from_free(const ParameterDef& d, double y) {
  const bool lo = std::isfinite(d.lower), hi = std::isfinite(d.upper);
  if (lo && hi) return d.lower + (d.upper - d.lower) / (1.0 + std::exp(-y));
  if (lo) return d.lower + std::exp(y);
  if (hi) return d.upper - std::exp(-y);
  return y;
}

inline bool bounded(const ParameterDef& d) { return std::isfinite(d.lower) || std::isfinite(d.upper); }

/// Five deterministic starts: the given init, then spread over the support.
inline std::vector<std::vector<double>> multi_starts(const std::vector<ParameterDef>& defs) {
  static constexpr double frac[] = {0.2, 0.4, 0.6, 0.8};
  static constexpr double mult[] = {0.5, 2.0, 0.25, 4.0};
  static constexpr double shift[] = {-0.5, 0.5, -1.0, 1.0};
  std::vector<std::vector<double>> out;
  std::vector<double> x;
  for (const auto& d : defs) x.push_back(d.init);
  out.push_back(x);
  for (int s = 0; s < 4; ++s) {
    for (std::size_t p = 0; p < defs.size(); ++p) {
      const auto& d = defs[p];
      if (std::isfinite(d.lower) && std::isfinite(d.upper))
        x[p] = d.lower + frac[s] * (d.upper - d.lower);
      else if (std::isfinite(d.lower))
        x[p] = d.lower + (d.init - d.lower) * mult[s];
      else
        x[p] = d.init + shift[s] * std::max(0.2, 0.5 * std::abs(d.init));
    }
    out.push_back(x);
  }
  return out;
}

/// Maximizes log_objective over the natural-scale parameters with multi-start Nelder-Mead.
inline Estimate maximize(const std::function<double(const std::vector<double>&)>& log_objective,
                         const std::vector<ParameterDef>& defs, const char* who) {
  Estimate best;
  for (const auto& d : defs) best.names.push_back(d.name);
  std::vector<double> best_free;
  for (const auto& start : multi_starts(defs)) {
    std::vector<double> y;
    for (std::size_t p = 0; p < defs.size(); ++p) y.push_back(to_free(defs[p], start[p]));
    auto objective = [&](const std::vector<double>& free) {
      std::vector<double> x(free.size());
      for (std::size_t p = 0; p < free.size(); ++p) {
        if (bounded(defs[p]) && std::abs(free[p]) > kBoxLimit) return std::numeric_limits<double>::infinity();
        x[p] = from_free(defs[p], free[p]);
      }
      try {
        return -log_objective(x);
      } catch (const DomainError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    if (!std::isfinite(objective(y))) continue;
    const auto r = nelder_mead(objective, y, 0.5);
    if (r.converged) ++best.converged_starts;
    if (std::isfinite(r.value) && -r.value > best.log_objective) {
      best.log_objective = -r.value;
      best_free = r.x;
    }
  }
  if (best_free.empty()) throw EstimationError(std::string(who) + ": objective not finite at any start");
  if (best.converged_starts == 0) throw EstimationError(std::string(who) + ": optimizer did not converge from any start");
  for (std::size_t p = 0; p < defs.size(); ++p) {
    best.values.push_back(from_free(defs[p], best_free[p]));
    if (bounded(defs[p]) && std::abs(best_free[p]) > kBoundaryFlag) best.boundary = true;
  }
  return best;
}

inline double gev_jacobian_term(double u, const models::GevMargin& m) { return -std::log(m.sigma) + (1.0 - m.xi) * std::log(u); }

}  // namespace detail

/// Gumbel moment start for the margin parameters; data pooled across components.
inline void set_margin_starts(std::vector<ParameterDef>& defs, const ModelTemplate& tmpl, const std::vector<std::vector<double>>& data) {
  if (tmpl.margins != MarginModel::common_gev && tmpl.margins != MarginModel::shape_trend) return;
  std::vector<double> pooled;
  for (const auto& z : data) pooled.insert(pooled.end(), z.begin(), z.end());
  double m = 0.0, s = 0.0;
  for (double v : pooled) m += v;
  m /= static_cast<double>(pooled.size());
  for (double v : pooled) s += (v - m) * (v - m);
  s = std::sqrt(s / static_cast<double>(pooled.size()));
  if (!(s > 0.0)) throw EstimationError("margin estimation: degenerate sample (all values equal)");
  const auto d = static_cast<std::size_t>(tmpl.dependence_count());
  const double sigma = s * std::sqrt(6.0) / std::numbers::pi;
  defs[d].init = m - 0.5772156649015329 * sigma;
  defs[d + 1].init = sigma;
  defs[d + 2].init = 0.1;
  if (tmpl.margins == MarginModel::shape_trend) defs[d + 3].init = 0.0;
}

/// Maximum pairwise likelihood: sum over observations and pairs of log bivariate densities.
inline Estimate pairwise_mle(const std::vector<std::vector<double>>& data, const ModelTemplate& tmpl,
                             std::vector<ParameterDef> defs = {}) {
  tmpl.validate();
  if (defs.empty()) {
    defs = tmpl.parameters();
    set_margin_starts(defs, tmpl, data);
  }
  const int k = tmpl.k;
  auto objective = [&](const std::vector<double>& theta) {
    const auto spec = tmpl.build(theta);
    std::vector<models::ModelSpec> pairs;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) pairs.emplace_back(spec.pair(i, j));
    const auto& margins = spec.margins();
    double total = 0.0;
    for (const auto& z : data) {
      models::FrechetTransform t;
      try {
        t = spec.to_frechet(z);
      } catch (const SupportError&) {
        return -numerics::kInf;
      }
      std::size_t q = 0;
      for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j, ++q) {
          const double uv[2] = {t.u[static_cast<std::size_t>(i)], t.u[static_cast<std::size_t>(j)]};
          const std::span<const double> u(uv, 2);
          const auto& pm = pairs[q];
          const double mixed = pm.log_weight(0b11, u);
          const double split = pm.log_weight(0b01, u) + pm.log_weight(0b10, u);
          total += -pm.exponent(u) + numerics::log_add_exp(mixed, split);
          if (margins)
            total += detail::gev_jacobian_term(u[0], (*margins)[static_cast<std::size_t>(i)]) +
                     detail::gev_jacobian_term(u[1], (*margins)[static_cast<std::size_t>(j)]);
        }
      }
    }
    return total;
  };
  return detail::maximize(objective, defs, "pairwise_mle");
}

/// Maximum independence likelihood for the margin parameters only.
inline Estimate independence_mle(const std::vector<std::vector<double>>& data, const ModelTemplate& tmpl) {
  tmpl.validate();
  if (tmpl.margins != MarginModel::common_gev && tmpl.margins != MarginModel::shape_trend)
    throw ConfigError("independence_mle: the template has no free margin parameters");
  auto all = tmpl.parameters();
  set_margin_starts(all, tmpl, data);
  const auto d = static_cast<std::size_t>(tmpl.dependence_count());
  const std::vector<ParameterDef> defs(all.begin() + static_cast<std::ptrdiff_t>(d), all.end());
  std::vector<double> full(all.size());
  for (std::size_t p = 0; p < d; ++p) full[p] = all[p].init;
  auto objective = [&](const std::vector<double>& theta) {
    std::copy(theta.begin(), theta.end(), full.begin() + static_cast<std::ptrdiff_t>(d));
    const auto margins = *tmpl.margins_at(full);
    for (const auto& m : margins) models::validate(m);
    double total = 0.0;
    for (const auto& z : data)
      for (std::size_t i = 0; i < z.size(); ++i) total += models::gev_log_density(z[i], margins[i]);
    return total;
  };
  return detail::maximize(objective, defs, "independence_mle");
}

/// Joint likelihood at the observed occurrence partitions.
inline Estimate stephenson_tawn_mle(const simulate::Dataset& data, const ModelTemplate& tmpl, std::vector<ParameterDef> defs = {}) {
  tmpl.validate();
  if (!data.partitions) throw ConfigError("stephenson_tawn_mle: dataset carries no partitions");
  if (data.partitions->size() != data.obs.size()) throw ConfigError("stephenson_tawn_mle: partition count mismatch");
  if (defs.empty()) {
    defs = tmpl.parameters();
    set_margin_starts(defs, tmpl, data.obs);
  }
  auto objective = [&](const std::vector<double>& theta) {
    const auto spec = tmpl.build(theta);
    double total = 0.0;
    try {
      for (std::size_t l = 0; l < data.obs.size(); ++l) total += models::joint_log_likelihood(spec, data.obs[l], (*data.partitions)[l]);
    } catch (const SupportError&) {
      return -numerics::kInf;
    }
    return total;
  };
  return detail::maximize(objective, defs, "stephenson_tawn_mle");
}

}  // namespace maxbayes::inference
