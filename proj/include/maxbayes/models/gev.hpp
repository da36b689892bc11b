#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "maxbayes/errors.hpp"

namespace maxbayes::models {

/// Generalized extreme value margin (location, scale, shape).
struct GevMargin {
  double mu = 1.0;
  double sigma = 1.0;
  double xi = 1.0;

  friend bool operator==(const GevMargin&, const GevMargin&) = default;
};

/// Below this |xi| the Gumbel limit is used.
inline constexpr double kGumbelSwitch = 1e-8;

inline void validate(const GevMargin& m) {
  if (!(m.sigma > 0.0) || !std::isfinite(m.sigma) || !std::isfinite(m.mu) || !std::isfinite(m.xi))
    throw DomainError("GevMargin: need finite mu, xi and sigma > 0");
}

/// log U(z) for U(z) = (1 + xi (z - mu) / sigma)^(1/xi); returns NaN outside the support.
inline double log_frechet_scale(double z, const GevMargin& m) {
  const double t = (z - m.mu) / m.sigma;
  if (std::abs(m.xi) < kGumbelSwitch) return t;
  const double base = 1.0 + m.xi * t;
  if (!(base > 0.0)) return std::nan("");
  return std::log(base) / m.xi;
}

struct FrechetTransform {
  std::vector<double> u;
  double log_jacobian = 0.0;
};

/// Maps raw observations to unit-Frechet scale. The Jacobian is
/// sum_i [-log sigma_i + (1 - xi_i) log U_i(z_i)].
inline FrechetTransform gev_to_frechet(std::span<const double> z, std::span<const GevMargin> margins) {
  if (z.size() != margins.size()) throw DomainError("gev_to_frechet: dimension mismatch");
  FrechetTransform out;
  out.u.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto& m = margins[i];
    const double lu = log_frechet_scale(z[i], m);
    if (std::isnan(lu) || !std::isfinite(lu))
      throw SupportError("gev_to_frechet: component " + std::to_string(i + 1) + " outside the GEV support",
                         static_cast<int>(i));
    out.u[i] = std::exp(lu);
    out.log_jacobian += -std::log(m.sigma) + (1.0 - m.xi) * lu;
  }
  return out;
}

/// Inverse of U: unit-Frechet value to the GEV scale.
inline double frechet_to_gev(double u, const GevMargin& m) {
  if (std::abs(m.xi) < kGumbelSwitch) return m.mu + m.sigma * std::log(u);
  return m.mu + m.sigma * std::expm1(m.xi * std::log(u)) / m.xi;
}

/// Univariate GEV log-density; -inf outside the support.
inline double gev_log_density(double z, const GevMargin& m) {
  const double lu = log_frechet_scale(z, m);
  if (std::isnan(lu) || !std::isfinite(lu)) return -std::numeric_limits<double>::infinity();
  return -std::exp(-lu) - 2.0 * lu - std::log(m.sigma) + (1.0 - m.xi) * lu;
}

}  // namespace maxbayes::models
