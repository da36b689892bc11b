#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "maxbayes/errors.hpp"

namespace maxbayes::models {

/// Site coordinates, one row per site.
using Sites = Eigen::MatrixXd;

inline Eigen::MatrixXd site_distances(const Sites& sites) {
  const Eigen::Index k = sites.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) d(i, j) = d(j, i) = (sites.row(i) - sites.row(j)).norm();
  return d;
}

inline void check_smoothness(double s, double alpha) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("spatial: s must be positive");
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("spatial: alpha must lie in (0, 2)");
}

/// Brown-Resnick variogram gamma(h) = |h|^alpha / s, so lambda^2 = gamma / 4.
inline Eigen::MatrixXd brown_resnick_lambda_sq(const Sites& sites, double s, double alpha) {
  check_smoothness(s, alpha);
  return site_distances(sites).array().pow(alpha) / (4.0 * s);
}

/// Powered exponential correlation rho(h) = exp(-|h|^alpha / s).
inline Eigen::MatrixXd powered_exponential_correlation(const Sites& sites, double s, double alpha) {
  check_smoothness(s, alpha);
  return (-(site_distances(sites).array().pow(alpha)) / s).exp().matrix();
}

}  // namespace maxbayes::models
