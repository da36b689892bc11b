#pragma once

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "maxbayes/errors.hpp"

namespace maxbayes::numerics {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  /// Characteristic scale of the integrand: r = scale * t / (1 - t).
  double scale = 1.0;
  unsigned max_depth = 18;
};

/// Integral of f over (0, inf). The half line is mapped to (0, 1) by
/// r = scale * t / (1 - t) and integrated with adaptive 31-point
/// Gauss-Kronrod panels. Throws NumericError when the error estimate
/// misses max(rel_tol * |value|, abs_tol).
template <class F>
QuadratureResult integrate_semi_infinite(F&& f, const QuadratureOptions& opt = {}) {
  const double scale = opt.scale;
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("integrate_semi_infinite: scale must be positive");
  auto mapped = [&](double t) {
    const double one_minus = 1.0 - t;
    if (one_minus <= 0.0) return 0.0;
    const double r = scale * t / one_minus;
    const double v = f(r);
    return v == 0.0 ? 0.0 : v * scale / (one_minus * one_minus);
  };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      mapped, 0.0, 1.0, opt.max_depth, opt.rel_tol * 0.1, &err);
  if (!std::isfinite(value) || err > std::max(opt.rel_tol * std::abs(value), opt.abs_tol)) {
    throw NumericError("integrate_semi_infinite: no convergence (value " + std::to_string(value) +
                           ", error estimate " + std::to_string(err) + ")",
                       err);
  }
  return {value, err};
}

/// Finite interval by tanh-sinh, which tolerates algebraic endpoint
/// singularities; same failure contract.
template <class F>
QuadratureResult integrate_interval(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (!(b > a)) return {0.0, 0.0};
  double err = 0.0;
  double l1 = 0.0;
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  auto g = [&f](double x) -> double { return f(x); };
  const double value = rule.integrate(g, a, b, opt.rel_tol * 0.1, &err, &l1);
  if (!std::isfinite(value) || err > std::max(opt.rel_tol * std::abs(value), opt.abs_tol))
    throw NumericError("integrate_interval: no convergence", err);
  return {value, err};
}

}  // namespace maxbayes::numerics
