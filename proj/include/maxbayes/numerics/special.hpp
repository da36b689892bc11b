#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "maxbayes/errors.hpp"

namespace maxbayes::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma: argument must be positive and finite");
  return boost::math::lgamma(x);
}

/// Regularized lower incomplete gamma P(alpha, x): the Gamma(alpha, 1) CDF.
inline double gamma_cdf(double x, double alpha) {
  if (!(alpha > 0.0) || !(x >= 0.0)) throw DomainError("gamma_cdf: need x >= 0 and alpha > 0");
  if (x == kInf) return 1.0;
  return boost::math::gamma_p(alpha, x);
}

/// Upper tail 1 - P(alpha, x), accurate where the CDF is close to one.
inline double gamma_sf(double x, double alpha) {
  if (!(alpha > 0.0) || !(x >= 0.0)) throw DomainError("gamma_sf: need x >= 0 and alpha > 0");
  if (x == kInf) return 0.0;
  return boost::math::gamma_q(alpha, x);
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// log Phi(x), stable deep in the lower tail.
inline double log_normal_cdf(double x) {
  if (x > 0.0) return std::log1p(-normal_cdf(-x));
  if (x > -30.0) return std::log(normal_cdf(x));
  // Asymptotic series of the Mills ratio.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw DomainError("normal_quantile: probability outside [0, 1]");
  }
  // Wichura (1988), algorithm AS 241 (PPND16), relative accuracy about 1e-16.
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r + 6.7265770927008700853e4) * r +
                4.5921953931549871457e4) * r + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r + 3.9307895800092710610e4) * r +
                2.1213794301586595867e4) * r + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
               1.27045825245236838258e0) * r + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
               1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
               2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
               7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

/// Univariate Student-t CDF with real degrees of freedom.
inline double student_cdf(double x, double df) {
  if (!(df > 0.0)) throw DomainError("student_cdf: degrees of freedom must be positive");
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
}

inline double log_student_cdf(double x, double df) {
  if (x < 0.0) return std::log(boost::math::cdf(boost::math::complement(
      boost::math::students_t_distribution<double>(df), -x)));
  return std::log(student_cdf(x, df));
}

/// log(exp(a) + exp(b)).
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace maxbayes::numerics
