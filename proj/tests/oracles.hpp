#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

using Fn = std::function<double(const std::vector<double>&)>;

/// d^k F / dz_1 ... dz_k by nested central differences at steps h, h/2, ..., h/2^levels,
/// combined by Richardson extrapolation (levels = 1 removes the h^2 term, 2 also h^4).
/// Real = long double pushes the cancellation noise of the stencil down by three digits.
template <class Real, class F>
Real mixed_derivative_t(F&& f, const std::vector<Real>& z, Real rel_step, int levels) {
  const std::size_t k = z.size();
  auto stencil = [&](Real scale) {
    std::vector<Real> h(k);
    Real denom = 1;
    for (std::size_t i = 0; i < k; ++i) {
      h[i] = rel_step * scale * z[i];
      denom *= 2 * h[i];
    }
    Real acc = 0;
    std::vector<Real> x(k);
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      Real sign = 1;
      for (std::size_t i = 0; i < k; ++i) {
        const bool up = (mask >> i) & 1u;
        x[i] = z[i] + (up ? h[i] : -h[i]);
        if (!up) sign = -sign;
      }
      acc += sign * f(x);
    }
    return acc / denom;
  };
  std::vector<Real> table;
  for (int l = 0; l <= levels; ++l) table.push_back(stencil(std::ldexp(Real(1), -l)));
  for (int m = 1; m <= levels; ++m) {
    const Real factor = std::ldexp(Real(1), 2 * m);
    for (int l = levels; l >= m; --l) table[l] = (factor * table[l] - table[l - 1]) / (factor - 1);
  }
  return table.back();
}

inline double mixed_derivative(const Fn& f, const std::vector<double>& z, double rel_step = 0.01, int levels = 1) {
  return mixed_derivative_t<double>(f, z, rel_step, levels);
}

/// Density of the max-stable law from its exponent function.
inline double density_from_exponent(const Fn& v, const std::vector<double>& z, double rel_step = 0.01, int levels = 1) {
  return mixed_derivative([&](const std::vector<double>& x) { return std::exp(-v(x)); }, z, rel_step, levels);
}

/// Logistic density by differencing the closed-form exponent in extended precision.
inline double logistic_density(double theta, const std::vector<double>& z, int levels = 2) {
  const long double th = theta;
  auto cdf = [th](const std::vector<long double>& x) {
    long double s = 0;
    for (long double v : x) s += std::pow(v, -1 / th);
    return std::exp(-std::pow(s, th));
  };
  const std::vector<long double> zl(z.begin(), z.end());
  return static_cast<double>(mixed_derivative_t<long double>(cdf, zl, 0.02L, levels));
}

/// Fixed composite Gauss-Legendre rule: a smooth function of its limits and parameters.
template <class F>
double composite_gl(F&& f, double a, double b, int panels = 64) {
  double acc = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p)
    acc += boost::math::quadrature::gauss<double, 20>::integrate(f, a + p * w, a + (p + 1) * w);
  return acc;
}

/// P(X1 <= a, X2 <= b) for a standard bivariate Student (df > 0) or normal (df <= 0)
/// with correlation r, integrating the conditional CDF over the first quantile.
inline double bivariate_cdf(double a, double b, double r, double df) {
  const bool normal = df <= 0.0;
  boost::math::normal_distribution<double> nd;
  auto cdf1 = [&](double x) {
    return normal ? boost::math::cdf(nd, x) : boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
  };
  auto quant = [&](double p) {
    return normal ? boost::math::quantile(nd, p) : boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
  };
  if (std::isinf(a)) return std::isinf(b) ? 1.0 : cdf1(b);
  if (std::isinf(b)) return cdf1(a);
  const double top = cdf1(a);
  auto integrand = [&](double p) {
    const double x = quant(p);
    if (normal) return boost::math::cdf(nd, (b - r * x) / std::sqrt(1.0 - r * r));
    const double s = std::sqrt((1.0 - r * r) * (df + x * x) / (df + 1.0));
    return boost::math::cdf(boost::math::students_t_distribution<double>(df + 1.0), (b - r * x) / s);
  };
  return composite_gl(integrand, 0.0, top, 48);
}

/// Scale-matrix version of bivariate_cdf.
inline double bivariate_cdf(const Eigen::Vector2d& upper, const Eigen::Matrix2d& scale, double df) {
  const double s1 = std::sqrt(scale(0, 0));
  const double s2 = std::sqrt(scale(1, 1));
  return bivariate_cdf(upper(0) / s1, upper(1) / s2, scale(0, 1) / (s1 * s2), df);
}

/// Trivariate Husler-Reiss exponent function with quadrature-based bivariate CDFs.
inline double husler_reiss_v3(const Eigen::Matrix3d& lam, const std::vector<double>& z) {
  double v = 0.0;
  for (int p = 0; p < 3; ++p) {
    const int i = (p + 1) % 3;
    const int j = (p + 2) % 3;
    Eigen::Matrix2d s;
    s(0, 0) = 4.0 * lam(p, i);
    s(1, 1) = 4.0 * lam(p, j);
    s(0, 1) = s(1, 0) = 2.0 * (lam(p, i) + lam(p, j) - lam(i, j));
    const Eigen::Vector2d u(2.0 * lam(p, i) + std::log(z[i] / z[p]), 2.0 * lam(p, j) + std::log(z[j] / z[p]));
    v += bivariate_cdf(u, s, 0.0) / z[p];
  }
  return v;
}

/// Trivariate extremal-t exponent function with quadrature-based bivariate CDFs.
inline double extremal_t_v3(const Eigen::Matrix3d& rho, double nu, const std::vector<double>& z) {
  double v = 0.0;
  for (int p = 0; p < 3; ++p) {
    const int i = (p + 1) % 3;
    const int j = (p + 2) % 3;
    Eigen::Matrix2d s;
    s(0, 0) = 1.0 - rho(p, i) * rho(p, i);
    s(1, 1) = 1.0 - rho(p, j) * rho(p, j);
    s(0, 1) = s(1, 0) = rho(i, j) - rho(p, i) * rho(p, j);
    s /= nu + 1.0;
    const Eigen::Vector2d u(std::pow(z[i] / z[p], 1.0 / nu) - rho(p, i), std::pow(z[j] / z[p], 1.0 / nu) - rho(p, j));
    v += bivariate_cdf(u, s, nu + 1.0) / z[p];
  }
  return v;
}

/// Dirichlet exponent E[max_i Y_i / (alpha_i z_i)] as a fixed-rule radial integral.
inline double dirichlet_v(const std::vector<double>& alpha, const std::vector<double>& z) {
  double zmin = z[0];
  for (double x : z) zmin = std::min(zmin, x);
  const double c = 1.0 / zmin;
  auto integrand = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double s = c * t / (1.0 - t);
    double prod = 1.0;
    for (std::size_t i = 0; i < z.size(); ++i) prod *= boost::math::gamma_p(alpha[i], alpha[i] * z[i] * s);
    return (1.0 - prod) * c / ((1.0 - t) * (1.0 - t));
  };
  return composite_gl(integrand, 0.0, 1.0, 256);
}

/// F_alpha(x) by adaptive quadrature of the Gamma density; for alpha < 1 the
/// substitution t = u^(1/alpha) removes the singularity at 0.
inline double gamma_cdf(double x, double alpha) {
  using boost::math::quadrature::gauss_kronrod;
  if (alpha < 1.0) {
    auto f = [&](double u) { return std::exp(-std::pow(u, 1.0 / alpha)); };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, std::pow(x, alpha), 14, 1e-13) / std::exp(std::lgamma(alpha + 1.0));
  }
  auto f = [&](double t) { return t <= 0.0 ? (alpha == 1.0 ? 1.0 : 0.0) : std::exp((alpha - 1.0) * std::log(t) - t - std::lgamma(alpha)); };
  return gauss_kronrod<double, 61>::integrate(f, 0.0, x, 14, 1e-13);
}

/// Trivariate normal CDF by nested one-dimensional quadrature over the first coordinate.
inline double trivariate_normal_cdf(const Eigen::Vector3d& b, const Eigen::Matrix3d& r) {
  auto integrand = [&](double x) {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    const Eigen::Vector2d mean(r(1, 0) * x, r(2, 0) * x);
    Eigen::Matrix2d cov;
    cov(0, 0) = 1.0 - r(1, 0) * r(1, 0);
    cov(1, 1) = 1.0 - r(2, 0) * r(2, 0);
    cov(0, 1) = cov(1, 0) = r(1, 2) - r(1, 0) * r(2, 0);
    return phi * bivariate_cdf(Eigen::Vector2d(b(1) - mean(0), b(2) - mean(1)), cov, 0.0);
  };
  return composite_gl(integrand, -12.0, b(0), 96);
}

}  // namespace oracle
