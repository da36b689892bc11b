#pragma once

// Gaussian and Student orthant-type probabilities P(X <= upper) by
// separation of variables with Genz-Bretz variable prioritization and
// randomly shifted Korobov lattice rules (tent-periodized).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "maxbayes/errors.hpp"
#include "maxbayes/numerics/special.hpp"
#include "maxbayes/rng.hpp"

namespace maxbayes::numerics {

inline constexpr int kMaxCdfDimension = 25;

struct QmcConfig {
  int n_points = 4096;  // maximum lattice points per shift
  int n_shifts = 12;
  std::uint64_t seed = 0x2545F4914F6CDD1Dull;
  // Lattice sizes grow from the first prime >= min_points until the error
  // estimate is below min(abs_tol, rel_tol * probability) or n_points is reached.
  int min_points = 256;
  double abs_tol = 2.5e-6;
  double rel_tol = 1e-3;

  void validate() const {
    if (n_points < 128) throw ConfigError("QmcConfig: n_points must be >= 128");
    if (n_shifts < 8) throw ConfigError("QmcConfig: n_shifts must be >= 8");
    if (min_points < 1 || min_points > n_points) throw ConfigError("QmcConfig: min_points must lie in [1, n_points]");
    if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0)) throw ConfigError("QmcConfig: tolerances must be non-negative");
  }
};

struct CdfResult {
  double probability = 0.0;
  double error = 0.0;  // three Monte-Carlo standard errors over the shifts
  double log_probability = -kInf;
};

namespace detail {

// Prime lattice sizes used in turn until the error target is met.
inline constexpr std::array<int, 10> kLatticeSizes = {131, 257, 509, 1021, 2039, 4093, 8191, 16381, 32749, 65521};

// Korobov generator a for an N-point rule in d dimensions, z = (1, a, a^2, ...) mod N,
// chosen to minimize the weighted P_2 criterion of the tent-transformed rule.
// Searched once per (N, d) and cached.
inline std::vector<int> korobov_vector(int n, int d) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<int>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find({n, d}); it != cache.end()) return it->second;
  auto vector_for = [&](long a) {
    std::vector<int> z(static_cast<std::size_t>(d));
    long v = 1;
    for (int j = 0; j < d; ++j) {
      z[static_cast<std::size_t>(j)] = static_cast<int>(v);
      v = (v * a) % n;
    }
    return z;
  };
  const double two_pi_sq = 2.0 * std::numbers::pi * std::numbers::pi;
  const int half = n / 2;
  const int stride = std::max(1, half / 256);
  double best = kInf;
  long best_a = 1;
  for (long a = 2; a <= half; a += stride) {
    const auto z = vector_for(a);
    double p2 = 0.0;
    for (long q = 0; q < n; ++q) {
      double prod = 1.0;
      for (int j = 0; j < d; ++j) {
        const double x = static_cast<double>((q * z[static_cast<std::size_t>(j)]) % n) / n;
        const double gamma = 1.0 / ((j + 1.0) * (j + 1.0));
        prod *= 1.0 + gamma * two_pi_sq * (x * x - x + 1.0 / 6.0);
      }
      p2 += prod;
    }
    if (p2 < best) {
      best = p2;
      best_a = a;
    }
  }
  return cache[{n, d}] = vector_for(best_a);
}

struct Ordered {
  Eigen::MatrixXd chol;  // lower triangular, rows/cols permuted
  Eigen::VectorXd upper;
};

// Cholesky factor with the variable having the smallest conditional
// probability expanded first at every step.
inline Ordered prioritize(Eigen::MatrixXd cov, Eigen::VectorXd b) {
  const int n = static_cast<int>(b.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  const double scale = cov.diagonal().cwiseAbs().maxCoeff();
  const double tiny = 1e-12 * std::max(scale, 1e-300);
  for (int i = 0; i < n; ++i) {
    int best = i;
    double best_logp = kInf;
    for (int j = i; j < n; ++j) {
      double s2 = cov(j, j);
      double shift = 0.0;
      for (int m = 0; m < i; ++m) {
        s2 -= c(j, m) * c(j, m);
        shift += c(j, m) * y(m);
      }
      if (!(s2 > tiny)) throw NotPositiveDefiniteError("mvn: covariance matrix is not positive definite");
      const double lp = log_normal_cdf((b(j) - shift) / std::sqrt(s2));
      if (lp < best_logp) {
        best_logp = lp;
        best = j;
      }
    }
    if (best != i) {
      cov.row(i).swap(cov.row(best));
      cov.col(i).swap(cov.col(best));
      std::swap(b(i), b(best));
      c.row(i).swap(c.row(best));
    }
    double s2 = cov(i, i);
    double shift = 0.0;
    for (int m = 0; m < i; ++m) {
      s2 -= c(i, m) * c(i, m);
      shift += c(i, m) * y(m);
    }
    c(i, i) = std::sqrt(s2);
    for (int j = i + 1; j < n; ++j) {
      double v = cov(j, i);
      for (int m = 0; m < i; ++m) v -= c(j, m) * c(i, m);
      c(j, i) = v / c(i, i);
    }
    const double a = (b(i) - shift) / c(i, i);
    const double lp = log_normal_cdf(a);
    // Truncated-normal mean E[X | X < a].
    y(i) = -std::exp(-0.5 * a * a - 0.5 * std::log(2.0 * std::numbers::pi) - lp);
  }
  return {std::move(c), std::move(b)};
}

inline void check_inputs(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma, const char* who) {
  const auto n = upper.size();
  if (n < 1) throw DomainError(std::string(who) + ": empty input");
  if (n > kMaxCdfDimension) throw DomainError(std::string(who) + ": dimension above 25");
  if (sigma.rows() != n || sigma.cols() != n) throw DomainError(std::string(who) + ": matrix size mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::isnan(upper(i))) throw DomainError(std::string(who) + ": NaN upper limit");
  if (!sigma.isApprox(sigma.transpose(), 1e-10)) throw DomainError(std::string(who) + ": matrix not symmetric");
}

// Keeps the coordinates with finite limits; flags a -inf limit.
struct Reduced {
  Eigen::VectorXd upper;
  Eigen::MatrixXd sigma;
  bool empty_event = false;
};

inline Reduced drop_infinite(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma) {
  std::vector<int> keep;
  Reduced r;
  for (Eigen::Index i = 0; i < upper.size(); ++i) {
    if (upper(i) == -kInf) r.empty_event = true;
    if (std::isfinite(upper(i))) keep.push_back(static_cast<int>(i));
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  r.upper.resize(m);
  r.sigma.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    r.upper(a) = upper(keep[a]);
    for (Eigen::Index b = 0; b < m; ++b) r.sigma(a, b) = sigma(keep[a], keep[b]);
  }
  return r;
}

inline CdfResult from_log(double logp) {
  return {std::exp(logp), 0.0, logp};
}

// Quantile of the chi radius sqrt(X / df), X ~ chi^2_df, tabulated per df
// with cubic Hermite interpolation away from the tails.
class ChiRadius {
 public:
  static constexpr int kCells = 4096;
  static constexpr int kExactCells = 8;

  explicit ChiRadius(double df) : df_(df), value_(kCells + 1), slope_(kCells + 1) {
    for (int j = kExactCells; j <= kCells - kExactCells; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      value_[uj] = exact(static_cast<double>(j) / kCells);
      // dr/dw = 1 / f_R(r), f_R(r) = f_X(df r^2) 2 df r.
      const double r = value_[uj];
      const double fx = 0.5 * boost::math::gamma_p_derivative(0.5 * df_, 0.5 * df_ * r * r);
      slope_[uj] = 1.0 / (fx * 2.0 * df_ * r * kCells);
    }
  }

  double operator()(double w) const {
    const double x = w * kCells;
    const int j = static_cast<int>(x);
    if (j < kExactCells || j >= kCells - kExactCells) return exact(w);
    const double t = x - j;
    const auto a = static_cast<std::size_t>(j);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * value_[a] + (t3 - 2 * t2 + t) * slope_[a] + (-2 * t3 + 3 * t2) * value_[a + 1] +
           (t3 - t2) * slope_[a + 1];
  }

  static const ChiRadius& cached(double df) {
    static thread_local std::vector<std::pair<double, std::unique_ptr<ChiRadius>>> cache;
    for (const auto& [d, t] : cache)
      if (d == df) return *t;
    if (cache.size() >= 32) cache.clear();
    cache.emplace_back(df, std::make_unique<ChiRadius>(df));
    return *cache.back().second;
  }

 private:
  double exact(double w) const { return std::sqrt(2.0 * boost::math::gamma_p_inv(0.5 * df_, w) / df_); }

  double df_;
  std::vector<double> value_;
  std::vector<double> slope_;
};

// Shared lattice driver. With df > 0 the first lattice coordinate draws the
// chi radius of a Student mixture. Lattice sizes grow until the error target
// is met or n_points is exceeded.
inline CdfResult lattice_sov(const Ordered& ord, double df, const QmcConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(ord.upper.size());
  const bool student = df > 0.0;
  const int dims = student ? n : n - 1;
  const ChiRadius* chi = student ? &ChiRadius::cached(df) : nullptr;
  Rng rng(cfg.seed);
  const auto shifts = static_cast<std::size_t>(cfg.n_shifts);
  std::vector<std::array<double, kMaxCdfDimension + 1>> delta(shifts);
  for (auto& d : delta)
    for (int j = 0; j < dims; ++j) d[static_cast<std::size_t>(j)] = uniform_open(rng);
  std::vector<double> acc(shifts, -kInf);
  std::array<double, kMaxCdfDimension + 1> w{};
  std::array<double, kMaxCdfDimension> y{};
  const double lo = 1e-300;

  std::vector<int> gen;
  int size = 0;
  auto point = [&](long q, const std::array<double, kMaxCdfDimension + 1>& d) {
    for (int j = 0; j < dims; ++j) {
      double x = static_cast<double>((q * gen[static_cast<std::size_t>(j)]) % size) / size + d[static_cast<std::size_t>(j)];
      x -= std::floor(x);
      x = 1.0 - std::abs(2.0 * x - 1.0);
      w[static_cast<std::size_t>(j)] = std::clamp(x, 1e-15, 1.0 - 1e-15);
    }
    double radius = 1.0;
    int next = 0;
    if (student) {
      radius = (*chi)(w[0]);
      next = 1;
    }
    // Running product kept in linear space and folded into a log offset
    // before it can underflow.
    double prod = 1.0;
    double log_offset = 0.0;
    for (int i = 0; i < n; ++i) {
      double shift = 0.0;
      for (int m = 0; m < i; ++m) shift += ord.chol(i, m) * y[static_cast<std::size_t>(m)];
      const double a = (ord.upper(i) * radius - shift) / ord.chol(i, i);
      double e = a > -37.0 ? normal_cdf(a) : 0.0;
      if (e < 1e-300) {
        const double le = log_normal_cdf(a);
        if (le == -kInf) return -kInf;
        log_offset += le;
        e = std::exp(le);  // may underflow to zero; only used for the next conditional draw
      } else {
        prod *= e;
      }
      if (prod < 1e-250) {
        log_offset += std::log(prod);
        prod = 1.0;
      }
      if (i + 1 < n) {
        const double u = std::clamp(w[static_cast<std::size_t>(next++)] * e, lo, 1.0 - 1e-16);
        y[static_cast<std::size_t>(i)] = normal_quantile(u);
      }
    }
    return log_offset + std::log(prod);
  };

  std::size_t level = 0;
  while (level + 1 < kLatticeSizes.size() && kLatticeSizes[level] < cfg.min_points) ++level;
  while (true) {
    size = kLatticeSizes[level];
    gen = korobov_vector(size, std::max(dims, 1));
    std::fill(acc.begin(), acc.end(), -kInf);
    for (std::size_t s = 0; s < shifts; ++s)
      for (long q = 0; q < size; ++q) acc[s] = log_add_exp(acc[s], point(q, delta[s]));
    double ref = -kInf;
    for (double v : acc) ref = std::max(ref, v);
    if (ref == -kInf) return {0.0, 0.0, -kInf};
    double mean = 0.0;
    for (double v : acc) mean += std::exp(v - ref);
    mean /= cfg.n_shifts;
    double var = 0.0;
    for (double v : acc) var += (std::exp(v - ref) - mean) * (std::exp(v - ref) - mean);
    var /= (cfg.n_shifts - 1);
    const double scale = std::exp(ref - std::log(static_cast<double>(size)));
    const double logp = ref - std::log(static_cast<double>(size)) + std::log(mean);
    const double err = 3.0 * std::sqrt(var / cfg.n_shifts) * scale;
    if (!std::isfinite(logp)) throw NumericError("mvn: non-finite probability estimate");
    const double p = std::exp(logp);
    const bool last = level + 1 >= kLatticeSizes.size() || kLatticeSizes[level + 1] > cfg.n_points;
    if (last || err <= std::min(cfg.abs_tol, cfg.rel_tol * p)) return {p, err, logp};
    ++level;
  }
}

}  // namespace detail

/// P(X <= upper) for X ~ N(0, sigma). Infinite limits are allowed.
inline CdfResult mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma, const QmcConfig& cfg = {}) {
  detail::check_inputs(upper, sigma, "mvn_cdf");
  auto red = detail::drop_infinite(upper, sigma);
  if (red.empty_event) return {0.0, 0.0, -kInf};
  const auto n = red.upper.size();
  if (n == 0) return detail::from_log(0.0);
  if (n == 1) {
    if (!(red.sigma(0, 0) > 0.0)) throw NotPositiveDefiniteError("mvn_cdf: non-positive variance");
    return detail::from_log(log_normal_cdf(red.upper(0) / std::sqrt(red.sigma(0, 0))));
  }
  return detail::lattice_sov(detail::prioritize(red.sigma, red.upper), 0.0, cfg);
}

/// P(X <= upper) for a centered multivariate Student vector with scale
/// matrix `scale` and `df` degrees of freedom (df need not be an integer).
inline CdfResult mvt_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& scale, double df,
                         const QmcConfig& cfg = {}) {
  detail::check_inputs(upper, scale, "mvt_cdf");
  if (!(df > 0.0)) throw DomainError("mvt_cdf: degrees of freedom must be positive");
  auto red = detail::drop_infinite(upper, scale);
  if (red.empty_event) return {0.0, 0.0, -kInf};
  const auto n = red.upper.size();
  if (n == 0) return detail::from_log(0.0);
  if (n == 1) {
    if (!(red.sigma(0, 0) > 0.0)) throw NotPositiveDefiniteError("mvt_cdf: non-positive scale");
    return detail::from_log(log_student_cdf(red.upper(0) / std::sqrt(red.sigma(0, 0)), df));
  }
  return detail::lattice_sov(detail::prioritize(red.sigma, red.upper), df, cfg);
}

}  // namespace maxbayes::numerics
