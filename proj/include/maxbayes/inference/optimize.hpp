#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "maxbayes/errors.hpp"

namespace maxbayes::inference {

struct NelderMeadOptions {
  double f_tol = 1e-10;  // relative spread of simplex values
  double x_tol = 1e-8;   // simplex diameter
  int max_evals = 4000;
  int restarts = 1;  // fresh simplex around the best point after convergence
};

struct OptimResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
  int evaluations = 0;
};

/// Derivative-free minimization; non-finite values count as +inf.
inline OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                               double initial_step = 0.5, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (n == 0) throw DomainError("nelder_mead: empty parameter vector");
  OptimResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  std::vector<double> best = std::move(x0);
  double best_value = eval(best);
  bool converged = false;
  for (int round = 0; round <= opt.restarts; ++round) {
    std::vector<std::vector<double>> simplex{best};
    std::vector<double> values{best_value};
    for (std::size_t j = 0; j < n; ++j) {
      auto x = best;
      x[j] += initial_step;
      simplex.push_back(x);
      values.push_back(eval(x));
    }
    std::vector<std::size_t> order(n + 1);
    converged = false;
    while (res.evaluations < opt.max_evals) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[n - 1];
      double diameter = 0.0;
      for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t d = 0; d < n; ++d) diameter = std::max(diameter, std::abs(simplex[j][d] - simplex[lo][d]));
      const double spread = values[hi] - values[lo];
      if (std::isfinite(values[hi]) && spread <= opt.f_tol * (std::abs(values[lo]) + opt.f_tol) && diameter <= std::sqrt(opt.x_tol)) {
        converged = true;
        break;
      }
      if (diameter <= opt.x_tol) {
        converged = std::isfinite(values[lo]);
        break;
      }
      std::vector<double> centroid(n, 0.0);
      for (std::size_t j = 0; j <= n; ++j)
        if (j != hi)
          for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[j][d] / static_cast<double>(n);
      auto along = [&](double t) {
        std::vector<double> x(n);
        for (std::size_t d = 0; d < n; ++d) x[d] = centroid[d] + t * (simplex[hi][d] - centroid[d]);
        return x;
      };
      const auto xr = along(-1.0);
      const double fr = eval(xr);
      if (fr < values[lo]) {
        const auto xe = along(-2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[hi] = xe;
          values[hi] = fe;
        } else {
          simplex[hi] = xr;
          values[hi] = fr;
        }
      } else if (fr < values[second]) {
        simplex[hi] = xr;
        values[hi] = fr;
      } else {
        const bool outside = fr < values[hi];
        const auto xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : values[hi])) {
          simplex[hi] = xc;
          values[hi] = fc;
        } else {
          for (std::size_t j = 0; j <= n; ++j) {
            if (j == lo) continue;
            for (std::size_t d = 0; d < n; ++d) simplex[j][d] = simplex[lo][d] + 0.5 * (simplex[j][d] - simplex[lo][d]);
            values[j] = eval(simplex[j]);
          }
        }
      }
    }
    const auto it = std::min_element(values.begin(), values.end());
    best = simplex[static_cast<std::size_t>(it - values.begin())];
    best_value = *it;
    initial_step *= 0.1;
  }
  res.x = std::move(best);
  res.value = best_value;
  res.converged = converged && std::isfinite(best_value);
  return res;
}

}  // namespace maxbayes::inference
