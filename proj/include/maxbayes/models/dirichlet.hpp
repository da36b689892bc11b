#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "maxbayes/errors.hpp"
#include "maxbayes/numerics/quadrature.hpp"
#include "maxbayes/numerics/special.hpp"
#include "maxbayes/partition.hpp"

namespace maxbayes::models {

/// Dirichlet model of Coles and Tawn. Spectral functions are independent
/// Gamma(alpha_i)/alpha_i coordinates, so every quantity reduces to
/// one-dimensional integrals over the Poisson radius.
class Dirichlet {
 public:
  explicit Dirichlet(std::vector<double> alpha, double rel_tol = 1e-10) : alpha_(std::move(alpha)), rel_tol_(rel_tol) {
    if (alpha_.empty() || static_cast<int>(alpha_.size()) > kMaxElements)
      throw DomainError("Dirichlet: dimension out of range");
    for (double a : alpha_)
      if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("Dirichlet: alpha must be positive");
    for (double a : alpha_) lgamma_alpha_.push_back(numerics::log_gamma(a));
  }

  int dimension() const noexcept { return static_cast<int>(alpha_.size()); }
  const std::vector<double>& alpha() const noexcept { return alpha_; }

  /// V(z) = E[max_i Y_i / z_i] = int_0^inf (1 - prod_i F_{alpha_i}(alpha_i z_i s)) ds.
  /// The half line is split at the scales 1 / z_i so widely spread
  /// coordinates do not hide features from the adaptive rule.
  double exponent(std::span<const double> z) const {
    check(z);
    std::vector<double> cuts;
    for (double zi : z)
      if (zi != numerics::kInf) cuts.push_back(1.0 / zi);
    if (cuts.empty()) return 0.0;
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> merged{cuts.front()};
    for (double c : cuts)
      if (c > 2.0 * merged.back()) merged.push_back(c);
    merged.back() = cuts.back();
    auto integrand = [&](double s) {
      double log_prod = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] == numerics::kInf) continue;
        log_prod += std::log1p(-numerics::gamma_sf(alpha_[i] * z[i] * s, alpha_[i]));
      }
      return -std::expm1(log_prod);
    };
    // V >= max_i 1 / z_i, so this absolute tolerance is relative to V.
    const numerics::QuadratureOptions piece{.rel_tol = rel_tol_,
                                            .abs_tol = rel_tol_ * cuts.back() / static_cast<double>(merged.size() + 1)};
    double v = 0.0;
    double lo = 0.0;
    for (std::size_t j = 0; j + 1 < merged.size(); ++j) {
      v += numerics::integrate_interval(integrand, lo, merged[j], piece).value;
      lo = merged[j];
    }
    const double top = merged.back();
    v += numerics::integrate_interval(integrand, lo, top, piece).value;
    auto tail = [&](double s) { return integrand(top + s); };
    auto opt = piece;
    opt.scale = top;
    v += numerics::integrate_semi_infinite(tail, opt).value;
    return v;
  }

  /// log omega(block, z) =
  ///   sum_{i in block} [alpha_i log alpha_i + (alpha_i - 1) log z_i - log Gamma(alpha_i)]
  ///   + log int_0^inf s^a e^{-A s} prod_{i not in block} F_{alpha_i}(alpha_i z_i s) ds,
  /// a = sum_{block} alpha_i, A = sum_{block} alpha_i z_i.
  double log_weight(Block block, std::span<const double> z) const {
    check(z);
    double a = 0.0;
    double big_a = 0.0;
    double out = 0.0;
    for_each_element(block, [&](int i) {
      const auto ui = static_cast<std::size_t>(i);
      if (z[ui] == numerics::kInf) throw DomainError("Dirichlet: infinite coordinate inside a block");
      a += alpha_[ui];
      big_a += alpha_[ui] * z[ui];
      out += alpha_[ui] * std::log(alpha_[ui]) + (alpha_[ui] - 1.0) * std::log(z[ui]) - lgamma_alpha_[ui];
    });
    // Normalize by the complement-free integral Gamma(a + 1) / A^(a + 1).
    const double log_full = numerics::log_gamma(a + 1.0) - (a + 1.0) * std::log(big_a);
    const Block complement = Partition::full(dimension()) & ~block;
    if (complement == 0) return out + log_full;
    auto integrand = [&](double s) {
      double lg = a * std::log(s) - big_a * s - log_full;
      for_each_element(complement, [&](int i) {
        const auto ui = static_cast<std::size_t>(i);
        if (z[ui] == numerics::kInf) return;
        lg += std::log(numerics::gamma_cdf(alpha_[ui] * z[ui] * s, alpha_[ui]));
      });
      return std::exp(lg);
    };
    const auto res = numerics::integrate_semi_infinite(integrand, {.rel_tol = rel_tol_, .scale = (a + 1.0) / big_a});
    if (!(res.value > 0.0)) throw NumericError("Dirichlet: weight integral underflowed", res.error);
    return out + log_full + std::log(res.value);
  }

  /// tau(alpha_i, alpha_j) = E[Y_i / alpha_i v Y_j / alpha_j] by nested quadrature
  /// of the two-dimensional integral representation.
  double pairwise_extremal_coefficient(int i, int j) const {
    return pair_coefficient(alpha_.at(static_cast<std::size_t>(i)), alpha_.at(static_cast<std::size_t>(j)));
  }

  static double pair_coefficient(double a1, double a2) {
    using boost::math::quadrature::exp_sinh;
    using boost::math::quadrature::tanh_sinh;
    const double lg1 = numerics::log_gamma(a1);
    const double lg2 = numerics::log_gamma(a2);
    auto density = [](double y, double a, double lg) {
      return y <= 0.0 ? 0.0 : std::exp((a - 1.0) * std::log(y) - y - lg);
    };
    tanh_sinh<double> finite;
    exp_sinh<double> half_line;
    const double tol = 1e-12;
    auto inner = [&](double y1) {
      const double cut = a2 * y1 / a1;
      const double below = finite.integrate([&](double y2) { return density(y2, a2, lg2); }, 0.0, cut, tol);
      const double above =
          half_line.integrate([&](double y2) { return (y2 / a2) * density(y2, a2, lg2); }, cut, numerics::kInf, tol);
      return (y1 / a1) * below + above;
    };
    return finite.integrate([&](double y1) { return inner(y1) * density(y1, a1, lg1); }, 0.0, numerics::kInf, 1e-10);
  }

 private:
  void check(std::span<const double> z) const {
    if (z.size() != alpha_.size()) throw DomainError("Dirichlet: dimension mismatch");
    for (double zi : z)
      if (!(zi > 0.0)) throw DomainError("Dirichlet: z must be positive");
  }

  std::vector<double> alpha_;
  std::vector<double> lgamma_alpha_;
  double rel_tol_;
};

}  // namespace maxbayes::models
