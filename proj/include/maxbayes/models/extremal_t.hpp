#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "maxbayes/errors.hpp"
#include "maxbayes/models/gaussian_blocks.hpp"
#include "maxbayes/numerics/mvn.hpp"
#include "maxbayes/numerics/special.hpp"
#include "maxbayes/partition.hpp"

namespace maxbayes::models {

/// Extremal-t distribution with correlation matrix Sigma and degrees of freedom nu.
class ExtremalT {
 public:
  ExtremalT(Eigen::MatrixXd corr, double nu, numerics::QmcConfig qmc = {})
      : corr_(std::move(corr)), nu_(nu), qmc_(qmc) {
    detail::check_symmetric(corr_, "ExtremalT");
    qmc_.validate();
    if (!(nu_ > 0.0) || !std::isfinite(nu_)) throw DomainError("ExtremalT: nu must be positive");
    for (Eigen::Index i = 0; i < corr_.rows(); ++i)
      if (std::abs(corr_(i, i) - 1.0) > 1e-12) throw DomainError("ExtremalT: correlation matrix needs a unit diagonal");
    detail::checked_llt(corr_, "ExtremalT");
  }

  int dimension() const noexcept { return static_cast<int>(corr_.rows()); }
  double nu() const noexcept { return nu_; }
  const Eigen::MatrixXd& correlation() const noexcept { return corr_; }
  const numerics::QmcConfig& qmc() const noexcept { return qmc_; }

  /// V(z) = sum_p z_p^{-1} T_{nu+1}((z_{-p}/z_p)^{1/nu} - rho_{-p,p}; (Sigma - rho rho^T)/(nu+1)).
  double exponent(std::span<const double> z) const {
    check(z);
    const int k = dimension();
    double v = 0.0;
    for (int p = 0; p < k; ++p) {
      const double zp = z[static_cast<std::size_t>(p)];
      if (zp == numerics::kInf) continue;
      std::vector<int> rest;
      for (int i = 0; i < k; ++i)
        if (i != p) rest.push_back(i);
      double log_t = 0.0;
      if (!rest.empty()) {
        const Eigen::VectorXd rho = corr_(rest, std::vector<int>{p});
        Eigen::VectorXd upper(rest.size());
        for (std::size_t a = 0; a < rest.size(); ++a) {
          const double zi = z[static_cast<std::size_t>(rest[a])];
          upper(static_cast<Eigen::Index>(a)) =
              zi == numerics::kInf ? numerics::kInf : std::pow(zi / zp, 1.0 / nu_) - rho(static_cast<Eigen::Index>(a));
        }
        Eigen::MatrixXd scale = (corr_(rest, rest) - rho * rho.transpose()) / (nu_ + 1.0);
        log_t = numerics::mvt_cdf(upper, scale, nu_ + 1.0, qmc_).log_probability;
      }
      v += std::exp(log_t - std::log(zp));
    }
    return v;
  }

  double log_weight(Block block, std::span<const double> z) const {
    check(z);
    const auto in_block = detail::indices_of(block);
    const auto outside = detail::indices_of(Partition::full(dimension()) & ~block);
    const double n = static_cast<double>(in_block.size());
    Eigen::VectorXd x(in_block.size());
    double out = 0.0;
    for (std::size_t a = 0; a < in_block.size(); ++a) {
      const double zi = z[static_cast<std::size_t>(in_block[a])];
      if (zi == numerics::kInf) throw DomainError("ExtremalT: infinite coordinate inside a block");
      x(static_cast<Eigen::Index>(a)) = std::pow(zi, 1.0 / nu_);
      out += (1.0 / nu_ - 1.0) * std::log(zi);
    }
    const auto llt = detail::checked_llt(corr_(in_block, in_block), "ExtremalT weight");
    const Eigen::VectorXd solved = llt.solve(x);
    const double q = x.dot(solved);
    out += (1.0 - n) * std::log(nu_) + 0.5 * (1.0 - n) * std::log(std::numbers::pi) - 0.5 * detail::log_det(llt) +
           numerics::log_gamma(0.5 * (nu_ + n)) - numerics::log_gamma(0.5 * (nu_ + 1.0)) - 0.5 * (nu_ + n) * std::log(q);
    if (!outside.empty()) {
      const Eigen::MatrixXd cross = corr_(outside, in_block);
      Eigen::VectorXd upper(outside.size());
      for (std::size_t a = 0; a < outside.size(); ++a) {
        const double zi = z[static_cast<std::size_t>(outside[a])];
        upper(static_cast<Eigen::Index>(a)) = zi == numerics::kInf ? numerics::kInf : std::pow(zi, 1.0 / nu_);
      }
      upper -= cross * solved;
      Eigen::MatrixXd cond = corr_(outside, outside) - cross * llt.solve(cross.transpose());
      cond = ((q / (n + nu_)) * 0.5 * (cond + cond.transpose())).eval();
      out += numerics::mvt_cdf(upper, cond, n + nu_, qmc_).log_probability;
    }
    return out;
  }

  double pairwise_extremal_coefficient(int i, int j) const { return pair_coefficient(corr_(i, j), nu_); }

  /// 2 T_{nu+1}(sqrt((nu+1)(1-rho)/(1+rho))).
  static double pair_coefficient(double rho, double nu) {
    if (!(rho > -1.0 && rho <= 1.0)) throw DomainError("ExtremalT: correlation out of range");
    return 2.0 * numerics::student_cdf(std::sqrt((nu + 1.0) * (1.0 - rho) / (1.0 + rho)), nu + 1.0);
  }

 private:
  void check(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != dimension()) throw DomainError("ExtremalT: dimension mismatch");
    for (double zi : z)
      if (!(zi > 0.0)) throw DomainError("ExtremalT: z must be positive");
  }

  Eigen::MatrixXd corr_;
  double nu_;
  numerics::QmcConfig qmc_;
};

}  // namespace maxbayes::models
