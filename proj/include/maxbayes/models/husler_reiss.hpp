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

/// Husler-Reiss distribution parameterized by Lambda = {lambda^2_ij},
/// lambda^2_ij = E(W_i - W_j)^2 / 4, i.e. a quarter of the variogram.
class HuslerReiss {
 public:
  explicit HuslerReiss(Eigen::MatrixXd lambda_sq, numerics::QmcConfig qmc = {})
      : lambda_sq_(std::move(lambda_sq)), qmc_(qmc) {
    detail::check_symmetric(lambda_sq_, "HuslerReiss");
    qmc_.validate();
    for (Eigen::Index i = 0; i < lambda_sq_.rows(); ++i) {
      if (lambda_sq_(i, i) != 0.0) throw DomainError("HuslerReiss: Lambda must have a zero diagonal");
      for (Eigen::Index j = 0; j < lambda_sq_.cols(); ++j)
        if (lambda_sq_(i, j) < 0.0) throw DomainError("HuslerReiss: Lambda entries must be non-negative");
    }
    // Strict conditional negative definiteness <=> Sigma^(p) positive definite.
    if (dimension() > 1) {
      std::vector<int> rest;
      for (int i = 1; i < dimension(); ++i) rest.push_back(i);
      detail::checked_llt(anchored_cov(0, rest, rest), "HuslerReiss: Lambda not strictly conditionally negative definite");
    }
  }

  int dimension() const noexcept { return static_cast<int>(lambda_sq_.rows()); }
  const Eigen::MatrixXd& lambda_sq() const noexcept { return lambda_sq_; }
  const numerics::QmcConfig& qmc() const noexcept { return qmc_; }

  /// Sigma^(p)_{ij} = 2 (lambda^2_pi + lambda^2_pj - lambda^2_ij): covariance of W_i - W_p.
  Eigen::MatrixXd anchored_cov(int p, const std::vector<int>& rows, const std::vector<int>& cols) const {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < cols.size(); ++b)
        out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            2.0 * (lambda_sq_(p, rows[a]) + lambda_sq_(p, cols[b]) - lambda_sq_(rows[a], cols[b]));
    return out;
  }

  /// V(z) = sum_p z_p^{-1} Phi_{k-1}(2 lambda^2_{p,-p} + log(z_{-p} / z_p); Sigma^(p)).
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
      double log_phi = 0.0;
      if (!rest.empty()) {
        Eigen::VectorXd upper(rest.size());
        for (std::size_t a = 0; a < rest.size(); ++a) {
          const double zi = z[static_cast<std::size_t>(rest[a])];
          upper(static_cast<Eigen::Index>(a)) =
              zi == numerics::kInf ? numerics::kInf : 2.0 * lambda_sq_(p, rest[a]) + std::log(zi / zp);
        }
        log_phi = numerics::mvn_cdf(upper, anchored_cov(p, rest, rest), qmc_).log_probability;
      }
      v += std::exp(log_phi - std::log(zp));
    }
    return v;
  }

  double log_weight(Block block, std::span<const double> z) const { return log_weight(block, z, lowest(block)); }

  /// Weight anchored at p in block: Gaussian density of the block increments
  /// times the conditional Gaussian CDF of the complement increments.
  double log_weight(Block block, std::span<const double> z, int anchor) const {
    check(z);
    if ((block & bit(anchor)) == 0) throw DomainError("HuslerReiss: anchor outside the block");
    const int k = dimension();
    const auto zs = [&](int i) { return z[static_cast<std::size_t>(i)]; };
    const double zp = zs(anchor);
    if (zp == numerics::kInf) throw DomainError("HuslerReiss: infinite coordinate inside a block");
    const auto in_block = detail::indices_of(block & ~bit(anchor));
    const auto outside = detail::indices_of(Partition::full(k) & ~block);
    auto zstar = [&](int i) {
      return zs(i) == numerics::kInf ? numerics::kInf : std::log(zs(i) / zp) + 2.0 * lambda_sq_(i, anchor);
    };

    double out = -2.0 * std::log(zp);
    Eigen::VectorXd solved;
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (!in_block.empty()) {
      llt = detail::checked_llt(anchored_cov(anchor, in_block, in_block), "HuslerReiss weight");
      Eigen::VectorXd x(in_block.size());
      for (std::size_t a = 0; a < in_block.size(); ++a) {
        const double zi = zs(in_block[a]);
        if (zi == numerics::kInf) throw DomainError("HuslerReiss: infinite coordinate inside a block");
        out -= std::log(zi);
        x(static_cast<Eigen::Index>(a)) = zstar(in_block[a]);
      }
      solved = llt.solve(x);
      out += -0.5 * static_cast<double>(in_block.size()) * std::log(2.0 * std::numbers::pi) - 0.5 * detail::log_det(llt) -
             0.5 * x.dot(solved);
    }
    if (!outside.empty()) {
      Eigen::MatrixXd cond = anchored_cov(anchor, outside, outside);
      Eigen::VectorXd upper(outside.size());
      for (std::size_t a = 0; a < outside.size(); ++a) upper(static_cast<Eigen::Index>(a)) = zstar(outside[a]);
      if (!in_block.empty()) {
        const Eigen::MatrixXd cross = anchored_cov(anchor, outside, in_block);
        upper -= cross * solved;
        cond -= cross * llt.solve(cross.transpose());
        cond = (0.5 * (cond + cond.transpose())).eval();
      }
      out += numerics::mvn_cdf(upper, cond, qmc_).log_probability;
    }
    return out;
  }

  /// 2 Phi(lambda_ij).
  double pairwise_extremal_coefficient(int i, int j) const {
    return 2.0 * numerics::normal_cdf(std::sqrt(lambda_sq_(i, j)));
  }

 private:
  void check(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != dimension()) throw DomainError("HuslerReiss: dimension mismatch");
    for (double zi : z)
      if (!(zi > 0.0)) throw DomainError("HuslerReiss: z must be positive");
  }

  Eigen::MatrixXd lambda_sq_;
  numerics::QmcConfig qmc_;
};

}  // namespace maxbayes::models
