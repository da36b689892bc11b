#pragma once

#include <cmath>
#include <span>

#include "maxbayes/errors.hpp"
#include "maxbayes/numerics/special.hpp"
#include "maxbayes/partition.hpp"

namespace maxbayes::models {

/// Symmetric logistic model, V(z) = (sum z_i^(-1/theta))^theta, theta in (0, 1).
class Logistic {
 public:
  Logistic(int k, double theta) : k_(k), theta_(theta) {
    if (k < 1 || k > kMaxElements) throw DomainError("Logistic: dimension out of range");
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("Logistic: theta must lie in (0, 1)");
    lgamma_one_minus_ = numerics::log_gamma(1.0 - theta);
  }

  int dimension() const noexcept { return k_; }
  double theta() const noexcept { return theta_; }

  /// log sum_i z_i^(-1/theta); infinite coordinates contribute nothing.
  double log_sum(std::span<const double> z) const {
    double acc = -numerics::kInf;
    for (double zi : z) {
      if (!(zi > 0.0)) throw DomainError("Logistic: z must be positive");
      if (zi == numerics::kInf) continue;
      acc = numerics::log_add_exp(acc, -std::log(zi) / theta_);
    }
    return acc;
  }

  double exponent(std::span<const double> z) const {
    const double ls = log_sum(z);
    return ls == -numerics::kInf ? 0.0 : std::exp(theta_ * ls);
  }

  double log_weight(Block block, std::span<const double> z) const { return log_weight(block, z, log_sum(z)); }

  double log_weight(Block block, std::span<const double> z, double log_s) const {
    const int n = block_size(block);
    double out = (1.0 - n) * std::log(theta_) + numerics::log_gamma(n - theta_) - lgamma_one_minus_ +
                 (theta_ - n) * log_s;
    for_each_element(block, [&](int i) { out += (-1.0 - 1.0 / theta_) * std::log(z[static_cast<std::size_t>(i)]); });
    return out;
  }

  /// log of the simplified weight theta Gamma(n - theta) / Gamma(1 - theta) S^theta,
  /// which depends on the block only through its size n.
  double log_reduced_weight(int n, double log_s) const {
    return std::log(theta_) + numerics::log_gamma(n - theta_) - lgamma_one_minus_ + theta_ * log_s;
  }

  /// Partition-invariant remainder: log L(z, tau) = -V + offset + sum_j log_reduced_weight(|tau_j|).
  double log_reduced_offset(std::span<const double> z, double log_s) const {
    double out = -static_cast<double>(k_) * (log_s + std::log(theta_));
    for (double zi : z) out += (-1.0 - 1.0 / theta_) * std::log(zi);
    return out;
  }

  double pairwise_extremal_coefficient(int, int) const { return std::exp2(theta_); }

 private:
  int k_;
  double theta_;
  double lgamma_one_minus_ = 0.0;
};

}  // namespace maxbayes::models
