#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "maxbayes/errors.hpp"
#include "maxbayes/models/dirichlet.hpp"
#include "maxbayes/models/extremal_t.hpp"
#include "maxbayes/models/gev.hpp"
#include "maxbayes/models/husler_reiss.hpp"
#include "maxbayes/models/logistic.hpp"
#include "maxbayes/numerics/special.hpp"
#include "maxbayes/partition.hpp"

namespace maxbayes::models {

using Family = std::variant<Logistic, Dirichlet, HuslerReiss, ExtremalT>;

inline const char* family_name(const Family& f) {
  constexpr const char* names[] = {"logistic", "dirichlet", "husler_reiss", "extremal_t"};
  return names[f.index()];
}

/// Dependence family plus optional GEV margins (absent means unit Frechet).
class ModelSpec {
 public:
  explicit ModelSpec(Family family, std::optional<std::vector<GevMargin>> margins = std::nullopt)
      : family_(std::move(family)), margins_(std::move(margins)) {
    if (margins_) {
      if (static_cast<int>(margins_->size()) != dimension()) throw DomainError("ModelSpec: margin count mismatch");
      for (const auto& m : *margins_) validate(m);
    }
  }

  const Family& family() const noexcept { return family_; }
  const std::optional<std::vector<GevMargin>>& margins() const noexcept { return margins_; }
  int dimension() const {
    return std::visit([](const auto& f) { return f.dimension(); }, family_);
  }

  double exponent(std::span<const double> u) const {
    return std::visit([&](const auto& f) { return f.exponent(u); }, family_);
  }

  double log_weight(Block block, std::span<const double> u) const {
    return std::visit([&](const auto& f) { return f.log_weight(block, u); }, family_);
  }

  double pairwise_extremal_coefficient(int i, int j) const {
    check_pair(i, j);
    return std::visit([&](const auto& f) { return f.pairwise_extremal_coefficient(i, j); }, family_);
  }

  /// Bivariate unit-Frechet sub-model on components (i, j).
  Family pair(int i, int j) const {
    check_pair(i, j);
    return std::visit(
        [&](const auto& f) -> Family {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Logistic>) {
            return Logistic(2, f.theta());
          } else if constexpr (std::is_same_v<T, Dirichlet>) {
            return Dirichlet({f.alpha()[static_cast<std::size_t>(i)], f.alpha()[static_cast<std::size_t>(j)]});
          } else if constexpr (std::is_same_v<T, HuslerReiss>) {
            Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2, 2);
            l(0, 1) = l(1, 0) = f.lambda_sq()(i, j);
            return HuslerReiss(l, f.qmc());
          } else {
            Eigen::MatrixXd c = Eigen::MatrixXd::Identity(2, 2);
            c(0, 1) = c(1, 0) = f.correlation()(i, j);
            return ExtremalT(c, f.nu(), f.qmc());
          }
        },
        family_);
  }

  /// Raw observation to unit-Frechet scale.
  FrechetTransform to_frechet(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != dimension()) throw DomainError("ModelSpec: dimension mismatch");
    if (!margins_) {
      FrechetTransform out{std::vector<double>(z.begin(), z.end()), 0.0};
      for (double zi : z)
        if (!(zi > 0.0)) throw DomainError("ModelSpec: unit-Frechet data must be positive");
      return out;
    }
    return gev_to_frechet(z, *margins_);
  }

 private:
  void check_pair(int i, int j) const {
    if (i < 0 || j < 0 || i >= dimension() || j >= dimension() || i == j)
      throw DomainError("ModelSpec: invalid component pair");
  }

  Family family_;
  std::optional<std::vector<GevMargin>> margins_;
};

/// log L(z, tau) = -V(U(z)) + sum_j log omega(tau_j, U(z)) + log Jacobian.
inline double joint_log_likelihood(const ModelSpec& spec, std::span<const double> z, const Partition& tau) {
  if (tau.size() != spec.dimension() || tau.universe() != Partition::full(spec.dimension()))
    throw DomainError("joint_log_likelihood: partition does not match the model dimension");
  const auto t = spec.to_frechet(z);
  double out = -spec.exponent(t.u) + t.log_jacobian;
  for (Block b : tau.blocks()) out += spec.log_weight(b, t.u);
  return out;
}

/// log of the full density: log-sum over every partition. Exponential cost; k <= 12.
inline double full_log_density(const ModelSpec& spec, std::span<const double> z) {
  const auto t = spec.to_frechet(z);
  const double base = -spec.exponent(t.u) + t.log_jacobian;
  double acc = -numerics::kInf;
  for (const auto& tau : enumerate_all(spec.dimension())) {
    double lw = 0.0;
    for (Block b : tau.blocks()) lw += spec.log_weight(b, t.u);
    acc = numerics::log_add_exp(acc, lw);
  }
  return base + acc;
}

}  // namespace maxbayes::models
