#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "maxbayes/models/model.hpp"
#include "maxbayes/models/spatial.hpp"
#include "maxbayes/rng.hpp"
#include "oracles.hpp"

using namespace maxbayes;
using namespace maxbayes::models;

namespace {

Eigen::MatrixXd equicorrelation(int k, double rho) {
  return Eigen::MatrixXd::Constant(k, k, rho) + (1.0 - rho) * Eigen::MatrixXd::Identity(k, k);
}

Eigen::MatrixXd line_sites(int k) {
  Eigen::MatrixXd s(k, 1);
  for (int i = 0; i < k; ++i) s(i, 0) = i;
  return s;
}

double partition_sum(const ModelSpec& spec, const std::vector<double>& z) { return std::exp(full_log_density(spec, z)); }

std::vector<ModelSpec> all_families(int k) {
  std::vector<double> alpha;
  for (int i = 0; i < k; ++i) alpha.push_back(0.6 + 0.5 * i);
  return {ModelSpec(Logistic(k, 0.6)), ModelSpec(Dirichlet(alpha)),
          ModelSpec(HuslerReiss(brown_resnick_lambda_sq(line_sites(k), 1.5, 1.0))),
          ModelSpec(ExtremalT(powered_exponential_correlation(line_sites(k), 3.0, 1.0), 2.0))};
}

}  // namespace

TEST(Gev, Examples) {
  const std::vector<double> z{1.0};
  const std::vector<GevMargin> m{{0.0, 1.0, 1.0}};
  const auto t = gev_to_frechet(z, m);
  EXPECT_DOUBLE_EQ(t.u[0], 2.0);
  EXPECT_DOUBLE_EQ(t.log_jacobian, 0.0);
  const std::vector<GevMargin> g{{0.0, 1.0, 1e-12}};
  EXPECT_NEAR(gev_to_frechet(std::vector<double>{0.0}, g).u[0], 1.0, 1e-15);
  EXPECT_THROW(gev_to_frechet(std::vector<double>{-3.0}, m), SupportError);
  try {
    gev_to_frechet(std::vector<double>{1.0, -3.0}, std::vector<GevMargin>{{0, 1, 1}, {0, 1, 1}});
  } catch (const SupportError& e) {
    EXPECT_EQ(e.component(), 1);
    EXPECT_NE(std::string(e.what()).find("component 2"), std::string::npos);
  }
}

TEST(Gev, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mu(-1, 1), sg(0.3, 3), xi(-0.4, 0.6), q(0.05, 0.95);
  for (int t = 0; t < 50; ++t) {
    const GevMargin m{mu(rng), sg(rng), xi(rng)};
    const double z = frechet_to_gev(-1.0 / std::log(q(rng)), m);
    const double h = 1e-5 * m.sigma;
    const double up = std::exp(log_frechet_scale(z + h, m));
    const double dn = std::exp(log_frechet_scale(z - h, m));
    const auto tr = gev_to_frechet(std::vector<double>{z}, std::vector<GevMargin>{m});
    EXPECT_NEAR((up - dn) / (2 * h), std::exp(tr.log_jacobian), 1e-6 * std::exp(tr.log_jacobian));
    const double cdf_up = std::exp(-1.0 / up), cdf_dn = std::exp(-1.0 / dn);
    EXPECT_NEAR((cdf_up - cdf_dn) / (2 * h), std::exp(gev_log_density(z, m)), 1e-6);
  }
}

TEST(Exponent, LogisticClosedForm) {
  const Logistic l(2, 0.5);
  EXPECT_NEAR(l.exponent(std::vector<double>{1.0, 1.0}), std::sqrt(2.0), 1e-14);
}

TEST(Exponent, MarginsAndHomogeneity) {
  for (int k : {2, 3, 4}) {
    for (const auto& spec : all_families(k)) {
      for (int i = 0; i < k; ++i) {
        std::vector<double> z(k, numerics::kInf);
        z[i] = 1.7;
        EXPECT_NEAR(spec.exponent(z), 1.0 / 1.7, 1e-12) << family_name(spec.family());
        std::fill(z.begin(), z.end(), 1e8);
        z[i] = 1.7;
        EXPECT_NEAR(spec.exponent(z), 1.0 / 1.7, 1e-6) << family_name(spec.family());
      }
      std::vector<double> z;
      for (int i = 0; i < k; ++i) z.push_back(0.7 + 0.4 * i);
      const double v = spec.exponent(z);
      for (double c : {0.5, 2.0, 10.0}) {
        std::vector<double> cz(z);
        for (double& x : cz) x *= c;
        EXPECT_NEAR(spec.exponent(cz) * c, v, 1e-6 * v) << family_name(spec.family());
      }
    }
  }
}

TEST(Exponent, HuslerReissMonteCarlo) {
  const HuslerReiss hr(brown_resnick_lambda_sq(line_sites(3), 1.0, 1.0));
  Rng rng(2024);
  const int n = 10'000'000;
  double sum = 0.0, sq = 0.0;
  for (int s = 0; s < n; ++s) {
    // Brownian motion at t = 0, 1, 2 has variogram |h|.
    const double w1 = standard_normal(rng);
    const double w2 = w1 + standard_normal(rng);
    const double m = std::max({1.0, std::exp(w1 - 0.5), std::exp(w2 - 1.0)});
    sum += m;
    sq += m * m;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_NEAR(hr.exponent(std::vector<double>{1.0, 1.0, 1.0}), mean, 4.0 * se);
}

TEST(Weights, LogisticExamples) {
  const Logistic l(2, 0.5);
  const std::vector<double> z{1.0, 1.0};
  EXPECT_NEAR(std::exp(l.log_weight(0b11, z)), std::pow(2.0, -0.5) / 2.0, 1e-14);
  const Logistic l3(3, 0.3);
  const std::vector<double> z3{0.5, 1.2, 3.0};
  double s = 0;
  for (double x : z3) s += std::pow(x, -1 / 0.3);
  EXPECT_NEAR(std::exp(l3.log_weight(0b010, z3)), std::pow(s, 0.3 - 1) * std::pow(1.2, -1 - 1 / 0.3), 1e-13);
}

TEST(Weights, BivariateFiniteDifferenceGates) {
  // omega({1,2}) = -d1 d2 V and omega({i}) = -di V for bivariate laws.
  const std::vector<double> z{1.0, 1.0};
  const HuslerReiss hr(Eigen::Matrix2d{{0.0, 1.0}, {1.0, 0.0}});
  const ExtremalT schlather(Eigen::Matrix2d::Identity(), 1.0);
  const Dirichlet dir({1.0, 1.0});
  auto check = [&](auto const& model, std::vector<double> z0, double tol) {
    oracle::Fn v = [&](const std::vector<double>& x) { return model.exponent(x); };
    const double mixed = oracle::mixed_derivative(v, z0, 1e-3);
    EXPECT_NEAR(std::exp(model.log_weight(0b11, z0)), -mixed, tol * std::abs(mixed));
    for (int i = 0; i < 2; ++i) {
      const double h = 1e-5 * z0[i];
      auto up = z0, dn = z0;
      up[i] += h;
      dn[i] -= h;
      const double d = (v(up) - v(dn)) / (2 * h);
      EXPECT_NEAR(std::exp(model.log_weight(bit(i), z0)), -d, 1e-6 * std::abs(d));
    }
    EXPECT_NEAR(partition_sum(ModelSpec(model), z0), oracle::density_from_exponent(v, z0), tol * partition_sum(ModelSpec(model), z0));
  };
  check(hr, z, 1e-4);
  check(schlather, z, 1e-4);
  check(dir, {1.0, 2.0}, 1e-4);
}

TEST(Weights, PartitionSumMatchesDensityTrivariate) {
  const std::vector<double> z{0.9, 1.1, 1.3};
  const ModelSpec logistic(Logistic(3, 0.7));
  oracle::Fn vl = [&](const std::vector<double>& x) { return logistic.exponent(x); };
  EXPECT_NEAR(partition_sum(logistic, z), oracle::density_from_exponent(vl, z), 1e-5 * partition_sum(logistic, z));

  const Eigen::Matrix3d lam = brown_resnick_lambda_sq(line_sites(3), 1.5, 1.0);
  const ModelSpec hr{HuslerReiss(lam)};
  oracle::Fn vh = [&](const std::vector<double>& x) { return oracle::husler_reiss_v3(lam, x); };
  EXPECT_NEAR(hr.exponent(z), vh(z), 1e-6);
  EXPECT_NEAR(partition_sum(hr, z), oracle::density_from_exponent(vh, z), 1e-3 * partition_sum(hr, z));

  const Eigen::Matrix3d rho = equicorrelation(3, 0.3);
  const ModelSpec et{ExtremalT(rho, 2.0)};
  oracle::Fn vt = [&](const std::vector<double>& x) { return oracle::extremal_t_v3(rho, 2.0, x); };
  const std::vector<double> ones{1.0, 1.0, 1.0};
  EXPECT_NEAR(et.exponent(ones), vt(ones), 2e-5);
  EXPECT_NEAR(partition_sum(et, ones), oracle::density_from_exponent(vt, ones), 5e-3 * partition_sum(et, ones));

  const std::vector<double> alpha{0.8, 1.5, 2.5};
  const ModelSpec dir{Dirichlet(alpha)};
  oracle::Fn vd = [&](const std::vector<double>& x) { return oracle::dirichlet_v(alpha, x); };
  EXPECT_NEAR(dir.exponent(z), vd(z), 1e-8);
  EXPECT_NEAR(partition_sum(dir, z), oracle::density_from_exponent(vd, z), 1e-3 * partition_sum(dir, z));
}

TEST(Weights, HuslerReissAnchorInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.4, 3.0);
  Eigen::MatrixXd sites(4, 2);
  sites << 0, 0, 1, 0.3, 0.2, 1.1, 1.4, 1.2;
  const HuslerReiss hr(brown_resnick_lambda_sq(sites, 1.2, 1.3));
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> z{u(rng), u(rng), u(rng), u(rng)};
    for (Block b = 1; b < 16; ++b) {
      if (block_size(b) < 2) continue;
      const int hi = 63 - std::countl_zero(b);
      EXPECT_NEAR(hr.log_weight(b, z, lowest(b)), hr.log_weight(b, z, hi), 1e-8) << b;
    }
  }
}

TEST(Weights, HuslerReissCompleteDependence) {
  const std::vector<double> z{1.0, 1.0};
  double prev = 0.0;
  for (double l2 : {1e-2, 1e-3, 1e-4, 1e-5}) {
    Eigen::Matrix2d lam{{0.0, l2}, {l2, 0.0}};
    const ModelSpec hr{HuslerReiss(lam)};
    const double one = std::exp(joint_log_likelihood(hr, z, Partition::one_block(2)));
    const double share = one / partition_sum(hr, z);
    // At z = (1, 1): omega({i}) = Phi(lambda) and omega({1,2}) = phi(lambda) / (2 lambda) - Phi(lambda)^2 + ...;
    // compare with the mixed derivative of the closed-form bivariate exponent.
    const double lam1 = std::sqrt(l2);
    oracle::Fn v = [&](const std::vector<double>& x) {
      return numerics::normal_cdf(lam1 + std::log(x[1] / x[0]) / (2 * lam1)) / x[0] +
             numerics::normal_cdf(lam1 + std::log(x[0] / x[1]) / (2 * lam1)) / x[1];
    };
    const double w12 = -oracle::mixed_derivative(v, z, 1e-3 * lam1);
    const double single = numerics::normal_cdf(lam1);
    EXPECT_NEAR(share, w12 / (w12 + single * single), 1e-5);
    EXPECT_GT(share, prev);
    prev = share;
  }
  EXPECT_GT(prev, 0.99);
}

TEST(Weights, ExtremalTSingletonTail) {
  const ExtremalT et(equicorrelation(3, 0.2), 1.0);
  EXPECT_LT(std::exp(et.log_weight(0b001, std::vector<double>{1e6, 1.0, 1.0})), 1e-6);
}

TEST(Weights, BlockHomogeneity) {
  const std::vector<double> z{0.8, 1.3, 2.1};
  for (const auto& spec : all_families(3)) {
    for (Block b = 1; b < 8; ++b) {
      for (double c : {0.5, 3.0}) {
        std::vector<double> cz(z);
        for (double& x : cz) x *= c;
        EXPECT_NEAR(spec.log_weight(b, cz) + (block_size(b) + 1) * std::log(c), spec.log_weight(b, z), 1e-6)
            << family_name(spec.family()) << " " << b;
      }
    }
  }
}

TEST(Likelihood, FiniteForAllPartitionsAtK4) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  for (const auto& spec : all_families(4)) {
    for (int t = 0; t < 3; ++t) {
      const std::vector<double> z{u(rng), u(rng), u(rng), u(rng)};
      for (const auto& tau : enumerate_all(4)) {
        const double ll = joint_log_likelihood(spec, z, tau);
        EXPECT_TRUE(std::isfinite(ll)) << family_name(spec.family()) << tau.to_string();
      }
    }
  }
}

TEST(Likelihood, UnitFrechetMarginsHaveNoJacobian) {
  const std::vector<double> z{0.7, 1.9, 1.2};
  const ModelSpec plain(Logistic(3, 0.4));
  const ModelSpec trivial(Logistic(3, 0.4), std::vector<GevMargin>(3));
  for (const auto& tau : enumerate_all(3))
    EXPECT_NEAR(joint_log_likelihood(plain, z, tau), joint_log_likelihood(trivial, z, tau), 1e-13);
  EXPECT_THROW(joint_log_likelihood(plain, z, Partition::one_block(2)), DomainError);
}

TEST(ExtremalCoefficient, ClosedForms) {
  EXPECT_NEAR(ModelSpec(Logistic(3, 0.5)).pairwise_extremal_coefficient(0, 2), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ExtremalT::pair_coefficient(1.0, 2.0), 1.0, 1e-14);
  EXPECT_NEAR(ExtremalT::pair_coefficient(0.0, 1.0), 1.7071067811865475, 1e-12);
  const HuslerReiss hr(Eigen::Matrix2d{{0.0, 1.0}, {1.0, 0.0}});
  EXPECT_NEAR(hr.pairwise_extremal_coefficient(0, 1), 2.0 * numerics::normal_cdf(1.0), 1e-14);
}

TEST(ExtremalCoefficient, MatchesExponentOnPairs) {
  for (const auto& spec : all_families(4)) {
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        const ModelSpec pair(spec.pair(i, j));
        std::vector<double> full(4, numerics::kInf);
        full[i] = full[j] = 1.0;
        const double tau = spec.pairwise_extremal_coefficient(i, j);
        EXPECT_NEAR(pair.exponent(std::vector<double>{1.0, 1.0}), tau, 1e-6) << family_name(spec.family());
        EXPECT_NEAR(spec.exponent(full), tau, 1e-6) << family_name(spec.family());
      }
  }
}

TEST(ExtremalCoefficient, DirichletDecreasing) {
  double prev = 2.0;
  for (double a1 : {0.5, 1.0, 2.0, 4.0}) {
    const double t = Dirichlet::pair_coefficient(a1, 1.0);
    EXPECT_LT(t, prev);
    EXPECT_GT(t, 1.0);
    prev = t;
  }
  EXPECT_NEAR(Dirichlet::pair_coefficient(1.0, 1.0), 1.5, 1e-8);
}

TEST(Models, ParameterValidation) {
  EXPECT_THROW(Logistic(3, 1.0), DomainError);
  EXPECT_THROW(Dirichlet({1.0, -1.0}), DomainError);
  EXPECT_THROW(HuslerReiss(Eigen::Matrix2d{{0.0, -1.0}, {-1.0, 0.0}}), DomainError);
  // Equal distances on a line violate strict conditional negative definiteness at alpha = 2.
  Eigen::Matrix3d flat = Eigen::Matrix3d::Zero();
  flat(0, 1) = flat(1, 0) = 1.0;
  flat(1, 2) = flat(2, 1) = 1.0;
  flat(0, 2) = flat(2, 0) = 4.0;
  EXPECT_THROW(HuslerReiss{flat}, NotPositiveDefiniteError);
  EXPECT_THROW(ExtremalT(Eigen::Matrix2d{{1.0, 1.0}, {1.0, 1.0}}, 2.0), NotPositiveDefiniteError);
  EXPECT_THROW(ExtremalT(Eigen::Matrix2d::Identity(), 0.0), DomainError);
  EXPECT_THROW(ModelSpec(Logistic(3, 0.5), std::vector<GevMargin>(2)), DomainError);
}
