#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "maxbayes/numerics/special.hpp"
#include "maxbayes/simulate/dataset.hpp"
#include "maxbayes/simulate/gof.hpp"
#include "maxbayes/simulate/samplers.hpp"
#include "oracles.hpp"
#include "sampler_cells.hpp"

using namespace maxbayes;
using namespace maxbayes::simulate;
using models::ModelSpec;

namespace {

struct Frequency {
  double p_hat;
  double sigma;
};

Frequency frequency(int hits, int n, double p_true) {
  return {static_cast<double>(hits) / n, std::sqrt(p_true * (1.0 - p_true) / n)};
}

int count_below(const std::vector<std::vector<double>>& obs, const std::vector<int>& comps, double level) {
  int hits = 0;
  for (const auto& z : obs) {
    bool all = true;
    for (int c : comps) all = all && z[static_cast<std::size_t>(c)] <= level;
    hits += all ? 1 : 0;
  }
  return hits;
}

std::vector<std::vector<double>> draw_exact(const ModelSpec& spec, int n, std::uint64_t seed) {
  return simulate::simulate(SimJob{spec, n, seed}, 0).obs;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(PositiveStable, LaplaceTransform) {
  Rng rng(11);
  const int n = 200000;
  for (double alpha : {0.3, 0.5, 0.9}) {
    for (double t : {0.5, 2.0}) {
      double s1 = 0.0, s2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double v = std::exp(-t * std::exp(log_positive_stable(alpha, rng)));
        s1 += v;
        s2 += v * v;
      }
      const double mean = s1 / n;
      const double se = std::sqrt((s2 / n - mean * mean) / n);
      EXPECT_NEAR(mean, std::exp(-std::pow(t, alpha)), 4.0 * se) << alpha << " " << t;
    }
  }
  EXPECT_EQ(log_positive_stable(1.0, rng), 0.0);
  EXPECT_THROW(log_positive_stable(0.0, rng), DomainError);
}

TEST(SampleLogistic, UnitFrechetMarginAndBivariateCdf) {
  Rng rng(5);
  const int n = 100000;
  std::vector<std::vector<double>> obs;
  for (int i = 0; i < n; ++i) obs.push_back(sample_logistic(0.5, 2, rng));
  const auto m = frequency(count_below(obs, {0}, 1.0), n, std::exp(-1.0));
  EXPECT_NEAR(m.p_hat, std::exp(-1.0), 3.0 * m.sigma);
  const double joint = std::exp(-std::sqrt(2.0));
  EXPECT_NEAR(joint, 0.2431, 1e-4);
  const auto b = frequency(count_below(obs, {0, 1}, 1.0), n, joint);
  EXPECT_NEAR(b.p_hat, joint, 3.0 * b.sigma);
}

TEST(SampleLogistic, NearCompleteDependence) {
  Rng rng(6);
  std::vector<double> ratios;
  for (int i = 0; i < 2000; ++i) {
    const auto z = sample_logistic(0.01, 5, rng);
    ratios.push_back(*std::max_element(z.begin(), z.end()) / *std::min_element(z.begin(), z.end()));
  }
  std::nth_element(ratios.begin(), ratios.begin() + 1000, ratios.end());
  EXPECT_LT(ratios[1000], 1.2);
  EXPECT_THROW(sample_logistic(1.0, 2, rng), DomainError);
}

TEST(ExtremalFunctions, HuslerReissBivariateCdf) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2, 2);
  l(0, 1) = l(1, 0) = 1.0;
  const int n = 50000;
  const auto obs = draw_exact(ModelSpec(models::HuslerReiss(l)), n, 21);
  const double tau = 2.0 * numerics::normal_cdf(1.0);
  EXPECT_NEAR(tau, 1.6827, 1e-4);
  const auto b = frequency(count_below(obs, {0, 1}, 1.0), n, std::exp(-tau));
  EXPECT_NEAR(b.p_hat, std::exp(-tau), 3.0 * b.sigma);
}

TEST(ExtremalFunctions, DirichletPairCoefficient) {
  const ModelSpec spec(models::Dirichlet({1.0, 1.0}));
  const int n = 50000;
  const auto obs = draw_exact(spec, n, 22);
  const double p = std::exp(-spec.pairwise_extremal_coefficient(0, 1));
  const auto b = frequency(count_below(obs, {0, 1}, 1.0), n, p);
  EXPECT_NEAR(b.p_hat, p, 3.0 * b.sigma);
}

TEST(ExtremalFunctions, MarginsAreUnitFrechet) {
  const int n = 20000;
  for (const auto& cell : cells::sampler_cells()) {
    const auto obs = draw_exact(cell.spec, n, 23);
    for (int i = 0; i < cell.spec.dimension(); ++i) {
      const auto m = frequency(count_below(obs, {i}, 1.0), n, std::exp(-1.0));
      EXPECT_NEAR(m.p_hat, std::exp(-1.0), 3.5 * m.sigma) << cell.name << " component " << i;
    }
  }
}

TEST(ExtremalFunctions, ExponentialGateAllCells) {
  for (const auto& cell : cells::sampler_cells()) {
    const auto gates = exponential_gate(cell.spec, draw_exact(cell.spec, 10000, 24));
    for (const auto& g : gates)
      EXPECT_GT(g.ks.p_value, 1e-3) << cell.name << " pair " << g.i << "," << g.j << " D=" << g.ks.statistic;
  }
}

TEST(ExtremalFunctions, GateDetectsWrongLaw) {
  // Logistic data at theta 0.5 checked against the theta 0.7 coefficient must fail.
  const auto obs = draw_exact(ModelSpec(models::Logistic(2, 0.5)), 10000, 25);
  EXPECT_LT(min_p_value(exponential_gate(ModelSpec(models::Logistic(2, 0.7)), obs)), 1e-3);
}

// The hit partition of a bivariate draw is a single block with probability
// int exp(-V(z)) w_{12}(z) dz, computed here on the log scale.
TEST(ExtremalFunctions, HitPartitionFrequency) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2, 2);
  l(0, 1) = l(1, 0) = 0.5;
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(2, 2);
  c(0, 1) = c(1, 0) = 0.5;
  const std::vector<ModelSpec> specs{ModelSpec(models::HuslerReiss(l)), ModelSpec(models::ExtremalT(c, 2.0))};
  for (const auto& spec : specs) {
    const double p_joint = oracle::composite_gl(
        [&](double u1) {
          return oracle::composite_gl(
              [&](double u2) {
                const std::vector<double> z{std::exp(u1), std::exp(u2)};
                return std::exp(-spec.exponent(z) + spec.log_weight(0b11, z) + u1 + u2);
              },
              -9.0, 9.0, 24);
        },
        -9.0, 9.0, 24);
    const int n = 40000;
    const auto data = simulate::simulate(SimJob{spec, n, 26}, 0);
    ASSERT_TRUE(data.partitions.has_value());
    int joint = 0;
    for (const auto& p : *data.partitions) joint += p.num_blocks() == 1 ? 1 : 0;
    const auto f = frequency(joint, n, p_joint);
    EXPECT_NEAR(f.p_hat, p_joint, 3.0 * f.sigma) << models::family_name(spec.family());
  }
}

TEST(ExtremalFunctions, BudgetAndFamilyErrors) {
  Rng rng(3);
  EXPECT_THROW(SpectralLaw(models::Logistic(3, 0.5)), DomainError);
  // Nearly independent components make the first site's early draws fall below later sites rarely;
  // a budget of one draw per site cannot cover the dominance criterion.
  const SpectralLaw law(models::Dirichlet({0.05, 0.05, 0.05}));
  bool threw = false;
  for (int i = 0; i < 50 && !threw; ++i) {
    try {
      sample_extremal_functions(law, rng, 1);
    } catch (const SamplerBudgetError&) {
      threw = true;
    }
  }
  EXPECT_TRUE(threw);
}

TEST(Clayton, SingleBlockHasUnitFrechetMarginsAndLegalPartitions) {
  Rng rng(31);
  const auto d = sample_block_maxima_clayton(0.5, 4, 1, 20000, rng);
  ASSERT_TRUE(d.partitions.has_value());
  ASSERT_EQ(d.partitions->size(), 20000u);
  for (const auto& p : *d.partitions) {
    EXPECT_EQ(p.universe(), Partition::full(4));
    EXPECT_EQ(p.num_blocks(), 1);  // one vector per block: every argmax is time 0
  }
  for (int i = 0; i < 4; ++i) {
    std::vector<double> x;
    for (const auto& z : d.obs) x.push_back(z[static_cast<std::size_t>(i)]);
    EXPECT_GT(numerics::ks_test(x, [](double v) { return std::exp(-1.0 / v); }).p_value, 1e-3);
  }
}

TEST(Clayton, MarginsExactForAnyBlockSize) {
  Rng rng(32);
  const auto d = sample_block_maxima_clayton(0.7, 3, 20, 5000, rng);
  std::vector<double> x;
  for (const auto& z : d.obs) x.push_back(z[1]);
  EXPECT_GT(numerics::ks_test(x, [](double v) { return std::exp(-1.0 / v); }).p_value, 1e-3);
  for (const auto& p : *d.partitions) EXPECT_EQ(p.universe(), Partition::full(3));
}

TEST(Clayton, LargeBlocksApproachLogistic) {
  Rng rng(33);
  const int n = 2000;
  const auto d = sample_block_maxima_clayton(0.5, 2, 5000, n, rng);
  const double p = std::exp(-std::sqrt(2.0));
  const auto f = frequency(count_below(d.obs, {0, 1}, 1.0), n, p);
  EXPECT_NEAR(f.p_hat, p, 3.0 * f.sigma);
  int multi = 0;
  for (const auto& part : *d.partitions) multi += part.num_blocks() > 1 ? 1 : 0;
  EXPECT_GT(multi, 0);
  EXPECT_LT(multi, n);
}

TEST(Clayton, Errors) {
  Rng rng(1);
  EXPECT_THROW(sample_block_maxima_clayton(0.5, 2, 0, 10, rng), DomainError);
  EXPECT_THROW(sample_block_maxima_clayton(1.5, 2, 5, 10, rng), DomainError);
  EXPECT_THROW(SimJob(ModelSpec(models::Dirichlet({1.0, 1.0})), 10, 1, SimMode::block_maxima).validate(), ConfigError);
  EXPECT_THROW(SimJob(ModelSpec(models::Logistic(2, 0.5)), 0, 1).validate(), ConfigError);
}

TEST(Simulate, DeterministicBytesAndRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "maxbayes_test_simulate";
  std::filesystem::create_directories(dir);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(3, 3);
  l << 0, 0.5, 1, 0.5, 0, 0.7, 1, 0.7, 0;
  const SimJob job{ModelSpec(models::HuslerReiss(l)), 50, 99};
  std::vector<Dataset> a, b;
  for (std::uint64_t r = 0; r < 3; ++r) a.push_back(simulate::simulate(job, r));
  for (std::uint64_t r = 3; r-- > 0;) b.insert(b.begin(), simulate::simulate(job, r));
  write_datasets_csv(dir / "a.csv", a);
  write_datasets_csv(dir / "b.csv", b);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.partitions.csv"), slurp(dir / "b.partitions.csv"));
  EXPECT_NE(a[0].obs, a[1].obs);

  const auto back = read_datasets_csv(dir / "a.csv");
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(back[r].obs, a[r].obs);  // shortest round-trip text is exact
    ASSERT_TRUE(back[r].partitions.has_value());
    EXPECT_EQ(*back[r].partitions, *a[r].partitions);
  }
  std::filesystem::remove_all(dir);
}

TEST(Simulate, GevMarginsApplied) {
  const std::vector<models::GevMargin> m(3, models::GevMargin{2.0, 0.5, 0.3});
  const SimJob job{ModelSpec(models::Logistic(3, 0.6), m), 5000, 7};
  const auto d = simulate::simulate(job, 0);
  EXPECT_EQ(d.scale, MarginScale::gev);
  std::vector<double> x;
  for (const auto& z : d.obs) x.push_back(z[2]);
  const auto cdf = [&](double v) { return std::exp(-std::exp(-models::log_frechet_scale(v, m[2]))); };
  EXPECT_GT(numerics::ks_test(x, cdf).p_value, 1e-3);
}

TEST(Ks, KnownValues) {
  EXPECT_NEAR(numerics::kolmogorov_sf(1.3581), 0.05, 1e-4);
  EXPECT_NEAR(numerics::kolmogorov_sf(1.9495), 0.001, 1e-5);
  const auto r = numerics::ks_test({0.1, 0.2, 0.3}, [](double v) { return v; });
  EXPECT_NEAR(r.statistic, 0.7, 1e-12);
}
