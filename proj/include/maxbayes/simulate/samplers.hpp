#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "maxbayes/errors.hpp"
#include "maxbayes/models/model.hpp"
#include "maxbayes/partition.hpp"
#include "maxbayes/rng.hpp"
#include "maxbayes/simulate/dataset.hpp"

namespace maxbayes::simulate {

using models::Dirichlet;
using models::ExtremalT;
using models::Family;
using models::HuslerReiss;
using models::Logistic;
using models::ModelSpec;

/// log S for S positive stable with Laplace transform exp(-t^alpha), alpha in (0, 1] (Kanter).
inline double log_positive_stable(double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("log_positive_stable: alpha must lie in (0, 1]");
  if (alpha == 1.0) return 0.0;
  const double u = std::numbers::pi * uniform_open(rng);
  const double e = standard_exponential(rng);
  return std::log(std::sin(alpha * u)) - std::log(std::sin(u)) / alpha +
         (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * u)) - std::log(e));
}

inline double sample_gamma(double shape, Rng& rng) {
  std::gamma_distribution<double> g(shape, 1.0);
  return g(rng);
}

/// Exact logistic draw on unit-Frechet margins via the positive-stable mixture.
inline std::vector<double> sample_logistic(double theta, int k, Rng& rng) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("sample_logistic: theta must lie in (0, 1)");
  if (k < 1 || k > kMaxElements) throw DomainError("sample_logistic: dimension out of range");
  const double log_s = log_positive_stable(theta, rng);
  std::vector<double> z(static_cast<std::size_t>(k));
  for (auto& zi : z) zi = std::exp(theta * (log_s - std::log(standard_exponential(rng))));
  return z;
}

struct ExactDraw {
  std::vector<double> z;
  Partition hits;  // components attained by the same extremal function share a block
};

/// Spectral functions normalized at site j (Y_j = 1), one law per family.
class SpectralLaw {
 public:
  explicit SpectralLaw(const Family& family) : family_(family), k_(std::visit([](const auto& f) { return f.dimension(); }, family)) {
    if (std::holds_alternative<Logistic>(family_))
      throw DomainError("sample_extremal_functions: logistic uses sample_logistic");
    if (const auto* hr = std::get_if<HuslerReiss>(&family_)) {
      for (int j = 0; j < k_; ++j) {
        const auto rest = others(j);
        factors_.push_back(rest.empty() ? Eigen::MatrixXd() : cholesky(hr->anchored_cov(j, rest, rest)));
      }
    } else if (const auto* et = std::get_if<ExtremalT>(&family_)) {
      const auto& c = et->correlation();
      for (int j = 0; j < k_; ++j) {
        const auto rest = others(j);
        if (rest.empty()) {
          factors_.emplace_back();
          continue;
        }
        Eigen::MatrixXd s(rest.size(), rest.size());
        for (std::size_t a = 0; a < rest.size(); ++a)
          for (std::size_t b = 0; b < rest.size(); ++b)
            s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                c(rest[a], rest[b]) - c(rest[a], j) * c(rest[b], j);
        factors_.push_back(cholesky(s));
      }
    }
  }

  int dimension() const noexcept { return k_; }

  void draw(int j, Rng& rng, std::vector<double>& y) const {
    y.assign(static_cast<std::size_t>(k_), 0.0);
    if (const auto* d = std::get_if<Dirichlet>(&family_)) {
      const auto& a = d->alpha();
      std::vector<double> w(static_cast<std::size_t>(k_));
      for (int i = 0; i < k_; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        w[iu] = sample_gamma(i == j ? a[iu] + 1.0 : a[iu], rng) / a[iu];
      }
      for (int i = 0; i < k_; ++i) y[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / w[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(j)] = 1.0;
      return;
    }
    const auto rest = others(j);
    const auto& l = factors_[static_cast<std::size_t>(j)];
    Eigen::VectorXd n(static_cast<Eigen::Index>(rest.size()));
    for (auto& v : n) v = standard_normal(rng);
    const Eigen::VectorXd g = l * n;
    if (const auto* hr = std::get_if<HuslerReiss>(&family_)) {
      for (std::size_t a = 0; a < rest.size(); ++a)
        y[static_cast<std::size_t>(rest[a])] = std::exp(g(static_cast<Eigen::Index>(a)) - 2.0 * hr->lambda_sq()(j, rest[a]));
    } else {
      const auto& et = std::get<ExtremalT>(family_);
      // Student location rho_{.j}, scale (Sigma - rho rho^T)/(nu+1), nu+1 degrees of freedom.
      const double chi = std::sqrt(2.0 * sample_gamma(0.5 * (et.nu() + 1.0), rng));
      for (std::size_t a = 0; a < rest.size(); ++a) {
        const double t = et.correlation()(rest[a], j) + g(static_cast<Eigen::Index>(a)) / chi;
        y[static_cast<std::size_t>(rest[a])] = t > 0.0 ? std::pow(t, et.nu()) : 0.0;
      }
    }
    y[static_cast<std::size_t>(j)] = 1.0;
  }

 private:
  std::vector<int> others(int j) const {
    std::vector<int> out;
    for (int i = 0; i < k_; ++i)
      if (i != j) out.push_back(i);
    return out;
  }

  static Eigen::MatrixXd cholesky(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("SpectralLaw: covariance not positive definite");
    return llt.matrixL();
  }

  Family family_;
  int k_;
  std::vector<Eigen::MatrixXd> factors_;
};

/// Exact max-stable draw by extremal functions; each site may spend at most `budget` spectral draws.
inline ExactDraw sample_extremal_functions(const SpectralLaw& law, Rng& rng, int budget = 10000) {
  const int k = law.dimension();
  std::vector<double> z(static_cast<std::size_t>(k), 0.0);
  std::vector<int> owner(static_cast<std::size_t>(k), -1);
  std::vector<double> y;
  int next_id = 0;
  for (int j = 0; j < k; ++j) {
    double gamma = standard_exponential(rng);
    int spent = 0;
    while (1.0 / gamma > z[static_cast<std::size_t>(j)]) {
      if (++spent > budget) throw SamplerBudgetError("sample_extremal_functions: budget exhausted at one site");
      law.draw(j, rng, y);
      bool fresh = true;
      for (int i = 0; i < j && fresh; ++i)
        fresh = y[static_cast<std::size_t>(i)] / gamma < z[static_cast<std::size_t>(i)];
      if (fresh) {
        const int id = next_id++;
        for (int i = 0; i < k; ++i) {
          const auto iu = static_cast<std::size_t>(i);
          if (y[iu] / gamma > z[iu]) {
            z[iu] = y[iu] / gamma;
            owner[iu] = id;
          }
        }
      }
      gamma += standard_exponential(rng);
    }
    if (!(z[static_cast<std::size_t>(j)] >= 1.0 / gamma) || owner[static_cast<std::size_t>(j)] < 0)
      throw NumericError("sample_extremal_functions: termination criterion violated", 0.0);
  }
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(next_id));
  for (int i = 0; i < k; ++i) groups[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])].push_back(i);
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  return {std::move(z), Partition::from_indices(k, groups)};
}

inline ExactDraw sample_extremal_functions(const ModelSpec& spec, Rng& rng, int budget = 10000) {
  return sample_extremal_functions(SpectralLaw(spec.family()), rng, budget);
}

/// Componentwise maxima of b outer-power Clayton vectors (generator (1 + t^theta)^{-1}),
/// divided by b, with occurrence-time partitions. Ties go to the earliest time.
inline Dataset sample_block_maxima_clayton(double theta, int k, int b, int n, Rng& rng) {
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("sample_block_maxima_clayton: theta must lie in (0, 1]");
  if (b < 1 || n < 1) throw DomainError("sample_block_maxima_clayton: b and n must be positive");
  if (k < 1 || k > kMaxElements) throw DomainError("sample_block_maxima_clayton: dimension out of range");
  Dataset out{k, {}, MarginScale::unit_frechet, std::vector<Partition>{}};
  out.obs.reserve(static_cast<std::size_t>(n));
  out.partitions->reserve(static_cast<std::size_t>(n));
  std::vector<double> best(static_cast<std::size_t>(k));
  std::vector<int> when(static_cast<std::size_t>(k));
  for (int l = 0; l < n; ++l) {
    std::fill(best.begin(), best.end(), 0.0);
    std::fill(when.begin(), when.end(), -1);
    for (int t = 0; t < b; ++t) {
      // Frailty V = G^{1/theta} S with G ~ Exp(1), S positive stable of index theta.
      const double log_g = std::log(standard_exponential(rng));
      const double log_s = log_positive_stable(theta, rng);
      for (int i = 0; i < k; ++i) {
        const double log_e = std::log(standard_exponential(rng));
        // U = (1 + (E/V)^theta)^{-1}; unit Frechet X = -1/log U.
        const double x = 1.0 / std::log1p(std::exp(theta * log_e - log_g - theta * log_s));
        const auto iu = static_cast<std::size_t>(i);
        if (x > best[iu]) {
          best[iu] = x;
          when[iu] = t;
        }
      }
    }
    std::vector<double> row(best);
    for (auto& v : row) v /= b;
    std::vector<std::vector<int>> groups;
    std::vector<int> seen_times;
    for (int i = 0; i < k; ++i) {
      const int t = when[static_cast<std::size_t>(i)];
      const auto it = std::find(seen_times.begin(), seen_times.end(), t);
      if (it == seen_times.end()) {
        seen_times.push_back(t);
        groups.push_back({i});
      } else {
        groups[static_cast<std::size_t>(it - seen_times.begin())].push_back(i);
      }
    }
    out.obs.push_back(std::move(row));
    out.partitions->push_back(Partition::from_indices(k, groups));
  }
  return out;
}

enum class SimMode { exact, block_maxima };

struct SimJob {
  ModelSpec spec;
  int n_samples = 1;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::exact;
  int block_size = 50;  // block-maxima mode only; the Clayton attractor is the logistic of the ModelSpec

  void validate() const {
    if (n_samples < 1) throw ConfigError("SimJob: n_samples must be positive");
    if (mode == SimMode::block_maxima) {
      if (block_size < 1) throw ConfigError("SimJob: block_size must be positive");
      if (!std::holds_alternative<Logistic>(spec.family()))
        throw ConfigError("SimJob: block maxima are drawn for a logistic attractor only");
    }
  }
};

/// One replicate; its stream is split from (seed, replicate) so order of evaluation does not matter.
/// Exact extremal-function draws and block maxima carry partitions; logistic exact draws do not.
inline Dataset simulate(const SimJob& job, std::uint64_t replicate) {
  job.validate();
  Rng rng = make_rng(job.seed, replicate);
  const int k = job.spec.dimension();
  Dataset out;
  if (job.mode == SimMode::block_maxima) {
    out = sample_block_maxima_clayton(std::get<Logistic>(job.spec.family()).theta(), k, job.block_size, job.n_samples, rng);
  } else if (const auto* lg = std::get_if<Logistic>(&job.spec.family())) {
    out = Dataset{k, {}, MarginScale::unit_frechet, std::nullopt};
    for (int l = 0; l < job.n_samples; ++l) out.obs.push_back(sample_logistic(lg->theta(), k, rng));
  } else {
    const SpectralLaw law(job.spec.family());
    out = Dataset{k, {}, MarginScale::unit_frechet, std::vector<Partition>{}};
    for (int l = 0; l < job.n_samples; ++l) {
      auto d = sample_extremal_functions(law, rng);
      out.obs.push_back(std::move(d.z));
      out.partitions->push_back(std::move(d.hits));
    }
  }
  if (const auto& m = job.spec.margins()) {
    for (auto& row : out.obs)
      for (std::size_t i = 0; i < row.size(); ++i) row[i] = models::frechet_to_gev(row[i], (*m)[i]);
    out.scale = MarginScale::gev;
  }
  return out;
}

}  // namespace maxbayes::simulate
