#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maxbayes/errors.hpp"
#include "maxbayes/inference/prior.hpp"
#include "maxbayes/models/model.hpp"
#include "maxbayes/models/spatial.hpp"

namespace maxbayes::inference {

enum class Dependence { logistic, dirichlet, brown_resnick, extremal_t };
/// shape_trend: common mu and sigma, xi_i = xi_alpha + i xi_beta for i = 1..k.
enum class MarginModel { unit, fixed, common_gev, shape_trend };

inline const char* dependence_name(Dependence d) {
  switch (d) {
    case Dependence::logistic: return "logistic";
    case Dependence::dirichlet: return "dirichlet";
    case Dependence::brown_resnick: return "brown_resnick";
    case Dependence::extremal_t: return "extremal_t";
  }
  return "?";
}

inline const char* margin_model_name(MarginModel m) {
  switch (m) {
    case MarginModel::unit: return "unit";
    case MarginModel::fixed: return "fixed";
    case MarginModel::common_gev: return "common_gev";
    case MarginModel::shape_trend: return "shape_trend";
  }
  return "?";
}

/// Parametric family of ModelSpecs: a parameter vector (dependence first, then margins) maps to a spec.
struct ModelTemplate {
  Dependence dependence = Dependence::logistic;
  int k = 2;
  models::Sites sites;  // spatial families only
  double nu = 2.0;      // extremal-t degrees of freedom, held fixed
  numerics::QmcConfig qmc;
  MarginModel margins = MarginModel::unit;
  std::vector<models::GevMargin> fixed_margins;

  void validate() const {
    if (k < 2 || k > kMaxElements) throw ConfigError("ModelTemplate: k must lie in [2, 64]");
    if ((dependence == Dependence::brown_resnick || dependence == Dependence::extremal_t) && sites.rows() != k)
      throw ConfigError("ModelTemplate: spatial families need one site per component");
    if (dependence == Dependence::extremal_t && !(nu > 0.0)) throw ConfigError("ModelTemplate: nu must be positive");
    if (margins == MarginModel::fixed && static_cast<int>(fixed_margins.size()) != k)
      throw ConfigError("ModelTemplate: fixed margins need one GEV triple per component");
  }

  int dependence_count() const {
    switch (dependence) {
      case Dependence::logistic: return 1;
      case Dependence::dirichlet: return k;
      default: return 2;
    }
  }

  int parameter_count() const {
    const int m = margins == MarginModel::common_gev ? 3 : margins == MarginModel::shape_trend ? 4 : 0;
    return dependence_count() + m;
  }

  /// Default parameter definitions: uniform prior on the logistic theta, vague
  /// normals on mu, log sigma and xi, standard normal on the trend intercept,
  /// spike-and-slab (0.5, N(0, 0.5^2)) on the trend slope.
  std::vector<ParameterDef> parameters() const {
    validate();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<ParameterDef> out;
    switch (dependence) {
      case Dependence::logistic:
        out.push_back({"theta", Transform::logit, Prior::uniform(0.0, 1.0), 0.5, 0.0, 1.0});
        break;
      case Dependence::dirichlet:
        for (int i = 1; i <= k; ++i)
          out.push_back({"alpha_" + std::to_string(i), Transform::log, Prior::normal(0.0, 2.0, true), 1.0, 0.0, inf});
        break;
      case Dependence::brown_resnick:
      case Dependence::extremal_t:
        out.push_back({"s", Transform::log, Prior::normal(0.0, 2.0, true), 1.0, 0.0, inf});
        out.push_back({"alpha", Transform::reflect, Prior::uniform(0.0, 2.0), 1.0, 0.0, 2.0});
        break;
    }
    if (margins == MarginModel::common_gev || margins == MarginModel::shape_trend) {
      out.push_back({"mu", Transform::identity, Prior::normal(0.0, 10.0), 1.0, -inf, inf});
      out.push_back({"sigma", Transform::log, Prior::normal(0.0, 10.0, true), 1.0, 0.0, inf});
    }
    if (margins == MarginModel::common_gev) out.push_back({"xi", Transform::identity, Prior::normal(0.0, 10.0), 0.1, -inf, inf});
    if (margins == MarginModel::shape_trend) {
      out.push_back({"xi_alpha", Transform::identity, Prior::normal(0.0, 1.0), 0.1, -inf, inf});
      out.push_back({"xi_beta", Transform::identity, Prior::spike_slab(0.5, 0.5), 0.0, -inf, inf});
    }
    return out;
  }

  /// GEV triples implied by the margin part of theta (empty for unit margins).
  std::optional<std::vector<models::GevMargin>> margins_at(std::span<const double> theta) const {
    const auto d = static_cast<std::size_t>(dependence_count());
    switch (margins) {
      case MarginModel::unit: return std::nullopt;
      case MarginModel::fixed: return fixed_margins;
      case MarginModel::common_gev:
        return std::vector<models::GevMargin>(static_cast<std::size_t>(k), models::GevMargin{theta[d], theta[d + 1], theta[d + 2]});
      case MarginModel::shape_trend: {
        std::vector<models::GevMargin> out;
        for (int i = 1; i <= k; ++i) out.push_back({theta[d], theta[d + 1], theta[d + 2] + i * theta[d + 3]});
        return out;
      }
    }
    return std::nullopt;
  }

  models::Family family_at(std::span<const double> theta) const {
    switch (dependence) {
      case Dependence::logistic: return models::Logistic(k, theta[0]);
      case Dependence::dirichlet: return models::Dirichlet(std::vector<double>(theta.begin(), theta.begin() + k));
      case Dependence::brown_resnick:
        return models::HuslerReiss(models::brown_resnick_lambda_sq(sites, theta[0], theta[1]), qmc);
      case Dependence::extremal_t:
        return models::ExtremalT(models::powered_exponential_correlation(sites, theta[0], theta[1]), nu, qmc);
    }
    throw ConfigError("ModelTemplate: unknown dependence");
  }

  /// Throws DomainError (or NotPositiveDefiniteError) outside the model's parameter space.
  models::ModelSpec build(std::span<const double> theta) const {
    if (static_cast<int>(theta.size()) != parameter_count())
      throw DomainError("ModelTemplate: wrong parameter count");
    return models::ModelSpec(family_at(theta), margins_at(theta));
  }
};

}  // namespace maxbayes::inference
