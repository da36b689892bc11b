#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "maxbayes/errors.hpp"
#include "maxbayes/numerics/special.hpp"

namespace maxbayes::inference {

/// Proposal scale on which the random walk runs.
enum class Transform { identity, logit, log, reflect };

inline const char* transform_name(Transform t) {
  switch (t) {
    case Transform::identity: return "identity";
    case Transform::logit: return "logit";
    case Transform::log: return "log";
    case Transform::reflect: return "reflect";
  }
  return "?";
}

/// Maps to the random-walk scale; reflect uses the identity and folds at zero.
inline double to_walk(Transform t, double x) {
  switch (t) {
    case Transform::logit: return std::log(x) - std::log1p(-x);
    case Transform::log: return std::log(x);
    default: return x;
  }
}

inline double from_walk(Transform t, double y) {
  switch (t) {
    case Transform::logit: return 1.0 / (1.0 + std::exp(-y));
    case Transform::log: return std::exp(y);
    case Transform::reflect: return std::abs(y);
    default: return y;
  }
}

/// log |d walk / dx|, the Jacobian entering the proposal-density correction.
inline double log_walk_jacobian(Transform t, double x) {
  switch (t) {
    case Transform::logit: return -std::log(x) - std::log1p(-x);
    case Transform::log: return -std::log(x);
    default: return 0.0;
  }
}

class Prior {
 public:
  enum class Kind { uniform, normal, beta, spike_slab };

  static Prior uniform(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw ConfigError("uniform prior: need finite a < b");
    return Prior(Kind::uniform, a, b, false);
  }
  /// With log_scale the normal law applies to log x and x > 0.
  static Prior normal(double mean, double sd, bool log_scale = false) {
    if (!(sd > 0.0) || !std::isfinite(mean)) throw ConfigError("normal prior: need sd > 0");
    return Prior(Kind::normal, mean, sd, log_scale);
  }
  static Prior beta(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw ConfigError("beta prior: need positive shapes");
    return Prior(Kind::beta, a, b, false);
  }
  /// Atom of mass p0 at zero plus (1 - p0) N(0, slab_sd^2).
  static Prior spike_slab(double p0, double slab_sd) {
    if (!(p0 > 0.0 && p0 < 1.0) || !(slab_sd > 0.0)) throw ConfigError("spike-and-slab prior: need p0 in (0,1), sd > 0");
    return Prior(Kind::spike_slab, p0, slab_sd, false);
  }

  Kind kind() const noexcept { return kind_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  bool log_scale() const noexcept { return log_scale_; }

  double lower() const noexcept {
    if (kind_ == Kind::uniform) return a_;
    if (kind_ == Kind::beta || log_scale_) return 0.0;
    return -std::numeric_limits<double>::infinity();
  }
  double upper() const noexcept {
    if (kind_ == Kind::uniform) return b_;
    if (kind_ == Kind::beta) return 1.0;
    return std::numeric_limits<double>::infinity();
  }

  /// Log density; for spike-and-slab the atom at zero contributes log p0 and the
  /// slab contributes log((1 - p0) phi), densities taken against delta_0 + Lebesgue.
  double log_density(double x) const {
    if (!std::isfinite(x)) return -numerics::kInf;
    switch (kind_) {
      case Kind::uniform: return (x > a_ && x < b_) ? -std::log(b_ - a_) : -numerics::kInf;
      case Kind::normal: {
        if (log_scale_) {
          if (!(x > 0.0)) return -numerics::kInf;
          const double t = (std::log(x) - a_) / b_;
          return -0.5 * t * t - std::log(b_) - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(x);
        }
        const double t = (x - a_) / b_;
        return -0.5 * t * t - std::log(b_) - 0.5 * std::log(2.0 * std::numbers::pi);
      }
      case Kind::beta:
        if (!(x > 0.0 && x < 1.0)) return -numerics::kInf;
        return (a_ - 1.0) * std::log(x) + (b_ - 1.0) * std::log1p(-x) - numerics::log_gamma(a_) - numerics::log_gamma(b_) +
               numerics::log_gamma(a_ + b_);
      case Kind::spike_slab: {
        if (x == 0.0) return std::log(a_);
        const double t = x / b_;
        return std::log1p(-a_) - 0.5 * t * t - std::log(b_) - 0.5 * std::log(2.0 * std::numbers::pi);
      }
    }
    return -numerics::kInf;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::uniform: return "uniform(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
      case Kind::normal: return std::string(log_scale_ ? "lognormal(" : "normal(") + std::to_string(a_) + "," + std::to_string(b_) + ")";
      case Kind::beta: return "beta(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
      case Kind::spike_slab: return "spike_slab(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
    }
    return "?";
  }

 private:
  Prior(Kind kind, double a, double b, bool log_scale) : kind_(kind), a_(a), b_(b), log_scale_(log_scale) {}

  Kind kind_;
  double a_;
  double b_;
  bool log_scale_;
};

/// One sampled parameter: its proposal scale, prior, start value and model support (lower, upper).
struct ParameterDef {
  std::string name;
  Transform transform = Transform::identity;
  Prior prior = Prior::normal(0.0, 10.0);
  double init = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool in_support(double x) const {
    return std::isfinite(x) && x > lower && x < upper && x >= prior.lower() && x <= prior.upper();
  }
};

}  // namespace maxbayes::inference
