#pragma once

#include <cmath>
#include <vector>

#include "maxbayes/models/model.hpp"
#include "maxbayes/numerics/ks.hpp"

namespace maxbayes::simulate {

struct PairGate {
  int i = 0;
  int j = 0;
  double tau = 0.0;
  numerics::KsResult ks;
};

/// For unit-Frechet max-stable data 1/max(Z_i, Z_j) is Exp(tau_ij); one KS test per pair.
inline std::vector<PairGate> exponential_gate(const models::ModelSpec& spec, const std::vector<std::vector<double>>& obs) {
  const int k = spec.dimension();
  std::vector<PairGate> out;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double tau = spec.pairwise_extremal_coefficient(i, j);
      std::vector<double> x;
      x.reserve(obs.size());
      for (const auto& z : obs) x.push_back(1.0 / std::max(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]));
      out.push_back({i, j, tau, numerics::ks_test(std::move(x), [tau](double v) { return -std::expm1(-tau * v); })});
    }
  }
  return out;
}

inline double min_p_value(const std::vector<PairGate>& gates) {
  double p = 1.0;
  for (const auto& g : gates) p = std::min(p, g.ks.p_value);
  return p;
}

}  // namespace maxbayes::simulate
