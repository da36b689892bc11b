#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "maxbayes/errors.hpp"
#include "maxbayes/inference/gibbs.hpp"
#include "maxbayes/inference/model_template.hpp"
#include "maxbayes/inference/prior.hpp"
#include "maxbayes/models/model.hpp"
#include "maxbayes/numerics/special.hpp"
#include "maxbayes/partition.hpp"
#include "maxbayes/rng.hpp"

namespace maxbayes::inference {

struct McmcConfig {
  enum class InitPartition { singletons, one_block };

  int n_iter = 1500;  // including burn-in
  int burn_in = 500;
  long gibbs_per_iter = -1;  // negative means N * k
  double target_accept = 0.3;
  double init_step = 0.3;  // proposal sd on the walk scale
  InitPartition init_partition = InitPartition::singletons;
  bool use_likelihood = true;
  /// Replace the full likelihood by the product of GEV margins (no partitions).
  bool independence_likelihood = false;
  double spike_proposal = 0.5;  // p0 of the point-mass proposal for spike-and-slab parameters

  void validate() const {
    if (n_iter < 1 || burn_in < 0 || burn_in >= n_iter) throw ConfigError("McmcConfig: need 0 <= burn_in < n_iter");
    if (!(target_accept > 0.0 && target_accept < 1.0)) throw ConfigError("McmcConfig: target_accept must lie in (0, 1)");
    if (!(init_step > 0.0)) throw ConfigError("McmcConfig: init_step must be positive");
    if (!(spike_proposal > 0.0 && spike_proposal < 1.0)) throw ConfigError("McmcConfig: spike_proposal must lie in (0, 1)");
  }
};

/// Per-iteration parameter values (natural scale), mean block count and accepted-move count.
struct Trace {
  std::vector<std::string> names;
  std::vector<std::vector<double>> theta;
  std::vector<double> mean_blocks;
  std::vector<int> accepted;
  int burn_in = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<double> acceptance_rate;  // after burn-in, per parameter
  std::vector<double> final_step;
  double runtime_seconds = 0.0;

  int size() const noexcept { return static_cast<int>(theta.size()); }

  /// Post-burn-in draws of parameter p.
  std::vector<double> kept(int p) const {
    std::vector<double> out;
    for (std::size_t t = static_cast<std::size_t>(burn_in); t < theta.size(); ++t) out.push_back(theta[t][static_cast<std::size_t>(p)]);
    return out;
  }
  std::vector<double> kept_mean_blocks() const {
    if (mean_blocks.size() <= static_cast<std::size_t>(burn_in)) return {};
    return {mean_blocks.begin() + burn_in, mean_blocks.end()};
  }
  int index_of(const std::string& name) const {
    for (std::size_t p = 0; p < names.size(); ++p)
      if (names[p] == name) return static_cast<int>(p);
    throw DomainError("Trace: no parameter named " + name);
  }
};

/// FNV-1a, stable across runs and platforms.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Metropolis-within-Gibbs sampler for (theta, tau^(1..N)) given raw observations.
class Chain {
 public:
  Chain(std::vector<std::vector<double>> data, ModelTemplate tmpl, std::vector<ParameterDef> params, McmcConfig cfg,
        std::uint64_t seed)
      : data_(std::move(data)), tmpl_(std::move(tmpl)), params_(std::move(params)), cfg_(cfg), rng_(seed) {
    tmpl_.validate();
    cfg_.validate();
    if (data_.empty()) throw ConfigError("Chain: no observations");
    k_ = tmpl_.k;
    for (const auto& z : data_)
      if (static_cast<int>(z.size()) != k_) throw ConfigError("Chain: observation dimension differs from the model");
    if (static_cast<int>(params_.size()) != tmpl_.parameter_count()) throw ConfigError("Chain: parameter list does not match the model");
    std::vector<double> theta;
    for (const auto& p : params_) {
      if (p.prior.kind() == Prior::Kind::spike_slab && p.transform != Transform::identity)
        throw ConfigError("Chain: spike-and-slab parameters use the identity walk");
      if (!p.in_support(p.init) || !std::isfinite(p.prior.log_density(p.init)))
        throw ConfigError("Chain: initial value of " + p.name + " outside the prior support");
      theta.push_back(p.init);
    }
    log_step_.assign(params_.size(), std::log(cfg_.init_step));
    accept_count_.assign(params_.size(), 0);
    propose_count_.assign(params_.size(), 0);
    const int n = static_cast<int>(data_.size());
    blocks_.assign(static_cast<std::size_t>(n), {});
    for (auto& b : blocks_) init_blocks(b);
    state_ = build(std::move(theta));
    if (!state_.valid) throw ConfigError("Chain: initial parameters give zero likelihood");
    trace_.names.reserve(params_.size());
    for (const auto& p : params_) trace_.names.push_back(p.name);
    trace_.burn_in = cfg_.burn_in;
    trace_.seed = seed;
    trace_.config_hash = fnv1a_hex(describe());
  }

  int observations() const noexcept { return static_cast<int>(data_.size()); }
  std::span<const double> theta() const noexcept { return state_.theta; }
  const Trace& trace() const noexcept { return trace_; }
  const McmcConfig& config() const noexcept { return cfg_; }

  void set_partitions(const std::vector<Partition>& parts) {
    if (parts.size() != data_.size()) throw ConfigError("Chain: one partition per observation required");
    for (std::size_t l = 0; l < parts.size(); ++l) {
      if (parts[l].universe() != Partition::full(k_)) throw ConfigError("Chain: partition ground set mismatch");
      blocks_[l].assign(parts[l].blocks().begin(), parts[l].blocks().end());
    }
    ll_dirty_ = true;
  }

  std::vector<Partition> partitions() const {
    std::vector<Partition> out;
    for (const auto& b : blocks_) out.emplace_back(Partition::full(k_), b);
    return out;
  }

  double mean_blocks() const {
    double s = 0.0;
    for (const auto& b : blocks_) s += static_cast<double>(b.size());
    return s / static_cast<double>(blocks_.size());
  }

  /// Log-likelihood from the cached weights.
  double cached_log_likelihood() { return log_likelihood(state_); }

  /// Log-likelihood recomputed from the model without any cache.
  double fresh_log_likelihood() const {
    const auto spec = tmpl_.build(state_.theta);
    double out = 0.0;
    for (std::size_t l = 0; l < data_.size(); ++l) {
      if (cfg_.independence_likelihood) {
        const auto t = spec.to_frechet(data_[l]);
        out += t.log_jacobian;
        for (double u : t.u) out += -1.0 / u - 2.0 * std::log(u);
      } else {
        out += models::joint_log_likelihood(spec, data_[l], Partition(Partition::full(k_), blocks_[l]));
      }
    }
    return out;
  }

  /// Runs all iterations; on failure the partial trace stays available and EstimationError is thrown.
  const Trace& run() {
    const auto start = std::chrono::steady_clock::now();
    for (int t = trace_.size(); t < cfg_.n_iter; ++t) {
      try {
        iterate(t);
      } catch (const Error& e) {
        finish(start);
        throw EstimationError("chain failed at iteration " + std::to_string(t) + ": " + e.what());
      }
    }
    finish(start);
    return trace_;
  }

  /// One MH sweep over the parameters followed by the Gibbs updates; appends a trace row.
  void iterate(int t) {
    const bool adapting = t < cfg_.burn_in;
    if (t == cfg_.burn_in) {
      // Acceptance rates are reported for the frozen kernel only.
      std::fill(accept_count_.begin(), accept_count_.end(), 0);
      std::fill(propose_count_.begin(), propose_count_.end(), 0);
    }
    int accepted = 0;
    for (std::size_t p = 0; p < params_.size(); ++p) accepted += mh_update(p, adapting, t) ? 1 : 0;
    if (uses_partitions()) gibbs_sweep(gibbs_updates());
    trace_.theta.push_back(state_.theta);
    trace_.mean_blocks.push_back(mean_blocks());
    trace_.accepted.push_back(accepted);
  }

  long gibbs_updates() const {
    return cfg_.gibbs_per_iter >= 0 ? cfg_.gibbs_per_iter : static_cast<long>(data_.size()) * k_;
  }

  /// Random-scan Gibbs: each update picks (observation, component) uniformly.
  void gibbs_sweep(long updates) {
    if (!uses_partitions()) return;
    std::uniform_int_distribution<int> pick_obs(0, observations() - 1);
    std::uniform_int_distribution<int> pick_comp(0, k_ - 1);
    for (long s = 0; s < updates; ++s) {
      const int l = pick_obs(rng_);
      const int i = pick_comp(rng_);
      gibbs_update(l, i);
    }
    ll_dirty_ = true;
  }

  void gibbs_update(int l, int i) {
    auto& blocks = blocks_[static_cast<std::size_t>(l)];
    const Block m = bit(i);
    if (state_.logistic) {
      const auto& g = state_.g;
      const double alone = g[1] + state_.theta[0] * state_.log_s[static_cast<std::size_t>(l)];
      gibbs_update_blocks(
          blocks, i, [&](Block b) { const int n = block_size(b); return g[static_cast<std::size_t>(n) + 1] - g[static_cast<std::size_t>(n)]; },
          alone, rng_, scratch_);
    } else {
      gibbs_update_blocks(
          blocks, i, [&](Block b) { return weight(state_, l, b | m) - weight(state_, l, b); }, weight(state_, l, m), rng_,
          scratch_);
    }
    ll_dirty_ = true;
  }

  /// Step sizes on the walk scale after adaptation.
  std::vector<double> steps() const {
    std::vector<double> out;
    for (double s : log_step_) out.push_back(std::exp(s));
    return out;
  }

 private:
  struct State {
    std::vector<double> theta;
    bool valid = false;
    bool logistic = false;
    std::optional<models::ModelSpec> spec;
    std::vector<double> u;  // N x k, row-major
    std::vector<double> log_jac;
    std::vector<double> v;
    std::vector<double> log_s;   // logistic only
    std::vector<double> offset;  // logistic only
    std::vector<double> g;       // logistic reduced weight by block size
    std::vector<std::unordered_map<Block, double>> memo;
    double log_prior = 0.0;
  };

  bool uses_partitions() const noexcept { return cfg_.use_likelihood && !cfg_.independence_likelihood; }

  void init_blocks(std::vector<Block>& b) const {
    b.clear();
    if (cfg_.init_partition == McmcConfig::InitPartition::one_block) {
      b.push_back(Partition::full(k_));
    } else {
      for (int i = 0; i < k_; ++i) b.push_back(bit(i));
    }
  }

  std::string describe() const {
    std::string s = std::string(dependence_name(tmpl_.dependence)) + ";k=" + std::to_string(k_) + ";margins=" +
                    margin_model_name(tmpl_.margins) + ";nu=" + std::to_string(tmpl_.nu);
    for (const auto& p : params_)
      s += ";" + p.name + ":" + transform_name(p.transform) + ":" + p.prior.describe() + ":" + std::to_string(p.init);
    s += ";n_iter=" + std::to_string(cfg_.n_iter) + ";burn_in=" + std::to_string(cfg_.burn_in) +
         ";gibbs=" + std::to_string(cfg_.gibbs_per_iter) + ";target=" + std::to_string(cfg_.target_accept) +
         ";step=" + std::to_string(cfg_.init_step) + ";init=" + std::to_string(static_cast<int>(cfg_.init_partition)) +
         ";lik=" + std::to_string(cfg_.use_likelihood) + ";indep=" + std::to_string(cfg_.independence_likelihood) +
         ";spike=" + std::to_string(cfg_.spike_proposal) + ";N=" + std::to_string(data_.size());
    return s;
  }

  State build(std::vector<double> theta) const {
    State s;
    s.theta = std::move(theta);
    s.log_prior = 0.0;
    for (std::size_t p = 0; p < params_.size(); ++p) {
      if (!params_[p].in_support(s.theta[p])) return s;
      s.log_prior += params_[p].prior.log_density(s.theta[p]);
    }
    if (!std::isfinite(s.log_prior)) return s;
    try {
      s.spec.emplace(tmpl_.build(s.theta));
    } catch (const DomainError&) {
      return s;
    }
    if (!cfg_.use_likelihood) {
      s.valid = true;
      return s;
    }
    const std::size_t n = data_.size();
    const auto ku = static_cast<std::size_t>(k_);
    s.u.resize(n * ku);
    s.log_jac.resize(n);
    try {
      for (std::size_t l = 0; l < n; ++l) {
        const auto t = s.spec->to_frechet(data_[l]);
        std::copy(t.u.begin(), t.u.end(), s.u.begin() + static_cast<std::ptrdiff_t>(l * ku));
        s.log_jac[l] = t.log_jacobian;
      }
    } catch (const SupportError&) {
      return s;
    }
    if (cfg_.independence_likelihood) {
      s.valid = true;
      return s;
    }
    s.v.resize(n);
    if (const auto* lg = std::get_if<models::Logistic>(&s.spec->family())) {
      s.logistic = true;
      const double th = lg->theta();
      s.log_s.resize(n);
      s.offset.resize(n);
      for (std::size_t l = 0; l < n; ++l) {
        const std::span<const double> u(s.u.data() + l * ku, ku);
        s.log_s[l] = lg->log_sum(u);
        s.v[l] = std::exp(th * s.log_s[l]);
        s.offset[l] = lg->log_reduced_offset(u, s.log_s[l]) + s.log_jac[l];
      }
      s.g.assign(ku + 2, 0.0);
      for (int m = 1; m <= k_ + 1; ++m) s.g[static_cast<std::size_t>(m)] = lg->log_reduced_weight(m, 0.0);
    } else {
      s.memo.resize(n);
      for (std::size_t l = 0; l < n; ++l) s.v[l] = s.spec->exponent(std::span<const double>(s.u.data() + l * ku, ku));
    }
    s.valid = true;
    return s;
  }

  double weight(State& s, int l, Block b) const {
    auto& memo = s.memo[static_cast<std::size_t>(l)];
    if (const auto it = memo.find(b); it != memo.end()) return it->second;
    const auto ku = static_cast<std::size_t>(k_);
    const double w = s.spec->log_weight(b, std::span<const double>(s.u.data() + static_cast<std::size_t>(l) * ku, ku));
    memo.emplace(b, w);
    return w;
  }

  double log_likelihood(State& s) const {
    if (!s.valid) return -numerics::kInf;
    if (!cfg_.use_likelihood) return 0.0;
    const auto ku = static_cast<std::size_t>(k_);
    double out = 0.0;
    if (cfg_.independence_likelihood) {
      for (std::size_t l = 0; l < data_.size(); ++l) {
        out += s.log_jac[l];
        for (std::size_t i = 0; i < ku; ++i) {
          const double u = s.u[l * ku + i];
          out += -1.0 / u - 2.0 * std::log(u);
        }
      }
      return out;
    }
    for (std::size_t l = 0; l < data_.size(); ++l) {
      out -= s.v[l];
      if (s.logistic) {
        out += s.offset[l];
        const double per_block = s.theta[0] * s.log_s[l];
        for (Block b : blocks_[l]) out += s.g[static_cast<std::size_t>(block_size(b))] + per_block;
      } else {
        out += s.log_jac[l];
        for (Block b : blocks_[l]) out += weight(s, static_cast<int>(l), b);
      }
    }
    return out;
  }

  double current_log_likelihood() {
    if (ll_dirty_) {
      ll_ = log_likelihood(state_);
      ll_dirty_ = false;
    }
    return ll_;
  }

  static double log_normal_pdf(double x, double sd) {
    const double t = x / sd;
    return -0.5 * t * t - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
  }

  bool mh_update(std::size_t p, bool adapting, int t) {
    const auto& def = params_[p];
    const double cur = state_.theta[p];
    const double h = std::exp(log_step_[p]);
    double prop = 0.0;
    double log_q = 0.0;  // log q(prop -> cur) - log q(cur -> prop)
    bool continuous_move = true;
    if (def.prior.kind() == Prior::Kind::spike_slab) {
      const double p0 = cfg_.spike_proposal;
      if (uniform_open(rng_) < p0) {
        prop = 0.0;
        continuous_move = false;
      } else {
        prop = cur + h * standard_normal(rng_);
      }
      if (cur != 0.0 && prop == 0.0) log_q = std::log1p(-p0) + log_normal_pdf(cur, h) - std::log(p0);
      if (cur == 0.0 && prop != 0.0) log_q = std::log(p0) - std::log1p(-p0) - log_normal_pdf(prop, h);
    } else {
      prop = from_walk(def.transform, to_walk(def.transform, cur) + h * standard_normal(rng_));
      if (def.transform != Transform::reflect)
        log_q = log_walk_jacobian(def.transform, cur) - log_walk_jacobian(def.transform, prop);
    }
    ++propose_count_[p];
    double alpha = 0.0;
    bool accept = false;
    if (prop == cur) {
      alpha = 1.0;
      accept = true;
    } else if (def.in_support(prop)) {
      auto theta = state_.theta;
      theta[p] = prop;
      State next = build(std::move(theta));
      if (next.valid) {
        const double ll_next = log_likelihood(next);
        const double log_ratio = ll_next - current_log_likelihood() + next.log_prior - state_.log_prior + log_q;
        alpha = std::isnan(log_ratio) ? 0.0 : std::min(1.0, std::exp(log_ratio));
        if (std::isfinite(ll_next) && std::log(uniform_open(rng_)) < log_ratio) {
          accept = true;
          state_ = std::move(next);
          ll_ = ll_next;
          ll_dirty_ = false;
        }
      }
    }
    if (accept) ++accept_count_[p];
    if (adapting && continuous_move) {
      log_step_[p] += (alpha - cfg_.target_accept) / std::pow(t + 1.0, 0.6);
      log_step_[p] = std::clamp(log_step_[p], -12.0, 3.0);
    }
    return accept;
  }

  void finish(std::chrono::steady_clock::time_point start) {
    trace_.runtime_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace_.final_step = steps();
    trace_.acceptance_rate.assign(params_.size(), 0.0);
    for (std::size_t p = 0; p < params_.size(); ++p)
      trace_.acceptance_rate[p] = propose_count_[p] > 0 ? static_cast<double>(accept_count_[p]) / propose_count_[p] : 0.0;
  }

  std::vector<std::vector<double>> data_;
  ModelTemplate tmpl_;
  std::vector<ParameterDef> params_;
  McmcConfig cfg_;
  Rng rng_;
  int k_ = 0;
  std::vector<std::vector<Block>> blocks_;
  State state_;
  double ll_ = 0.0;
  bool ll_dirty_ = true;
  std::vector<double> log_step_;
  std::vector<long> accept_count_;
  std::vector<long> propose_count_;
  std::vector<double> scratch_;
  Trace trace_;
};

/// Convenience wrapper: builds and runs a chain with the template's default parameters.
inline Trace run_chain(const std::vector<std::vector<double>>& data, const ModelTemplate& tmpl, const McmcConfig& cfg,
                       std::uint64_t seed) {
  Chain chain(data, tmpl, tmpl.parameters(), cfg, seed);
  return chain.run();
}

}  // namespace maxbayes::inference
