#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "maxbayes/errors.hpp"
#include "maxbayes/models/model.hpp"
#include "maxbayes/partition.hpp"
#include "maxbayes/rng.hpp"

namespace maxbayes::inference {

/// Draws an index with probability proportional to exp(log_w[j]).
inline std::size_t sample_log_categorical(std::span<const double> log_w, Rng& rng) {
  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(top)) throw NumericError("gibbs: no candidate has finite weight", 0.0);
  double total = 0.0;
  for (double w : log_w) total += std::exp(w - top);
  double u = uniform_open(rng) * total;
  for (std::size_t j = 0; j < log_w.size(); ++j) {
    u -= std::exp(log_w[j] - top);
    if (u <= 0.0) return j;
  }
  return log_w.size() - 1;
}

/// Exact conditional of element i's placement given the rest, on gibbs_neighborhood(p, i).
struct GibbsConditional {
  std::vector<Partition> candidates;
  std::vector<double> probabilities;
};

/// Each candidate differs from the restriction only in the block receiving i, so
/// its weight relative to the restriction is w(B + i) / w(B), or w({i}) for a new block.
template <class LogWeight>
GibbsConditional gibbs_conditional(const Partition& p, int i, LogWeight&& log_w) {
  GibbsConditional out;
  out.candidates = gibbs_neighborhood(p, i);
  std::vector<double> scores;
  for (const auto& q : out.candidates) {
    const Block b = q.block(q.block_of(i));
    const Block rest = b & ~bit(i);
    scores.push_back(log_w(b) - (rest == 0 ? 0.0 : log_w(rest)));
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(top)) throw NumericError("gibbs: no candidate has finite weight", 0.0);
  double total = 0.0;
  for (double s : scores) total += std::exp(s - top);
  for (double s : scores) out.probabilities.push_back(std::exp(s - top) / total);
  return out;
}

/// u is the observation on the unit-Frechet scale.
inline GibbsConditional gibbs_conditional(const Partition& p, int i, const models::ModelSpec& spec, std::span<const double> u) {
  return gibbs_conditional(p, i, [&](Block b) { return spec.log_weight(b, u); });
}

inline Partition gibbs_partition_step(const Partition& p, int i, const models::ModelSpec& spec, std::span<const double> u, Rng& rng) {
  auto c = gibbs_conditional(p, i, spec, u);
  std::vector<double> logs;
  for (double pr : c.probabilities) logs.push_back(std::log(pr));
  return c.candidates[sample_log_categorical(logs, rng)];
}

/// In-place update on an unordered block list: removes i, then places it by the exact conditional.
/// `join_score(B)` must return log w(B + i) - log w(B); `alone` is log w({i}).
template <class JoinScore>
void gibbs_update_blocks(std::vector<Block>& blocks, int i, JoinScore&& join_score, double alone, Rng& rng,
                         std::vector<double>& scratch) {
  const Block m = bit(i);
  const auto it = std::find_if(blocks.begin(), blocks.end(), [m](Block b) { return (b & m) != 0; });
  if (it == blocks.end()) throw DomainError("gibbs: element not in partition");
  *it &= ~m;
  if (*it == 0) {
    *it = blocks.back();
    blocks.pop_back();
  }
  scratch.clear();
  for (Block b : blocks) scratch.push_back(join_score(b));
  scratch.push_back(alone);
  const std::size_t pick = sample_log_categorical(scratch, rng);
  if (pick == blocks.size())
    blocks.push_back(m);
  else
    blocks[pick] |= m;
}

}  // namespace maxbayes::inference
