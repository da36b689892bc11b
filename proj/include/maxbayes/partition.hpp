#pragma once

// Set partitions of a finite ground set, stored as canonical lists of
// bitmask blocks. Element indices are 0-based in the C++ API; the text form
// "{1,3|2}" used in files and traces is 1-based.

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maxbayes/errors.hpp"

namespace maxbayes {

using Block = std::uint64_t;

inline constexpr int kMaxElements = 64;
inline constexpr int kMaxEnumeration = 12;

constexpr Block bit(int i) noexcept { return Block{1} << i; }
constexpr int block_size(Block b) noexcept { return std::popcount(b); }
constexpr int lowest(Block b) noexcept { return std::countr_zero(b); }

/// Calls f(i) for every element of the block in ascending order.
template <class F>
void for_each_element(Block b, F&& f) {
  while (b != 0) {
    f(std::countr_zero(b));
    b &= b - 1;
  }
}

inline std::vector<int> elements(Block b) {
  std::vector<int> out;
  out.reserve(block_size(b));
  for_each_element(b, [&](int i) { out.push_back(i); });
  return out;
}

class Partition {
 public:
  Partition() = default;

  /// Validates disjointness and coverage of `universe`, then canonicalizes.
  Partition(Block universe, std::vector<Block> blocks) : universe_(universe), blocks_(std::move(blocks)) {
    Block seen = 0;
    for (Block b : blocks_) {
      if (b == 0) throw DomainError("partition: empty block");
      if ((seen & b) != 0) throw DomainError("partition: blocks overlap");
      seen |= b;
    }
    if (seen != universe_) throw DomainError("partition: blocks do not cover the ground set");
    canonicalize();
  }

  static Partition singletons(int k) {
    check_size(k);
    std::vector<Block> blocks;
    for (int i = 0; i < k; ++i) blocks.push_back(bit(i));
    return Partition(full(k), std::move(blocks));
  }

  static Partition one_block(int k) {
    check_size(k);
    return Partition(full(k), {full(k)});
  }

  /// Blocks given as lists of 0-based element indices over {0, ..., k-1}.
  static Partition from_indices(int k, const std::vector<std::vector<int>>& blocks) {
    check_size(k);
    std::vector<Block> masks;
    for (const auto& blk : blocks) {
      Block m = 0;
      for (int i : blk) {
        if (i < 0 || i >= k) throw DomainError("partition: element index out of range");
        if ((m & bit(i)) != 0) throw DomainError("partition: repeated element");
        m |= bit(i);
      }
      masks.push_back(m);
    }
    return Partition(full(k), std::move(masks));
  }

  /// Parses "{1,3|2}" (1-based). The ground set is the union of the listed elements.
  static Partition parse(std::string_view text);

  static constexpr Block full(int k) noexcept { return k >= 64 ? ~Block{0} : bit(k) - 1; }

  Block universe() const noexcept { return universe_; }
  int size() const noexcept { return block_size(universe_); }
  int num_blocks() const noexcept { return static_cast<int>(blocks_.size()); }
  std::span<const Block> blocks() const noexcept { return blocks_; }
  Block block(int j) const { return blocks_.at(static_cast<std::size_t>(j)); }
  bool contains(int i) const noexcept { return i >= 0 && i < kMaxElements && (universe_ & bit(i)) != 0; }

  /// Position of the block that holds element i.
  int block_of(int i) const {
    for (std::size_t j = 0; j < blocks_.size(); ++j)
      if ((blocks_[j] & bit(i)) != 0) return static_cast<int>(j);
    throw DomainError("partition: element not in ground set");
  }

  /// Block label per element of the universe, in ascending element order.
  /// Canonical ordering makes this a restricted growth string.
  std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(size());
    for_each_element(universe_, [&](int i) { out.push_back(block_of(i)); });
    return out;
  }

  std::string to_string() const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.universe_ == b.universe_ && a.blocks_ == b.blocks_;
  }
  /// Lexicographic on restricted growth strings, which is the enumeration order.
  friend std::strong_ordering operator<=>(const Partition& a, const Partition& b) {
    if (auto c = a.universe_ <=> b.universe_; c != 0) return c;
    const auto la = a.labels();
    const auto lb = b.labels();
    return std::lexicographical_compare_three_way(la.begin(), la.end(), lb.begin(), lb.end());
  }

  std::size_t hash() const noexcept {
    std::size_t h = std::hash<Block>{}(universe_);
    for (Block b : blocks_) h ^= std::hash<Block>{}(b) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }

 private:
  static void check_size(int k) {
    if (k < 1 || k > kMaxElements) throw DomainError("partition: ground-set size must be in [1, 64]");
  }

  void canonicalize() {
    std::sort(blocks_.begin(), blocks_.end(), [](Block x, Block y) { return lowest(x) < lowest(y); });
  }

  Block universe_ = 0;
  std::vector<Block> blocks_;
};

struct PartitionHash {
  std::size_t operator()(const Partition& p) const noexcept { return p.hash(); }
};

inline std::string Partition::to_string() const {
  std::string out = "{";
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    if (j > 0) out += '|';
    bool first = true;
    for_each_element(blocks_[j], [&](int i) {
      if (!first) out += ',';
      out += std::to_string(i + 1);
      first = false;
    });
  }
  out += '}';
  return out;
}

inline Partition Partition::parse(std::string_view text) {
  if (text.size() < 2 || text.front() != '{' || text.back() != '}')
    throw DomainError("partition: expected text of the form {1,2|3}");
  text = text.substr(1, text.size() - 2);
  std::vector<Block> blocks;
  Block universe = 0;
  Block current = 0;
  int value = -1;
  auto flush_value = [&] {
    if (value < 1 || value > kMaxElements) throw DomainError("partition: bad element in text form");
    const Block m = bit(value - 1);
    if ((universe & m) != 0) throw DomainError("partition: repeated element in text form");
    universe |= m;
    current |= m;
    value = -1;
  };
  for (char c : text) {
    if (c >= '0' && c <= '9') {
      value = (value < 0 ? 0 : value * 10) + (c - '0');
    } else if (c == ',') {
      flush_value();
    } else if (c == '|') {
      flush_value();
      blocks.push_back(current);
      current = 0;
    } else if (c != ' ') {
      throw DomainError("partition: unexpected character in text form");
    }
  }
  flush_value();
  blocks.push_back(current);
  return Partition(universe, std::move(blocks));
}

/// Bell numbers B_0..B_n via the Bell triangle.
inline std::vector<std::uint64_t> bell_numbers(int n) {
  std::vector<std::uint64_t> bell{1};
  std::vector<std::uint64_t> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t x : row) next.push_back(next.back() + x);
    row = std::move(next);
    bell.push_back(row.front());
  }
  return bell;
}

/// All partitions of {0, ..., k-1} in restricted-growth-string order.
inline std::vector<Partition> enumerate_all(int k) {
  if (k < 1 || k > kMaxEnumeration)
    throw EnumerationLimitError("enumerate_all: k must lie in [1, 12]");
  std::vector<Partition> out;
  out.reserve(bell_numbers(k).back());
  std::vector<int> rgs(static_cast<std::size_t>(k), 0);
  std::vector<int> prefix_max(static_cast<std::size_t>(k), 0);
  while (true) {
    std::vector<Block> blocks(static_cast<std::size_t>(prefix_max.back() + 1), 0);
    for (int i = 0; i < k; ++i) blocks[static_cast<std::size_t>(rgs[i])] |= bit(i);
    out.emplace_back(Partition::full(k), std::move(blocks));
    // Increment the rightmost position that can grow; reset the tail.
    int pos = k - 1;
    while (pos > 0 && rgs[pos] > prefix_max[pos - 1]) --pos;
    if (pos == 0) break;
    ++rgs[pos];
    prefix_max[pos] = std::max(prefix_max[pos - 1], rgs[pos]);
    for (int j = pos + 1; j < k; ++j) {
      rgs[j] = 0;
      prefix_max[j] = prefix_max[pos];
    }
  }
  return out;
}

/// Drops element i; an emptied block disappears. Indices are not renumbered.
inline Partition restriction(const Partition& p, int i) {
  if (!p.contains(i)) throw DomainError("restriction: index out of range");
  std::vector<Block> blocks;
  for (Block b : p.blocks()) {
    const Block r = b & ~bit(i);
    if (r != 0) blocks.push_back(r);
  }
  return Partition(p.universe() & ~bit(i), std::move(blocks));
}

/// Every q with restriction(q, i) == restriction(p, i); p itself comes first,
/// followed by i joined to each block of the restriction, then i as a singleton.
inline std::vector<Partition> gibbs_neighborhood(const Partition& p, int i) {
  if (!p.contains(i)) throw DomainError("gibbs_neighborhood: index out of range");
  const Partition rest = restriction(p, i);
  std::vector<Partition> out{p};
  const auto base = rest.blocks();
  for (std::size_t j = 0; j <= base.size(); ++j) {
    std::vector<Block> blocks(base.begin(), base.end());
    if (j < base.size())
      blocks[j] |= bit(i);
    else
      blocks.push_back(bit(i));
    Partition q(p.universe(), std::move(blocks));
    if (!(q == p)) out.push_back(std::move(q));
  }
  return out;
}

}  // namespace maxbayes
