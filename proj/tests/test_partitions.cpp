#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "maxbayes/partition.hpp"

using namespace maxbayes;

namespace {

// B_{n+1} = sum_i C(n, i) B_i.
std::vector<std::uint64_t> bell_by_binomials(int n) {
  std::vector<std::uint64_t> b{1};
  for (int m = 0; m < n; ++m) {
    std::uint64_t next = 0, c = 1;
    for (int i = 0; i <= m; ++i) {
      next += c * b[static_cast<std::size_t>(i)];
      c = c * static_cast<std::uint64_t>(m - i) / static_cast<std::uint64_t>(i + 1);
    }
    b.push_back(next);
  }
  return b;
}

}  // namespace

TEST(Partition, CanonicalFormIgnoresInputOrder) {
  const auto a = Partition::from_indices(4, {{3, 1}, {0}, {2}});
  const auto b = Partition::from_indices(4, {{2}, {1, 3}, {0}});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.to_string(), "{1|2,4|3}");
  EXPECT_EQ(Partition::parse(a.to_string()), a);
  EXPECT_EQ(Partition(a.universe(), {a.blocks().begin(), a.blocks().end()}), a);
}

TEST(Partition, RejectsInvalidInput) {
  EXPECT_THROW(Partition::from_indices(3, {{0, 1}, {1, 2}}), DomainError);
  EXPECT_THROW(Partition::from_indices(3, {{0, 1}}), DomainError);
  EXPECT_THROW(Partition::from_indices(3, {{0, 1, 5}}), DomainError);
  EXPECT_THROW(Partition::parse("{1,2"), DomainError);
  EXPECT_THROW(Partition::parse("{1,1|2}"), DomainError);
}

TEST(Partition, EnumerationSizesFollowBellRecurrence) {
  const auto bell = bell_by_binomials(9);
  for (int k = 1; k <= 8; ++k) EXPECT_EQ(enumerate_all(k).size(), bell[static_cast<std::size_t>(k)]) << k;
  EXPECT_EQ(enumerate_all(1).front(), Partition::one_block(1));
  EXPECT_EQ(enumerate_all(3).size(), 5u);
  EXPECT_EQ(enumerate_all(5).size(), 52u);
  EXPECT_EQ(bell_numbers(12).back(), 4213597u);
}

TEST(Partition, EnumerationIsSortedAndDistinct) {
  const auto all = enumerate_all(6);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
  EXPECT_EQ(all.front(), Partition::one_block(6));
  EXPECT_EQ(all.back(), Partition::singletons(6));
}

TEST(Partition, EnumerationGuard) {
  EXPECT_THROW(enumerate_all(0), EnumerationLimitError);
  EXPECT_THROW(enumerate_all(13), EnumerationLimitError);
}

TEST(Partition, RestrictionExamples) {
  EXPECT_EQ(restriction(Partition::parse("{1,2|3}"), 0).to_string(), "{2|3}");
  EXPECT_EQ(restriction(Partition::parse("{1|2}"), 0).to_string(), "{2}");
  EXPECT_THROW(restriction(Partition::parse("{1|2}"), 2), DomainError);
}

TEST(Partition, NeighborhoodExamples) {
  auto n1 = gibbs_neighborhood(Partition::parse("{1,2|3}"), 2);
  ASSERT_EQ(n1.size(), 2u);
  EXPECT_EQ(n1[0].to_string(), "{1,2|3}");
  EXPECT_EQ(n1[1].to_string(), "{1,2,3}");
  auto n2 = gibbs_neighborhood(Partition::parse("{1,2,3}"), 1);
  ASSERT_EQ(n2.size(), 2u);
  EXPECT_EQ(n2[0].to_string(), "{1,2,3}");
  EXPECT_EQ(n2[1].to_string(), "{1,3|2}");
}

TEST(Partition, NeighborhoodMatchesBruteForceFilter) {
  for (int k = 1; k <= 5; ++k) {
    const auto all = enumerate_all(k);
    for (const auto& p : all) {
      for (int i = 0; i < k; ++i) {
        const auto nb = gibbs_neighborhood(p, i);
        const std::set<Partition> got(nb.begin(), nb.end());
        EXPECT_EQ(got.size(), nb.size());
        EXPECT_EQ(nb.front(), p);
        std::set<Partition> want;
        if (k > 1) {
          const auto rp = restriction(p, i);
          for (const auto& q : all)
            if (restriction(q, i) == rp) want.insert(q);
        } else {
          want.insert(p);
        }
        EXPECT_EQ(got, want);
        const bool singleton = p.block(p.block_of(i)) == bit(i);
        EXPECT_EQ(static_cast<int>(nb.size()), singleton ? p.num_blocks() : p.num_blocks() + 1);
      }
    }
  }
}

TEST(Partition, LabelsAreRestrictedGrowthStrings) {
  for (const auto& p : enumerate_all(5)) {
    const auto l = p.labels();
    int top = -1;
    for (int x : l) {
      EXPECT_LE(x, top + 1);
      top = std::max(top, x);
    }
    EXPECT_EQ(top + 1, p.num_blocks());
  }
}
