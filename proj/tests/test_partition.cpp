#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "sptucker/error.hpp"
#include "sptucker/partition.hpp"
#include "sptucker/sparse_tensor.hpp"
#include "test_util.hpp"

using namespace sptucker;

namespace {

SparseTensor dense_grid(const std::vector<std::size_t>& dims) {
  SparseTensor t(dims);
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  std::vector<std::size_t> idx(dims.size());
  for (std::size_t l = 0; l < total; ++l) {
    std::size_t v = l;
    for (std::size_t n = 0; n < dims.size(); ++n) {
      idx[n] = v % dims[n];
      v /= dims[n];
    }
    t.push_back(idx, static_cast<double>(l));
  }
  return t;
}

void check_schedule(const RoundSchedule& s, std::size_t order, std::size_t m) {
  std::size_t expected_rounds = 1;
  for (std::size_t k = 1; k < order; ++k) expected_rounds *= m;
  ASSERT_EQ(s.rounds.size(), expected_rounds);
  std::set<BlockId> all;
  for (const auto& round : s.rounds) {
    ASSERT_EQ(round.size(), m);
    for (std::size_t n = 0; n < order; ++n) {
      std::set<std::size_t> parts;
      for (const auto& block : round) {
        ASSERT_EQ(block.size(), order);
        ASSERT_LT(block[n], m);
        parts.insert(block[n]);
      }
      ASSERT_EQ(parts.size(), m) << "two workers share a slice of mode " << n;
    }
    for (const auto& block : round) ASSERT_TRUE(all.insert(block).second) << "block scheduled twice";
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < order; ++k) total *= m;
  ASSERT_EQ(all.size(), total);
}

}  // namespace

TEST(BuildPartition, EvenDivision) {
  const PartitionPlan p = build_partition(dense_grid({10, 10, 10}), 2);
  for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(p.boundaries(n), (std::vector<std::size_t>{0, 5, 10}));
  EXPECT_EQ(p.block_count(), 8u);
  for (std::size_t b = 0; b < 8; ++b) EXPECT_EQ(p.entries(b).size(), 125u);
}

TEST(BuildPartition, FloorCutPoints) {
  const PartitionPlan p = build_partition(dense_grid({5, 5, 5}), 2);
  for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(p.boundaries(n), (std::vector<std::size_t>{0, 2, 5}));
  EXPECT_EQ(p.part_of(0, 1), 0u);
  EXPECT_EQ(p.part_of(0, 2), 1u);
  EXPECT_EQ(p.part_of(0, 4), 1u);
}

TEST(BuildPartition, SinglePartHoldsEverything) {
  const SparseTensor t = dense_grid({3, 4, 2});
  const PartitionPlan p = build_partition(t, 1);
  EXPECT_EQ(p.block_count(), 1u);
  EXPECT_EQ(p.entries(0).size(), t.nnz());
  for (std::size_t e = 0; e < t.nnz(); ++e) EXPECT_EQ(p.entries(0)[e], e);
}

TEST(BuildPartition, Errors) {
  const SparseTensor t = dense_grid({3, 4});
  EXPECT_THROW(build_partition(t, 0), Error);
  EXPECT_THROW(build_partition(t, 4), Error);
  EXPECT_NO_THROW(build_partition(t, 3));
}

TEST(BuildPartition, LinearIdsMode0MostSignificant) {
  const PartitionPlan p = build_partition(dense_grid({4, 4, 4}), 2);
  EXPECT_EQ(p.linear_id({0, 0, 1}), 1u);
  EXPECT_EQ(p.linear_id({1, 0, 0}), 4u);
  for (std::size_t l = 0; l < 8; ++l) EXPECT_EQ(p.linear_id(p.block_id(l)), l);
  EXPECT_THROW(p.linear_id({0, 2, 0}), Error);
  EXPECT_THROW(p.linear_id({0, 0}), Error);
}

TEST(BuildPartition, CompletenessAndBucketing) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t order = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
    std::vector<std::size_t> dims(order);
    for (auto& d : dims) d = std::uniform_int_distribution<std::size_t>(4, 9)(rng);
    SparseTensor t(dims);
    for (int k = 0; k < 200; ++k) t.push_back(sptucker::testing::random_index(dims, rng), 1.0);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const PartitionPlan p = build_partition(t, m);
    for (std::size_t n = 0; n < order; ++n) {
      const auto& b = p.boundaries(n);
      ASSERT_EQ(b.size(), m + 1);
      ASSERT_EQ(b.front(), 0u);
      ASSERT_EQ(b.back(), dims[n]);
      for (std::size_t k = 1; k < b.size(); ++k) ASSERT_LT(b[k - 1], b[k]);
    }
    std::vector<int> hits(t.nnz(), 0);
    for (std::size_t l = 0; l < p.block_count(); ++l) {
      for (const auto e : p.entries(l)) {
        ++hits[e];
        ASSERT_EQ(p.block_of(t.index(e)), p.block_id(l));
      }
    }
    for (int h : hits) ASSERT_EQ(h, 1);
  }
}

TEST(RoundSchedule, MatchesTwoWorkerThreeModeFigure) {
  const RoundSchedule s = round_schedule(3, 2);
  ASSERT_EQ(s.rounds.size(), 4u);
  const std::vector<BlockId> worker0{{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {0, 1, 0}};
  const std::vector<BlockId> worker1{{1, 1, 1}, {1, 1, 0}, {1, 0, 0}, {1, 0, 1}};
  for (std::size_t t = 0; t < 4; ++t) {
    ASSERT_EQ(s.rounds[t].size(), 2u);
    EXPECT_EQ(s.rounds[t][0], worker0[t]) << "round " << t;
    EXPECT_EQ(s.rounds[t][1], worker1[t]) << "round " << t;
  }
}

TEST(RoundSchedule, SingleWorker) {
  const RoundSchedule s = round_schedule(4, 1);
  ASSERT_EQ(s.rounds.size(), 1u);
  ASSERT_EQ(s.rounds[0].size(), 1u);
  EXPECT_EQ(s.rounds[0][0], (BlockId{0, 0, 0, 0}));
}

TEST(RoundSchedule, TwoModesThreeParts) {
  const RoundSchedule s = round_schedule(2, 3);
  ASSERT_EQ(s.rounds.size(), 3u);
  check_schedule(s, 2, 3);
  for (const auto& round : s.rounds) {
    // Permutation of the 3x3 grid: one block per row and per column.
    std::set<std::size_t> rows;
    std::set<std::size_t> cols;
    for (const auto& b : round) {
      rows.insert(b[0]);
      cols.insert(b[1]);
    }
    EXPECT_EQ(rows.size(), 3u);
    EXPECT_EQ(cols.size(), 3u);
  }
}

TEST(RoundSchedule, ExhaustiveConflictFreedomAndCoverage) {
  for (std::size_t order = 2; order <= 5; ++order) {
    for (std::size_t m = 1; m <= 4; ++m) check_schedule(round_schedule(order, m), order, m);
  }
}

TEST(RoundSchedule, ConsecutiveRoundsChangeOneOffset) {
  for (std::size_t order = 2; order <= 4; ++order) {
    for (std::size_t m = 2; m <= 4; ++m) {
      const RoundSchedule s = round_schedule(order, m);
      for (std::size_t t = 1; t < s.rounds.size(); ++t) {
        std::size_t changed = 0;
        for (std::size_t n = 1; n < order; ++n) changed += s.rounds[t][0][n] != s.rounds[t - 1][0][n];
        EXPECT_EQ(changed, 1u);
      }
    }
  }
}

TEST(RoundSchedule, Errors) {
  EXPECT_THROW(round_schedule(1, 2), Error);
  EXPECT_THROW(round_schedule(3, 0), Error);
}

TEST(RoundSchedule, PrintFormat) {
  std::ostringstream out;
  print_schedule(round_schedule(3, 2), out);
  const std::string text = out.str();
  EXPECT_NE(text.find("# order 3 parts 2 rounds 4"), std::string::npos) << text;
  EXPECT_NE(text.find("round 0: worker 0 -> (0,0,0) worker 1 -> (1,1,1)"), std::string::npos) << text;
  EXPECT_NE(text.find("round 3: worker 0 -> (0,1,0) worker 1 -> (1,0,1)"), std::string::npos) << text;
}
