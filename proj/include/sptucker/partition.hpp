#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "sptucker/sparse_tensor.hpp"

namespace sptucker {

// Per-mode part numbers of one block, each in [0, m).
using BlockId = std::vector<std::size_t>;

// Every mode cut into m contiguous slices; the entries bucketed into the m^N
// resulting blocks. Blocks are addressed linearly with mode 0 most significant.
class PartitionPlan {
 public:
  std::size_t order() const { return boundaries_.size(); }
  std::size_t parts() const { return m_; }
  std::size_t block_count() const { return block_entries_.size(); }

  // m + 1 cut points for mode n: 0 = first < ... < last = I_n.
  const std::vector<std::size_t>& boundaries(std::size_t n) const { return boundaries_[n]; }

  std::size_t part_of(std::size_t n, std::size_t i) const;
  BlockId block_of(std::span<const std::size_t> index) const;

  std::size_t linear_id(const BlockId& block) const;
  BlockId block_id(std::size_t linear) const;

  const std::vector<std::size_t>& entries(std::size_t linear) const { return block_entries_[linear]; }
  const std::vector<std::size_t>& entries(const BlockId& block) const { return block_entries_[linear_id(block)]; }

 private:
  friend PartitionPlan build_partition(const SparseTensor& tensor, std::size_t m);

  std::size_t m_ = 0;
  std::vector<std::vector<std::size_t>> boundaries_;
  std::vector<std::vector<std::size_t>> block_entries_;
};

// Cut points floor(k I_n / m). Throws Error if m == 0 or m > min_n I_n.
PartitionPlan build_partition(const SparseTensor& tensor, std::size_t m);

// rounds[t][w] is the block worker w processes in round t. In each round all
// assigned blocks differ in every mode, and every block appears exactly once
// over the m^(N-1) rounds.
struct RoundSchedule {
  std::size_t order = 0;
  std::size_t parts = 0;
  std::vector<std::vector<BlockId>> rounds;
};

// Round t uses offset vector d_t in {0..m-1}^(N-1) and gives worker w block
// (w, (w + d_1) mod m, ..., (w + d_{N-1}) mod m). The offsets follow the
// m-ary reflected Gray code, so consecutive rounds move one mode at a time;
// for N = 3, m = 2 the sequence is (0,0), (0,1), (1,1), (1,0).
RoundSchedule round_schedule(std::size_t order, std::size_t m);

void print_schedule(const RoundSchedule& schedule, std::ostream& out);

}  // namespace sptucker
