#include "sptucker/partition.hpp"

#include <algorithm>
#include <string>

#include "sptucker/error.hpp"

namespace sptucker {

std::size_t PartitionPlan::part_of(std::size_t n, std::size_t i) const {
  const auto& cuts = boundaries_[n];
  // cuts[k] <= i < cuts[k+1]
  return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), i) - cuts.begin()) - 1;
}

BlockId PartitionPlan::block_of(std::span<const std::size_t> index) const {
  BlockId block(order());
  for (std::size_t n = 0; n < order(); ++n) block[n] = part_of(n, index[n]);
  return block;
}

std::size_t PartitionPlan::linear_id(const BlockId& block) const {
  if (block.size() != order()) throw Error("block id has wrong length");
  std::size_t id = 0;
  for (std::size_t n = 0; n < order(); ++n) {
    if (block[n] >= m_) throw Error("block component out of range");
    id = id * m_ + block[n];
  }
  return id;
}

BlockId PartitionPlan::block_id(std::size_t linear) const {
  BlockId block(order());
  for (std::size_t n = order(); n-- > 0;) {
    block[n] = linear % m_;
    linear /= m_;
  }
  return block;
}

PartitionPlan build_partition(const SparseTensor& tensor, std::size_t m) {
  if (m == 0) throw Error("partition needs at least one part per mode");
  const auto& dims = tensor.dims();
  for (std::size_t n = 0; n < dims.size(); ++n) {
    if (m > dims[n]) {
      throw Error("cannot cut mode " + std::to_string(n) + " (dim " + std::to_string(dims[n]) + ") into " +
                  std::to_string(m) + " parts");
    }
  }
  PartitionPlan plan;
  plan.m_ = m;
  for (const std::size_t dim : dims) {
    std::vector<std::size_t> cuts(m + 1);
    for (std::size_t k = 0; k <= m; ++k) cuts[k] = k * dim / m;
    plan.boundaries_.push_back(std::move(cuts));
  }
  std::size_t blocks = 1;
  for (std::size_t n = 0; n < dims.size(); ++n) blocks *= m;
  plan.block_entries_.resize(blocks);
  for (std::size_t e = 0; e < tensor.nnz(); ++e) {
    plan.block_entries_[plan.linear_id(plan.block_of(tensor.index(e)))].push_back(e);
  }
  return plan;
}

namespace {

// Digits of the t-th word of the m-ary reflected Gray code, most significant
// first. A digit runs backwards when the Gray digits above it sum to an odd
// number.
std::vector<std::size_t> reflected_gray(std::size_t t, std::size_t digits, std::size_t m) {
  std::vector<std::size_t> plain(digits);
  for (std::size_t k = digits; k-- > 0;) {
    plain[k] = t % m;
    t /= m;
  }
  std::vector<std::size_t> gray(digits);
  std::size_t prefix = 0;
  for (std::size_t k = 0; k < digits; ++k) {
    gray[k] = (prefix % 2 == 0) ? plain[k] : m - 1 - plain[k];
    prefix += gray[k];
  }
  return gray;
}

}  // namespace

RoundSchedule round_schedule(std::size_t order, std::size_t m) {
  if (order < 2) throw Error("schedule needs order >= 2");
  if (m == 0) throw Error("schedule needs at least one part");
  RoundSchedule schedule{order, m, {}};
  std::size_t rounds = 1;
  for (std::size_t k = 1; k < order; ++k) rounds *= m;
  schedule.rounds.reserve(rounds);
  for (std::size_t t = 0; t < rounds; ++t) {
    const auto offsets = reflected_gray(t, order - 1, m);
    std::vector<BlockId> round;
    round.reserve(m);
    for (std::size_t w = 0; w < m; ++w) {
      BlockId block(order);
      block[0] = w;
      for (std::size_t k = 1; k < order; ++k) block[k] = (w + offsets[k - 1]) % m;
      round.push_back(std::move(block));
    }
    schedule.rounds.push_back(std::move(round));
  }
  return schedule;
}

void print_schedule(const RoundSchedule& schedule, std::ostream& out) {
  out << "# order " << schedule.order << " parts " << schedule.parts << " rounds " << schedule.rounds.size()
      << '\n';
  for (std::size_t t = 0; t < schedule.rounds.size(); ++t) {
    out << "round " << t << ':';
    for (std::size_t w = 0; w < schedule.rounds[t].size(); ++w) {
      out << " worker " << w << " -> (";
      const auto& block = schedule.rounds[t][w];
      for (std::size_t n = 0; n < block.size(); ++n) out << (n ? "," : "") << block[n];
      out << ')';
    }
    out << '\n';
  }
}

}  // namespace sptucker
