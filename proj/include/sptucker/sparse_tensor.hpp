#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "sptucker/model.hpp"

namespace sptucker {

enum class IndexBase { Zero = 0, One = 1 };

// Coordinate-format sparse tensor. Entry e has index tuple index(e) and value
// value(e); duplicates are allowed and treated as independent observations.
class SparseTensor {
 public:
  SparseTensor() = default;
  // Empty tensor of the given shape. Requires order >= 2 and all dims >= 1.
  explicit SparseTensor(std::vector<std::size_t> dims);

  std::size_t order() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t nnz() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const std::size_t> index(std::size_t e) const {
    return {indices_.data() + e * order(), order()};
  }
  double value(std::size_t e) const { return values_[e]; }
  std::span<const double> values() const { return values_; }

  // Appends one entry; throws Error if the tuple length or any component is
  // out of range, or the value is not finite.
  void push_back(std::span<const std::size_t> index, double value);
  void reserve(std::size_t n);

  bool operator==(const SparseTensor&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

struct DatasetSplit {
  SparseTensor train;
  SparseTensor test;
};

// Whitespace-separated COO text: N integer indices then one value per line.
// Lines starting with '#' are comments, except an optional `# dims: I1 .. IN`
// header which fixes the shape. Otherwise dims are inferred as max index + 1.
// `dims` overrides both. Malformed content throws Error naming the line.
SparseTensor load_coo(const std::filesystem::path& path, IndexBase base = IndexBase::One,
                      std::optional<std::vector<std::size_t>> dims = std::nullopt);

// Writes the dims header and one line per entry, values at 17 significant
// digits, so load_coo with the same base reproduces the tensor exactly.
void write_coo(const SparseTensor& tensor, const std::filesystem::path& path,
               IndexBase base = IndexBase::One);

struct SyntheticConfig {
  std::vector<std::size_t> dims;
  std::size_t nnz = 0;
  std::vector<std::size_t> j_ranks;
  std::size_t r_core = 1;
  double noise_sigma = 0.0;
  double init_scale_factor = 1.0;
  bool signed_truth = false;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  SparseTensor tensor;
  TuckerModel truth;
};

// Draws a ground-truth model with init_model and nnz distinct uniformly drawn
// indices, valued by the model's prediction plus N(0, noise_sigma) noise.
SyntheticData generate_synthetic(const SyntheticConfig& config);

// Seeded uniform sample of round(test_fraction * nnz) entries goes to test;
// both halves keep the source order.
DatasetSplit split(const SparseTensor& tensor, double test_fraction, std::uint64_t seed);

}  // namespace sptucker
