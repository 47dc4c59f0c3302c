#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sptucker/kernels.hpp"
#include "sptucker/matrix.hpp"
#include "sptucker/model.hpp"

namespace sptucker {

// Sum over samples of (xhat - x) Q^(n),r for every (n, r). Stored per mode as
// an R_core x J_n matrix, row r matching model.core_column(n, r).
class CoreGradientAccumulator {
 public:
  CoreGradientAccumulator() = default;
  explicit CoreGradientAccumulator(const TuckerModel& model);

  std::size_t order() const { return grads_.size(); }
  std::size_t sample_count() const { return sample_count_; }
  void add_samples(std::size_t n) { sample_count_ += n; }

  std::span<double> column(std::size_t n, std::size_t r) { return grads_[n].row(r); }
  std::span<const double> column(std::size_t n, std::size_t r) const { return grads_[n].row(r); }
  const Matrix& mode(std::size_t n) const { return grads_[n]; }

  bool same_shape(const CoreGradientAccumulator& other) const;
  // Throws Error on shape mismatch.
  void merge_from(const CoreGradientAccumulator& other);

  bool operator==(const CoreGradientAccumulator&) const = default;

 private:
  std::vector<Matrix> grads_;
  std::size_t sample_count_ = 0;
};

CoreGradientAccumulator merge_accumulators(const CoreGradientAccumulator& a, const CoreGradientAccumulator& b);

// Adds one sample's data term. Reads the model only.
void core_accumulate(const TuckerModel& model, std::span<const std::size_t> index, double x,
                     CoreGradientAccumulator& acc, Workspace& ws);

enum class CoreReduction { Mean, Sum };

struct CoreSlot {
  std::size_t mode = 0;
  std::size_t rank = 0;
};

// b^(n)_{:,r} <- b^(n)_{:,r} - gamma_b (acc[n][r] / count + lambda_b b^(n)_{:,r})
// (no division under CoreReduction::Sum). Each column's step reads only its
// own pre-update value and the accumulator, so all columns move together.
// Throws Error on an empty accumulator or shape mismatch.
void core_apply(TuckerModel& model, const CoreGradientAccumulator& acc, double gamma_b, double lambda_b,
                CoreReduction reduction = CoreReduction::Mean);

// Same, visiting the columns in `order`, which must list every (n, r) once.
void core_apply(TuckerModel& model, const CoreGradientAccumulator& acc, double gamma_b, double lambda_b,
                CoreReduction reduction, std::span<const CoreSlot> order);

}  // namespace sptucker
