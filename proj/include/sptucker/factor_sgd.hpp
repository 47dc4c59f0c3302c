#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sptucker/kernels.hpp"
#include "sptucker/model.hpp"
#include "sptucker/sparse_tensor.hpp"

namespace sptucker {

struct FactorGradient {
  std::size_t mode = 0;
  std::size_t row = 0;
  std::vector<double> g;
};

// Single-sample gradient for row a^(n)_{i_n}:
//   g = -x GS + lambda_a a + (a . GS) GS
// with GS = gs_vector(model, mode_dots(model, index), n).
FactorGradient factor_gradient(const TuckerModel& model, std::span<const std::size_t> index, double x,
                               std::size_t n, double lambda_a, Workspace& ws);

// w <- w - gamma g
void sgd_step(std::span<double> w, std::span<const double> g, double gamma);
std::vector<double> sgd_step(std::vector<double> w, std::span<const double> g, double gamma);

// Updates a^(n)_{i_n} for n = 0..N-1 in order from one observation. The
// cache is built once and only row n is refreshed after each mode's update.
void factor_update_sample(TuckerModel& model, std::span<const std::size_t> index, double x,
                          std::span<const double> gammas, std::span<const double> lambdas, Workspace& ws);

// factor_update_sample over `entry_ids` of `data`, in the given order. The
// caller guarantees no other thread writes the touched rows meanwhile.
void factor_epoch_shard(TuckerModel& model, const SparseTensor& data, std::span<const std::size_t> entry_ids,
                        std::span<const double> gammas, std::span<const double> lambdas, Workspace& ws);

}  // namespace sptucker
