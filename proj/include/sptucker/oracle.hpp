#pragma once

// Brute-force dense references for every contraction the fast kernels
// replace. Test-facing only; hard size caps keep it off large inputs.
//
// Linearization follows the mode-1-fastest convention throughout: a tensor
// entry (i_1..i_N) lives at sum_k i_k prod_{m<k} I_m, the mode-n
// matricization column is the same sum with mode n skipped, and the mode-n
// vectorization puts i_n fastest, then that column. kron_vec(x_N, ..., x_1)
// indexes the same way, with its last argument fastest.

#include <cstddef>
#include <span>
#include <vector>

#include "sptucker/kernels.hpp"
#include "sptucker/matrix.hpp"
#include "sptucker/model.hpp"
#include "sptucker/sparse_tensor.hpp"

namespace sptucker::oracle {

inline constexpr std::size_t kMaxDense = 10'000'000;
inline constexpr std::size_t kMaxCore = 1'000'000;

class DenseTensor {
 public:
  // Zero tensor; throws Error when prod dims > kMaxDense.
  explicit DenseTensor(std::vector<std::size_t> dims);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::size_t linear_index(std::span<const std::size_t> index) const;
  double& at(std::span<const std::size_t> index) { return values_[linear_index(index)]; }
  double at(std::span<const std::size_t> index) const { return values_[linear_index(index)]; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> values_;
};

// x_0 (x) x_1 (x) ... with the last vector varying fastest. Throws Error when
// the result would exceed kMaxDense.
std::vector<double> kron_vec(std::span<const std::vector<double>> vectors, OpCounter* counter = nullptr);
// Matrix Kronecker product, same ordering.
Matrix kron_mat(std::span<const Matrix> matrices);

// Mode-n matricization (I_n x prod_{k != n} I_k) and its inverse.
Matrix matricize(const DenseTensor& tensor, std::size_t n);
DenseTensor fold(const Matrix& matrix, const std::vector<std::size_t>& dims, std::size_t n);
// Mode-n column vectorization: entry (i_n, j) of the matricization at j I_n + i_n.
std::vector<double> vectorize(const DenseTensor& tensor, std::size_t n);

// sum_r b^(1)_{:,r} o ... o b^(N)_{:,r}. Throws Error when prod J_n > kMaxCore.
DenseTensor dense_core_from_kruskal(const TuckerModel& model);
// B^(n) (B^(N) kr ... kr B^(n+1) kr B^(n-1) kr ... kr B^(1))^T, built from
// explicit Kronecker products of core columns.
Matrix dense_core_matricized(const TuckerModel& model, std::size_t n, OpCounter* counter = nullptr);

// a^(N)_{i_N} (x) ... (x) a^(1)_{i_1}, mode n skipped.
std::vector<double> s_row(const TuckerModel& model, std::span<const std::size_t> index, std::size_t n,
                          OpCounter* counter = nullptr);
// s_row (x) a^(n)_{i_n}: mode n rightmost, matching the mode-n vectorization.
std::vector<double> h_row(const TuckerModel& model, std::span<const std::size_t> index, std::size_t n);

// core x_1 A^(1) x_2 ... x_N A^(N), applied mode by mode. Throws Error when
// prod I_n > kMaxDense.
DenseTensor dense_reconstruct(const TuckerModel& model, const DenseTensor& core);

// Single-sample factor gradient from the dense D = G^(n) s_row^T. The counter
// includes building G^(n) from the core factors.
std::vector<double> dense_factor_gradient(const TuckerModel& model, std::span<const std::size_t> index, double x,
                                          std::size_t n, double lambda_a, OpCounter* counter = nullptr);

// Core gradient for b^(n)_{:,r} over `entry_ids` of `data`, averaged over the
// batch, with each Q built from explicit Kronecker products:
//   (1/|batch|) sum [ -x Q_r + InterMX_r Q_r + sum_{r' != r} InterMX_{r'} Q_r ] + lambda_b b_r
std::vector<double> dense_core_gradient(const TuckerModel& model, const SparseTensor& data,
                                        std::span<const std::size_t> entry_ids, std::size_t n, std::size_t r,
                                        double lambda_b);

}  // namespace sptucker::oracle
