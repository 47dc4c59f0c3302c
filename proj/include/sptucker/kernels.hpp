#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sptucker/model.hpp"

namespace sptucker {

// Multiplication counter used to check cost scaling. Kernels add to it only
// when a non-null pointer is passed.
struct OpCounter {
  std::uint64_t mults = 0;
};

// Per-sample scalars c[n][r] = b^(n)_{:,r} . a^(n)_{i_n,:}. Every Kronecker
// contraction in the factor and core gradients collapses to products of these.
class ModeDotCache {
 public:
  ModeDotCache() = default;
  ModeDotCache(std::size_t order, std::size_t r_core) : order_(order), r_core_(r_core), c_(order * r_core, 0.0) {}

  std::size_t order() const { return order_; }
  std::size_t r_core() const { return r_core_; }

  double operator()(std::size_t n, std::size_t r) const { return c_[n * r_core_ + r]; }
  double& operator()(std::size_t n, std::size_t r) { return c_[n * r_core_ + r]; }
  std::span<const double> mode(std::size_t n) const { return {c_.data() + n * r_core_, r_core_}; }

  bool operator==(const ModeDotCache&) const = default;

 private:
  std::size_t order_ = 0;
  std::size_t r_core_ = 0;
  std::vector<double> c_;
};

// Per-worker scratch. Reused across samples; never aliases model storage.
struct Workspace {
  Workspace() = default;
  explicit Workspace(const TuckerModel& model, OpCounter* counter = nullptr);

  ModeDotCache cache;
  std::vector<double> gs;
  std::vector<double> grad;
  std::vector<double> off_products;
  OpCounter* counter = nullptr;
};

// Throws Error if the tuple length or any component is out of range.
void check_index(const TuckerModel& model, std::span<const std::size_t> index);

// Fills every row of the cache. Cost R_core * sum_n J_n multiplications.
void mode_dots(const TuckerModel& model, std::span<const std::size_t> index, ModeDotCache& cache,
               OpCounter* counter = nullptr);
ModeDotCache mode_dots(const TuckerModel& model, std::span<const std::size_t> index);

// Recomputes c[n][.] only, after row a^(n)_{i_n} changed.
void refresh_mode_dots(const TuckerModel& model, std::span<const std::size_t> index, std::size_t n,
                       ModeDotCache& cache, OpCounter* counter = nullptr);

// prod_{m != n} c[m][r]
double off_mode_product(const ModeDotCache& cache, std::size_t n, std::size_t r,
                        OpCounter* counter = nullptr);

// GS = sum_r (prod_{m != n} c[m][r]) b^(n)_{:,r}; the column of G^(n) S^(n)T
// for this sample. `out` must have length J_n.
void gs_vector(const TuckerModel& model, const ModeDotCache& cache, std::size_t n,
               std::span<double> out, OpCounter* counter = nullptr);
std::vector<double> gs_vector(const TuckerModel& model, const ModeDotCache& cache, std::size_t n);

// Q^(n),r = (prod_{m != n} c[m][r]) a^(n)_{i_n,:}.
void q_vector(const TuckerModel& model, std::span<const std::size_t> index, const ModeDotCache& cache,
              std::size_t n, std::size_t r, std::span<double> out, OpCounter* counter = nullptr);
std::vector<double> q_vector(const TuckerModel& model, std::span<const std::size_t> index,
                             const ModeDotCache& cache, std::size_t n, std::size_t r);

// sum_r prod_n c[n][r]
double predict(const ModeDotCache& cache, OpCounter* counter = nullptr);
double predict(const TuckerModel& model, std::span<const std::size_t> index);

// b^(n)_{:,r} . Q^(n),r; summed over r it equals predict for every n.
double intermx(const TuckerModel& model, std::span<const std::size_t> index, const ModeDotCache& cache,
               std::size_t n, std::size_t r);

}  // namespace sptucker
