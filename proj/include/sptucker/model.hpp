#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sptucker/matrix.hpp"

namespace sptucker {

struct ModelConfig {
  std::vector<std::size_t> j_ranks;
  std::size_t r_core = 1;
  double init_scale_factor = 1.0;
  std::uint64_t seed = 0;
  // Draw from U(-s, s) instead of U(0, s).
  bool signed_init = false;
};

// Tucker model whose core is held in Kruskal form:
//   G = sum_r b^(1)_{:,r} o ... o b^(N)_{:,r}
// Factor A^(n) is I_n x J_n, row-major. Core factor B^(n) is logically
// J_n x R_core but stored transposed (R_core x J_n) so column r is contiguous.
class TuckerModel {
 public:
  TuckerModel() = default;
  // All-zero model. Throws Error on empty/zero dims or ranks, or rank count
  // not matching the order.
  TuckerModel(std::vector<std::size_t> dims, std::vector<std::size_t> j_ranks, std::size_t r_core);

  std::size_t order() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<std::size_t>& j_ranks() const { return j_ranks_; }
  std::size_t r_core() const { return r_core_; }
  std::size_t max_rank() const;

  Matrix& factor(std::size_t n) { return factors_[n]; }
  const Matrix& factor(std::size_t n) const { return factors_[n]; }

  // Row i of A^(n).
  std::span<double> factor_row(std::size_t n, std::size_t i) { return factors_[n].row(i); }
  std::span<const double> factor_row(std::size_t n, std::size_t i) const { return factors_[n].row(i); }

  // Transposed B^(n): row r is b^(n)_{:,r}.
  Matrix& core_factor_t(std::size_t n) { return core_factors_t_[n]; }
  const Matrix& core_factor_t(std::size_t n) const { return core_factors_t_[n]; }

  std::span<double> core_column(std::size_t n, std::size_t r) { return core_factors_t_[n].row(r); }
  std::span<const double> core_column(std::size_t n, std::size_t r) const {
    return core_factors_t_[n].row(r);
  }

  // b^(n)_{j,r} in the logical J_n x R_core layout.
  double core_entry(std::size_t n, std::size_t j, std::size_t r) const {
    return core_factors_t_[n](r, j);
  }

  bool operator==(const TuckerModel&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> j_ranks_;
  std::size_t r_core_ = 0;
  std::vector<Matrix> factors_;
  std::vector<Matrix> core_factors_t_;
};

// A^(n) ~ U(0, s/sqrt(J_n)), B^(n) ~ U(0, s/sqrt(R_core)) with
// s = config.init_scale_factor; symmetric about zero when signed_init is set.
// Deterministic for a given seed.
TuckerModel init_model(const std::vector<std::size_t>& dims, const ModelConfig& config);

TuckerModel clone_model(const TuckerModel& model);

// True when R_core > min_n J_n, which the Kruskal core approximation is not
// intended for. Not an error.
bool core_rank_exceeds_factor_ranks(const TuckerModel& model);

// Plain-text checkpoint; values at 17 significant digits, exact round trip.
void save_model(const TuckerModel& model, const std::filesystem::path& path);
TuckerModel load_model(const std::filesystem::path& path);

}  // namespace sptucker
