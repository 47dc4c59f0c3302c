#include "sptucker/kernels.hpp"

#include <string>

#include "sptucker/error.hpp"

namespace sptucker {

namespace {

void require_mode(const TuckerModel& model, std::size_t n) {
  if (n >= model.order()) {
    throw Error("mode " + std::to_string(n) + " out of range for order " + std::to_string(model.order()));
  }
}

void require_rank(const TuckerModel& model, std::size_t r) {
  if (r >= model.r_core()) {
    throw Error("core rank " + std::to_string(r) + " out of range for R_core " + std::to_string(model.r_core()));
  }
}

}  // namespace

Workspace::Workspace(const TuckerModel& model, OpCounter* c)
    : cache(model.order(), model.r_core()),
      gs(model.max_rank()),
      grad(model.max_rank()),
      off_products(model.r_core()),
      counter(c) {}

void check_index(const TuckerModel& model, std::span<const std::size_t> index) {
  if (index.size() != model.order()) {
    throw Error("index has " + std::to_string(index.size()) + " components, model order is " +
                std::to_string(model.order()));
  }
  for (std::size_t n = 0; n < index.size(); ++n) {
    if (index[n] >= model.dims()[n]) {
      throw Error("index component " + std::to_string(index[n]) + " out of range for mode " + std::to_string(n) +
                  " (dim " + std::to_string(model.dims()[n]) + ")");
    }
  }
}

void refresh_mode_dots(const TuckerModel& model, std::span<const std::size_t> index, std::size_t n,
                       ModeDotCache& cache, OpCounter* counter) {
  const auto a = model.factor_row(n, index[n]);
  for (std::size_t r = 0; r < model.r_core(); ++r) cache(n, r) = dot(model.core_column(n, r), a);
  if (counter) counter->mults += model.r_core() * model.j_ranks()[n];
}

void mode_dots(const TuckerModel& model, std::span<const std::size_t> index, ModeDotCache& cache,
               OpCounter* counter) {
  check_index(model, index);
  if (cache.order() != model.order() || cache.r_core() != model.r_core()) {
    cache = ModeDotCache(model.order(), model.r_core());
  }
  for (std::size_t n = 0; n < model.order(); ++n) refresh_mode_dots(model, index, n, cache, counter);
}

ModeDotCache mode_dots(const TuckerModel& model, std::span<const std::size_t> index) {
  ModeDotCache cache(model.order(), model.r_core());
  mode_dots(model, index, cache);
  return cache;
}

double off_mode_product(const ModeDotCache& cache, std::size_t n, std::size_t r, OpCounter* counter) {
  double p = 1.0;
  for (std::size_t m = 0; m < cache.order(); ++m) {
    if (m != n) p *= cache(m, r);
  }
  if (counter) counter->mults += cache.order() - 1;
  return p;
}

void gs_vector(const TuckerModel& model, const ModeDotCache& cache, std::size_t n, std::span<double> out,
               OpCounter* counter) {
  require_mode(model, n);
  const std::size_t jn = model.j_ranks()[n];
  for (std::size_t j = 0; j < jn; ++j) out[j] = 0.0;
  for (std::size_t r = 0; r < model.r_core(); ++r) {
    const double w = off_mode_product(cache, n, r, counter);
    const auto b = model.core_column(n, r);
    for (std::size_t j = 0; j < jn; ++j) out[j] += w * b[j];
  }
  if (counter) counter->mults += model.r_core() * jn;
}

std::vector<double> gs_vector(const TuckerModel& model, const ModeDotCache& cache, std::size_t n) {
  require_mode(model, n);
  std::vector<double> out(model.j_ranks()[n]);
  gs_vector(model, cache, n, out);
  return out;
}

void q_vector(const TuckerModel& model, std::span<const std::size_t> index, const ModeDotCache& cache,
              std::size_t n, std::size_t r, std::span<double> out, OpCounter* counter) {
  require_mode(model, n);
  require_rank(model, r);
  const double w = off_mode_product(cache, n, r, counter);
  const auto a = model.factor_row(n, index[n]);
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = w * a[j];
  if (counter) counter->mults += a.size();
}

std::vector<double> q_vector(const TuckerModel& model, std::span<const std::size_t> index,
                             const ModeDotCache& cache, std::size_t n, std::size_t r) {
  require_mode(model, n);
  std::vector<double> out(model.j_ranks()[n]);
  q_vector(model, index, cache, n, r, out);
  return out;
}

double predict(const ModeDotCache& cache, OpCounter* counter) {
  double sum = 0.0;
  for (std::size_t r = 0; r < cache.r_core(); ++r) {
    double p = 1.0;
    for (std::size_t n = 0; n < cache.order(); ++n) p *= cache(n, r);
    sum += p;
  }
  if (counter) counter->mults += cache.r_core() * cache.order();
  return sum;
}

double predict(const TuckerModel& model, std::span<const std::size_t> index) {
  return predict(mode_dots(model, index));
}

double intermx(const TuckerModel& model, std::span<const std::size_t> index, const ModeDotCache& cache,
               std::size_t n, std::size_t r) {
  const auto q = q_vector(model, index, cache, n, r);
  return dot(model.core_column(n, r), q);
}

}  // namespace sptucker
