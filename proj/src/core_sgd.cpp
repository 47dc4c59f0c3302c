#include "sptucker/core_sgd.hpp"

#include <string>

#include "sptucker/error.hpp"

namespace sptucker {

CoreGradientAccumulator::CoreGradientAccumulator(const TuckerModel& model) {
  grads_.reserve(model.order());
  for (std::size_t n = 0; n < model.order(); ++n) grads_.emplace_back(model.r_core(), model.j_ranks()[n]);
}

bool CoreGradientAccumulator::same_shape(const CoreGradientAccumulator& other) const {
  if (grads_.size() != other.grads_.size()) return false;
  for (std::size_t n = 0; n < grads_.size(); ++n) {
    if (grads_[n].rows != other.grads_[n].rows || grads_[n].cols != other.grads_[n].cols) return false;
  }
  return true;
}

void CoreGradientAccumulator::merge_from(const CoreGradientAccumulator& other) {
  if (!same_shape(other)) throw Error("cannot merge core accumulators of different shapes");
  for (std::size_t n = 0; n < grads_.size(); ++n) {
    auto& dst = grads_[n].data;
    const auto& src = other.grads_[n].data;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  sample_count_ += other.sample_count_;
}

CoreGradientAccumulator merge_accumulators(const CoreGradientAccumulator& a, const CoreGradientAccumulator& b) {
  CoreGradientAccumulator out = a;
  out.merge_from(b);
  return out;
}

void core_accumulate(const TuckerModel& model, std::span<const std::size_t> index, double x,
                     CoreGradientAccumulator& acc, Workspace& ws) {
  if (acc.order() != model.order()) throw Error("core accumulator does not match the model");
  mode_dots(model, index, ws.cache, ws.counter);
  // Parts 1, 3 and 4 combine to (xhat - x) Q^(n),r since sum_r' InterMX_r' = xhat.
  const double residual = predict(ws.cache, ws.counter) - x;
  for (std::size_t n = 0; n < model.order(); ++n) {
    const auto a = model.factor_row(n, index[n]);
    for (std::size_t r = 0; r < model.r_core(); ++r) {
      const double w = residual * off_mode_product(ws.cache, n, r, ws.counter);
      auto col = acc.column(n, r);
      for (std::size_t j = 0; j < a.size(); ++j) col[j] += w * a[j];
    }
    if (ws.counter) ws.counter->mults += model.r_core() * (a.size() + 1);
  }
  acc.add_samples(1);
}

namespace {

void check_apply(const TuckerModel& model, const CoreGradientAccumulator& acc) {
  if (acc.sample_count() == 0) throw Error("core accumulator is empty");
  if (acc.order() != model.order()) throw Error("core accumulator does not match the model");
  for (std::size_t n = 0; n < model.order(); ++n) {
    if (acc.mode(n).rows != model.r_core() || acc.mode(n).cols != model.j_ranks()[n]) {
      throw Error("core accumulator shape mismatch in mode " + std::to_string(n));
    }
  }
}

void apply_column(TuckerModel& model, const CoreGradientAccumulator& acc, double gamma_b, double lambda_b,
                  double scale, CoreSlot slot) {
  auto b = model.core_column(slot.mode, slot.rank);
  const auto g = acc.column(slot.mode, slot.rank);
  for (std::size_t j = 0; j < b.size(); ++j) b[j] -= gamma_b * (g[j] * scale + lambda_b * b[j]);
}

}  // namespace

void core_apply(TuckerModel& model, const CoreGradientAccumulator& acc, double gamma_b, double lambda_b,
                CoreReduction reduction) {
  check_apply(model, acc);
  const double scale = reduction == CoreReduction::Mean ? 1.0 / static_cast<double>(acc.sample_count()) : 1.0;
  for (std::size_t n = 0; n < model.order(); ++n) {
    for (std::size_t r = 0; r < model.r_core(); ++r) apply_column(model, acc, gamma_b, lambda_b, scale, {n, r});
  }
}

void core_apply(TuckerModel& model, const CoreGradientAccumulator& acc, double gamma_b, double lambda_b,
                CoreReduction reduction, std::span<const CoreSlot> order) {
  check_apply(model, acc);
  std::vector<char> seen(model.order() * model.r_core(), 0);
  for (const auto& slot : order) {
    if (slot.mode >= model.order() || slot.rank >= model.r_core() || seen[slot.mode * model.r_core() + slot.rank]++) {
      throw Error("core update order must list every (mode, rank) exactly once");
    }
  }
  if (order.size() != seen.size()) throw Error("core update order must list every (mode, rank) exactly once");
  const double scale = reduction == CoreReduction::Mean ? 1.0 / static_cast<double>(acc.sample_count()) : 1.0;
  for (const auto& slot : order) apply_column(model, acc, gamma_b, lambda_b, scale, slot);
}

}  // namespace sptucker
