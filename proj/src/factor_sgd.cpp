#include "sptucker/factor_sgd.hpp"

#include <algorithm>
#include <string>

#include "sptucker/error.hpp"

namespace sptucker {

namespace {

// g = -x GS + lambda a + (a . GS) GS, written into g[0..J_n).
void factor_gradient_into(std::span<const double> a, std::span<const double> gs, double x, double lambda,
                          std::span<double> g, OpCounter* counter) {
  const double inter = dot(a, gs);
  for (std::size_t j = 0; j < a.size(); ++j) g[j] = -x * gs[j] + lambda * a[j] + inter * gs[j];
  if (counter) counter->mults += 4 * a.size();
}

}  // namespace

FactorGradient factor_gradient(const TuckerModel& model, std::span<const std::size_t> index, double x,
                               std::size_t n, double lambda_a, Workspace& ws) {
  if (n >= model.order()) throw Error("mode " + std::to_string(n) + " out of range");
  mode_dots(model, index, ws.cache, ws.counter);
  const std::size_t jn = model.j_ranks()[n];
  ws.gs.resize(std::max(ws.gs.size(), jn));
  const std::span<double> gs(ws.gs.data(), jn);
  gs_vector(model, ws.cache, n, gs, ws.counter);

  FactorGradient out{n, index[n], std::vector<double>(jn)};
  factor_gradient_into(model.factor_row(n, index[n]), gs, x, lambda_a, out.g, ws.counter);
  return out;
}

void sgd_step(std::span<double> w, std::span<const double> g, double gamma) {
  for (std::size_t k = 0; k < w.size(); ++k) w[k] -= gamma * g[k];
}

std::vector<double> sgd_step(std::vector<double> w, std::span<const double> g, double gamma) {
  if (w.size() != g.size()) throw Error("sgd_step: length mismatch");
  sgd_step(std::span<double>(w), g, gamma);
  return w;
}

void factor_update_sample(TuckerModel& model, std::span<const std::size_t> index, double x,
                          std::span<const double> gammas, std::span<const double> lambdas, Workspace& ws) {
  if (ws.gs.size() < model.max_rank() || ws.grad.size() < model.max_rank()) {
    ws.gs.resize(model.max_rank());
    ws.grad.resize(model.max_rank());
  }
  mode_dots(model, index, ws.cache, ws.counter);
  for (std::size_t n = 0; n < model.order(); ++n) {
    const std::size_t jn = model.j_ranks()[n];
    const std::span<double> gs(ws.gs.data(), jn);
    const std::span<double> g(ws.grad.data(), jn);
    gs_vector(model, ws.cache, n, gs, ws.counter);
    const auto a = model.factor_row(n, index[n]);
    factor_gradient_into(a, gs, x, lambdas[n], g, ws.counter);
    sgd_step(a, g, gammas[n]);
    if (ws.counter) ws.counter->mults += jn;
    // Row n moved, so c[n][.] is stale for the remaining modes.
    refresh_mode_dots(model, index, n, ws.cache, ws.counter);
  }
}

void factor_epoch_shard(TuckerModel& model, const SparseTensor& data, std::span<const std::size_t> entry_ids,
                        std::span<const double> gammas, std::span<const double> lambdas, Workspace& ws) {
  if (gammas.size() != model.order() || lambdas.size() != model.order()) {
    throw Error("need one learning rate and one regularizer per mode");
  }
  for (const std::size_t e : entry_ids) factor_update_sample(model, data.index(e), data.value(e), gammas, lambdas, ws);
}

}  // namespace sptucker
