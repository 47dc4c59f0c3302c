#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "sptucker/core_sgd.hpp"
#include "sptucker/model.hpp"
#include "sptucker/sparse_tensor.hpp"

namespace sptucker {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t workers = 1;
  bool update_core = true;
  double alpha_a = 0.009;
  double beta_a = 0.05;
  double lambda_a = 0.01;
  double alpha_b = 0.0045;
  double beta_b = 0.1;
  double lambda_b = 0.01;
  std::size_t core_batch_cap = std::size_t{1} << 20;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;
  CoreReduction core_reduction = CoreReduction::Mean;
  // When false, wall_seconds is reported as 0 so metrics are reproducible.
  bool record_wall_time = true;
};

struct MetricsRow {
  std::size_t epoch = 0;
  double wall_seconds = 0.0;
  double train_rmse = 0.0;
  double train_mae = 0.0;
  // NaN when the test set is empty.
  double test_rmse = 0.0;
  double test_mae = 0.0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
};

struct TrainResult {
  std::vector<MetricsRow> rows;
  // Samples processed in each epoch's factor phase.
  std::vector<std::uint64_t> factor_samples;
};

// gamma_t = alpha / (1 + beta t^1.5)
double learning_rate(double alpha, double beta, double t);

struct ErrorMetrics {
  double rmse = 0.0;
  double mae = 0.0;
};

// Throws Error on an empty dataset.
ErrorMetrics evaluate(const TuckerModel& model, const SparseTensor& data);
double rmse(const TuckerModel& model, const SparseTensor& data);
double mae(const TuckerModel& model, const SparseTensor& data);

struct Objective {
  double loss = 0.0;
  double factor_penalty = 0.0;
  // lambda_g ||G||^2; absent when prod_n J_n exceeds 10^6.
  std::optional<double> core_penalty;
  double total() const { return loss + factor_penalty + core_penalty.value_or(0.0); }
};

// sum_Omega (x - xhat)^2 + lambda_g ||G||^2 + lambda_a sum_n ||A^(n)||^2
Objective frobenius_objective(const TuckerModel& model, const SparseTensor& data, double lambda_g,
                              double lambda_a);

// Default init scale: (mean value)^(1/N) clamped to [0.1, 1].
double default_init_scale(const SparseTensor& data);

// Epoch e (1-based) runs at t = e - 1: a factor phase over the shuffled train
// set in conflict-free partition rounds, then, if enabled, one simultaneous
// core update from the core batch. Throws Error on dim mismatch, epochs == 0,
// or workers > min_n I_n.
TrainResult train(TuckerModel& model, const DatasetSplit& data, const TrainConfig& config,
                  const std::function<void(const MetricsRow&)>& on_row = {});

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRow& row);

}  // namespace sptucker
