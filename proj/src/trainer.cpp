#include "sptucker/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "sptucker/error.hpp"
#include "sptucker/factor_sgd.hpp"
#include "sptucker/kernels.hpp"
#include "sptucker/oracle.hpp"
#include "sptucker/partition.hpp"
#include "worker_pool.hpp"

namespace sptucker {

double learning_rate(double alpha, double beta, double t) { return alpha / (1.0 + beta * std::pow(t, 1.5)); }

ErrorMetrics evaluate(const TuckerModel& model, const SparseTensor& data) {
  if (data.empty()) throw Error("cannot evaluate on an empty dataset");
  ModeDotCache cache(model.order(), model.r_core());
  double sq = 0.0;
  double abs = 0.0;
  for (std::size_t e = 0; e < data.nnz(); ++e) {
    mode_dots(model, data.index(e), cache);
    const double d = data.value(e) - predict(cache);
    sq += d * d;
    abs += std::abs(d);
  }
  const auto n = static_cast<double>(data.nnz());
  return {std::sqrt(sq / n), abs / n};
}

double rmse(const TuckerModel& model, const SparseTensor& data) { return evaluate(model, data).rmse; }
double mae(const TuckerModel& model, const SparseTensor& data) { return evaluate(model, data).mae; }

Objective frobenius_objective(const TuckerModel& model, const SparseTensor& data, double lambda_g, double lambda_a) {
  if (data.empty()) throw Error("cannot evaluate on an empty dataset");
  Objective obj;
  ModeDotCache cache(model.order(), model.r_core());
  for (std::size_t e = 0; e < data.nnz(); ++e) {
    mode_dots(model, data.index(e), cache);
    const double d = data.value(e) - predict(cache);
    obj.loss += d * d;
  }
  double factor_sq = 0.0;
  for (std::size_t n = 0; n < model.order(); ++n) {
    for (const double v : model.factor(n).data) factor_sq += v * v;
  }
  obj.factor_penalty = lambda_a * factor_sq;

  double core_size = 1.0;
  for (const auto j : model.j_ranks()) core_size *= static_cast<double>(j);
  if (core_size <= static_cast<double>(oracle::kMaxCore)) {
    const auto core = oracle::dense_core_from_kruskal(model);
    double core_sq = 0.0;
    for (const double v : core.values()) core_sq += v * v;
    obj.core_penalty = lambda_g * core_sq;
  }
  return obj;
}

double default_init_scale(const SparseTensor& data) {
  if (data.empty()) return 1.0;
  const double mean = std::accumulate(data.values().begin(), data.values().end(), 0.0) / static_cast<double>(data.nnz());
  if (!(mean > 0.0)) return 0.1;
  return std::clamp(std::pow(mean, 1.0 / static_cast<double>(data.order())), 0.1, 1.0);
}

namespace {

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t epoch, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

// Seeded uniform sample without replacement of min(cap, n) entry ids.
std::vector<std::size_t> core_batch(std::size_t n, std::size_t cap, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  if (cap >= n) return ids;
  auto rng = seeded_rng(seed, epoch, std::numeric_limits<std::uint32_t>::max());
  for (std::size_t k = 0; k < cap; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(ids[k], ids[pick(rng)]);
  }
  ids.resize(cap);
  return ids;
}

void validate(const TuckerModel& model, const DatasetSplit& data, const TrainConfig& config) {
  if (config.epochs == 0) throw Error("epochs must be at least 1");
  if (config.workers == 0) throw Error("workers must be at least 1");
  if (config.eval_every == 0) throw Error("eval_every must be at least 1");
  for (const double v : {config.alpha_a, config.beta_a, config.lambda_a, config.alpha_b, config.beta_b, config.lambda_b}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("learning-rate and regularization parameters must be >= 0");
  }
  if (data.train.empty()) throw Error("training set is empty");
  if (data.train.dims() != model.dims()) throw Error("model dims do not match the training data");
  if (!data.test.empty() && data.test.dims() != model.dims()) throw Error("model dims do not match the test data");
  const auto min_dim = *std::min_element(model.dims().begin(), model.dims().end());
  if (config.workers > min_dim) {
    throw Error("cannot partition for " + std::to_string(config.workers) + " workers: smallest mode has dim " +
                std::to_string(min_dim));
  }
}

}  // namespace

TrainResult train(TuckerModel& model, const DatasetSplit& data, const TrainConfig& config,
                  const std::function<void(const MetricsRow&)>& on_row) {
  validate(model, data, config);
  const std::size_t order = model.order();
  const std::size_t workers = config.workers;
  const PartitionPlan plan = build_partition(data.train, workers);
  const RoundSchedule schedule = round_schedule(order, workers);

  detail::WorkerPool pool(workers);
  std::vector<Workspace> spaces;
  for (std::size_t w = 0; w < workers; ++w) spaces.emplace_back(model);
  std::vector<std::vector<std::size_t>> block_lists(plan.block_count());
  std::vector<std::uint64_t> processed(workers, 0);

  TrainResult result;
  double elapsed = 0.0;
  using clock = std::chrono::steady_clock;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = clock::now();
    const auto t = static_cast<double>(epoch - 1);
    const double gamma_a = learning_rate(config.alpha_a, config.beta_a, t);
    const double gamma_b = learning_rate(config.alpha_b, config.beta_b, t);
    const std::vector<double> gammas(order, gamma_a);
    const std::vector<double> lambdas(order, config.lambda_a);

    for (std::size_t b = 0; b < plan.block_count(); ++b) {
      block_lists[b] = plan.entries(b);
      auto rng = seeded_rng(config.seed, epoch, b);
      std::shuffle(block_lists[b].begin(), block_lists[b].end(), rng);
    }
    std::fill(processed.begin(), processed.end(), 0);
    for (const auto& round : schedule.rounds) {
      pool.run([&](std::size_t w) {
        const auto& ids = block_lists[plan.linear_id(round[w])];
        factor_epoch_shard(model, data.train, ids, gammas, lambdas, spaces[w]);
        processed[w] += ids.size();
      });
    }
    result.factor_samples.push_back(std::accumulate(processed.begin(), processed.end(), std::uint64_t{0}));

    if (config.update_core) {
      const auto batch = core_batch(data.train.nnz(), config.core_batch_cap, config.seed, epoch);
      std::vector<CoreGradientAccumulator> accs(workers, CoreGradientAccumulator(model));
      pool.run([&](std::size_t w) {
        const std::size_t lo = batch.size() * w / workers;
        const std::size_t hi = batch.size() * (w + 1) / workers;
        for (std::size_t k = lo; k < hi; ++k) {
          core_accumulate(model, data.train.index(batch[k]), data.train.value(batch[k]), accs[w], spaces[w]);
        }
      });
      for (std::size_t w = 1; w < workers; ++w) accs[0].merge_from(accs[w]);
      core_apply(model, accs[0], gamma_b, config.lambda_b, config.core_reduction);
    }
    elapsed += std::chrono::duration<double>(clock::now() - start).count();

    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      MetricsRow row;
      row.epoch = epoch;
      row.wall_seconds = config.record_wall_time ? elapsed : 0.0;
      const auto train_metrics = evaluate(model, data.train);
      row.train_rmse = train_metrics.rmse;
      row.train_mae = train_metrics.mae;
      if (data.test.empty()) {
        row.test_rmse = row.test_mae = std::numeric_limits<double>::quiet_NaN();
      } else {
        const auto test_metrics = evaluate(model, data.test);
        row.test_rmse = test_metrics.rmse;
        row.test_mae = test_metrics.mae;
      }
      row.gamma_a = gamma_a;
      row.gamma_b = config.update_core ? gamma_b : 0.0;
      result.rows.push_back(row);
      if (on_row) on_row(row);
    }
  }
  return result;
}

void write_metrics_header(std::ostream& out) {
  out << "epoch,wall_seconds,train_rmse,train_mae,test_rmse,test_mae,gamma_a,gamma_b\n";
}

void write_metrics_row(std::ostream& out, const MetricsRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.epoch, row.wall_seconds,
                row.train_rmse, row.train_mae, row.test_rmse, row.test_mae, row.gamma_a, row.gamma_b);
  out << buf;
}

}  // namespace sptucker
