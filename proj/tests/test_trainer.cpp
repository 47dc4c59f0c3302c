#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "sptucker/error.hpp"
#include "sptucker/oracle.hpp"
#include "sptucker/sparse_tensor.hpp"
#include "sptucker/trainer.hpp"
#include "test_util.hpp"

using namespace sptucker;
using sptucker::testing::random_model;

namespace {

// Rank-1 model with a single scalar slot per mode: predict = prod_n a_n b_n.
TuckerModel scalar_model(double value) {
  TuckerModel m({2, 2}, {1, 1}, 1);
  for (std::size_t n = 0; n < 2; ++n) {
    for (auto& v : m.factor(n).data) v = 1.0;
    m.core_column(n, 0)[0] = 1.0;
  }
  m.core_column(0, 0)[0] = value;
  return m;
}

SparseTensor two_points(double x0, double x1) {
  SparseTensor t({2, 2});
  const std::vector<std::size_t> i0{0, 0};
  const std::vector<std::size_t> i1{1, 1};
  t.push_back(i0, x0);
  t.push_back(i1, x1);
  return t;
}

DatasetSplit synthetic_split(std::uint64_t seed, double noise = 0.0) {
  SyntheticConfig cfg{{20, 25, 30}, 3000, {3, 3, 3}, 3, noise, 2.0, false, seed};
  return split(generate_synthetic(cfg).tensor, 0.1, seed + 1);
}

}  // namespace

TEST(LearningRate, Schedule) {
  EXPECT_EQ(learning_rate(0.009, 0.05, 0.0), 0.009);
  EXPECT_NEAR(learning_rate(0.009, 0.05, 1.0), 0.00857142857, 1e-11);
  for (double t = 0; t < 10; t += 1) EXPECT_EQ(learning_rate(0.3, 0.0, t), 0.3);
  double prev = learning_rate(0.01, 0.1, 0.0);
  for (double t = 0.5; t < 50; t += 0.5) {
    const double cur = learning_rate(0.01, 0.1, t);
    EXPECT_LE(cur, prev);
    prev = cur;
  }
  EXPECT_NEAR(learning_rate(1.0, 0.1, 4.0), 1.0 / 1.8, 1e-15);
}

TEST(Metrics, ExactFit) {
  const TuckerModel m = scalar_model(3.0);
  const SparseTensor t = two_points(3.0, 3.0);
  EXPECT_EQ(rmse(m, t), 0.0);
  EXPECT_EQ(mae(m, t), 0.0);
}

TEST(Metrics, UnitResiduals) {
  const TuckerModel m = scalar_model(3.0);
  const SparseTensor t = two_points(4.0, 2.0);
  EXPECT_DOUBLE_EQ(rmse(m, t), 1.0);
  EXPECT_DOUBLE_EQ(mae(m, t), 1.0);
}

TEST(Metrics, TwoPointFormula) {
  const TuckerModel m = scalar_model(3.0);
  const SparseTensor t = two_points(3.0, 5.0);
  EXPECT_NEAR(rmse(m, t), std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(mae(m, t), 1.0);
  const ErrorMetrics e = evaluate(m, t);
  EXPECT_EQ(e.rmse, rmse(m, t));
  EXPECT_EQ(e.mae, mae(m, t));
}

TEST(Metrics, EmptyDatasetThrows) {
  const TuckerModel m = scalar_model(1.0);
  EXPECT_THROW(rmse(m, SparseTensor({2, 2})), Error);
  EXPECT_THROW(mae(m, SparseTensor({2, 2})), Error);
}

TEST(Objective, ZeroModelIsSumOfSquares) {
  const TuckerModel m({2, 2}, {1, 1}, 1);
  const SparseTensor t = two_points(3.0, -4.0);
  const Objective o = frobenius_objective(m, t, 0.0, 0.0);
  EXPECT_EQ(o.loss, 25.0);
  EXPECT_EQ(o.total(), 25.0);
}

TEST(Objective, ExactModelIsZero) {
  const TuckerModel m = scalar_model(3.0);
  EXPECT_EQ(frobenius_objective(m, two_points(3.0, 3.0), 0.0, 0.0).total(), 0.0);
}

TEST(Objective, PenaltiesAreAdditive) {
  const TuckerModel m = random_model({4, 5, 6}, {2, 3, 2}, 2, 3);
  SyntheticConfig cfg{{4, 5, 6}, 40, {2, 2, 2}, 1, 0.0, 1.0, false, 1};
  const SparseTensor t = generate_synthetic(cfg).tensor;
  const Objective base = frobenius_objective(m, t, 0.0, 0.0);
  const Objective with_a = frobenius_objective(m, t, 0.0, 0.25);
  double fro = 0.0;
  for (std::size_t n = 0; n < 3; ++n) {
    for (double v : m.factor(n).data) fro += v * v;
  }
  EXPECT_NEAR(with_a.total() - base.total(), 0.25 * fro, 1e-12);
  EXPECT_NEAR(with_a.factor_penalty, 0.25 * fro, 1e-12);

  const Objective with_g = frobenius_objective(m, t, 0.5, 0.0);
  const auto core = oracle::dense_core_from_kruskal(m);
  double g2 = 0.0;
  for (double v : core.values()) g2 += v * v;
  ASSERT_TRUE(with_g.core_penalty.has_value());
  EXPECT_NEAR(*with_g.core_penalty, 0.5 * g2, 1e-12);
}

TEST(Objective, LargeCoreIsNotComputed) {
  const TuckerModel m({2, 2, 2}, {101, 101, 101}, 1);
  SparseTensor t({2, 2, 2});
  const std::vector<std::size_t> idx{0, 0, 0};
  t.push_back(idx, 1.0);
  const Objective o = frobenius_objective(m, t, 1.0, 0.0);
  EXPECT_FALSE(o.core_penalty.has_value());
  EXPECT_EQ(o.total(), 1.0);
}

TEST(DefaultInitScale, MeanRootClamped) {
  SparseTensor t({2, 2});
  const std::vector<std::size_t> i0{0, 0};
  t.push_back(i0, 8.0);
  EXPECT_EQ(default_init_scale(t), 1.0);
  SparseTensor s({2, 2, 2});
  const std::vector<std::size_t> j0{0, 0, 0};
  s.push_back(j0, 0.125);
  EXPECT_NEAR(default_init_scale(s), 0.5, 1e-15);
  SparseTensor tiny({2, 2});
  tiny.push_back(i0, 1e-6);
  EXPECT_EQ(default_init_scale(tiny), 0.1);
  SparseTensor neg({2, 2});
  neg.push_back(i0, -3.0);
  EXPECT_EQ(default_init_scale(neg), 0.1);
}

TEST(Train, RejectsBadConfigs) {
  const DatasetSplit d = synthetic_split(1);
  TuckerModel m = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, 1.0, 1});
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(m, d, cfg), Error);
  cfg.epochs = 1;
  cfg.workers = 21;
  EXPECT_THROW(train(m, d, cfg), Error);
  cfg.workers = 0;
  EXPECT_THROW(train(m, d, cfg), Error);
  cfg.workers = 1;
  cfg.alpha_a = -1.0;
  EXPECT_THROW(train(m, d, cfg), Error);
  cfg.alpha_a = 0.01;
  TuckerModel wrong({20, 25, 31}, {3, 3, 3}, 3);
  EXPECT_THROW(train(wrong, d, cfg), Error);
}

TEST(Train, ZeroRatesReportInitialModel) {
  const DatasetSplit d = synthetic_split(2);
  TuckerModel m = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, 1.0, 5});
  const TuckerModel before = m;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.alpha_a = 0.0;
  cfg.alpha_b = 0.0;
  cfg.record_wall_time = false;
  const TrainResult r = train(m, d, cfg);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(m, before);
  EXPECT_EQ(r.rows[0].epoch, 1u);
  EXPECT_EQ(r.rows[0].train_rmse, rmse(before, d.train));
  EXPECT_EQ(r.rows[0].train_mae, mae(before, d.train));
  EXPECT_EQ(r.rows[0].test_rmse, rmse(before, d.test));
  EXPECT_EQ(r.rows[0].wall_seconds, 0.0);
}

TEST(Train, FactorPhaseTouchesEveryEntryOnce) {
  const DatasetSplit d = synthetic_split(3);
  for (const std::size_t w : {1u, 2u, 3u, 4u}) {
    TuckerModel m = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, 1.0, 5});
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.workers = w;
    const TrainResult r = train(m, d, cfg);
    ASSERT_EQ(r.factor_samples.size(), 3u);
    for (auto count : r.factor_samples) EXPECT_EQ(count, d.train.nnz()) << "workers " << w;
  }
}

TEST(Train, EvalEveryAndCallback) {
  const DatasetSplit d = synthetic_split(4);
  TuckerModel m = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, 1.0, 5});
  TrainConfig cfg;
  cfg.epochs = 7;
  cfg.eval_every = 3;
  std::vector<std::size_t> seen;
  const TrainResult r = train(m, d, cfg, [&](const MetricsRow& row) { seen.push_back(row.epoch); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{3, 6, 7}));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].gamma_a, learning_rate(cfg.alpha_a, cfg.beta_a, 2.0));
  EXPECT_EQ(r.rows[0].gamma_b, learning_rate(cfg.alpha_b, cfg.beta_b, 2.0));
}

TEST(Train, EmptyTestSetGivesNaN) {
  DatasetSplit d = synthetic_split(5);
  d.test = SparseTensor(d.train.dims());
  TuckerModel m = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, 1.0, 5});
  TrainConfig cfg;
  cfg.epochs = 1;
  const TrainResult r = train(m, d, cfg);
  EXPECT_TRUE(std::isnan(r.rows[0].test_rmse));
  EXPECT_TRUE(std::isnan(r.rows[0].test_mae));
}

TEST(Train, SingleWorkerIsDeterministic) {
  const DatasetSplit d = synthetic_split(6);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 17;
  cfg.record_wall_time = false;
  TuckerModel a = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, 1.0, 5});
  TuckerModel b = a;
  const TrainResult ra = train(a, d, cfg);
  const TrainResult rb = train(b, d, cfg);
  EXPECT_EQ(a, b);
  ASSERT_EQ(ra.rows.size(), rb.rows.size());
  for (std::size_t k = 0; k < ra.rows.size(); ++k) EXPECT_EQ(ra.rows[k].train_rmse, rb.rows[k].train_rmse);
}

TEST(Train, MultiWorkerIsDeterministicToo) {
  const DatasetSplit d = synthetic_split(7);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.workers = 3;
  TuckerModel a = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, 1.0, 5});
  TuckerModel b = a;
  train(a, d, cfg);
  train(b, d, cfg);
  EXPECT_EQ(a, b);
}

TEST(Train, ReducesTrainingErrorAndWorkersAgree) {
  const DatasetSplit d = synthetic_split(8);
  const TuckerModel start = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, 1.0, 9});
  const double initial = rmse(start, d.train);
  TrainConfig cfg;
  cfg.epochs = 20;
  TuckerModel one = start;
  const TrainResult r1 = train(one, d, cfg);
  cfg.workers = 4;
  TuckerModel four = start;
  const TrainResult r4 = train(four, d, cfg);
  const double final1 = r1.rows.back().train_rmse;
  const double final4 = r4.rows.back().train_rmse;
  EXPECT_LT(final1, initial);
  EXPECT_LT(final4, initial);
  EXPECT_LE(std::abs(final4 - final1) / final1, 0.05) << final1 << " vs " << final4;
}

TEST(Train, NoCoreLeavesCoreUntouched) {
  const DatasetSplit d = synthetic_split(9);
  TuckerModel m = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, 1.0, 5});
  const TuckerModel before = m;
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.update_core = false;
  const TrainResult r = train(m, d, cfg);
  for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(m.core_factor_t(n), before.core_factor_t(n));
  EXPECT_NE(m.factor(0), before.factor(0));
  EXPECT_EQ(r.rows.back().gamma_b, 0.0);
}

TEST(Train, TrainRmseSettlesOnNoiselessData) {
  const DatasetSplit d = synthetic_split(10);
  TuckerModel m = init_model(d.train.dims(), ModelConfig{{3, 3, 3}, 3, default_init_scale(d.train), 2});
  TrainConfig cfg;
  cfg.epochs = 60;
  const TrainResult r = train(m, d, cfg);
  for (std::size_t k = 5; k < r.rows.size(); ++k) {
    EXPECT_LE(r.rows[k].train_rmse, r.rows[k - 1].train_rmse + 1e-6) << "epoch " << r.rows[k].epoch;
  }
}

TEST(MetricsCsv, HeaderAndRowFormat) {
  std::ostringstream out;
  write_metrics_header(out);
  MetricsRow row{3, 1.5, 0.25, 0.125, 0.5, 0.375, 0.009, 0.0045};
  write_metrics_row(out, row);
  EXPECT_EQ(out.str(),
            "epoch,wall_seconds,train_rmse,train_mae,test_rmse,test_mae,gamma_a,gamma_b\n"
            "3,1.500000,0.25,0.125,0.5,0.375,0.0089999999999999993,0.0044999999999999997\n");
}
