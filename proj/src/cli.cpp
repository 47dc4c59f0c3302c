#include "sptucker/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "sptucker/error.hpp"
#include "sptucker/model.hpp"
#include "sptucker/partition.hpp"
#include "sptucker/sparse_tensor.hpp"
#include "sptucker/trainer.hpp"

namespace sptucker {

namespace {

std::vector<std::size_t> parse_list(const std::string& text, const std::string& flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (item.empty() || pos != item.size()) throw Error(flag + ": bad integer '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw Error(flag + ": empty list");
  return out;
}

// A single value is broadcast to every mode.
std::vector<std::size_t> per_mode(const std::string& text, std::size_t order, const std::string& flag) {
  auto v = parse_list(text, flag);
  if (v.size() == 1) return std::vector<std::size_t>(order, v.front());
  if (v.size() != order) {
    throw Error(flag + ": expected 1 or " + std::to_string(order) + " values, got " + std::to_string(v.size()));
  }
  return v;
}

IndexBase to_base(int base) {
  if (base != 0 && base != 1) throw Error("--index-base must be 0 or 1");
  return base == 0 ? IndexBase::Zero : IndexBase::One;
}

struct GenArgs {
  std::string dims;
  std::size_t nnz = 0;
  std::string j = "4";
  std::size_t rcore = 4;
  double noise = 0.0;
  double scale = 1.0;
  bool signed_truth = false;
  std::uint64_t seed = 0;
  std::string out;
  std::string model_out;
  int index_base = 1;
};

struct SplitArgs {
  std::string data;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  std::string train_out;
  std::string test_out;
  int index_base = 1;
};

struct TrainArgs {
  std::string data;
  std::string test;
  std::string j = "4";
  std::size_t rcore = 4;
  TrainConfig config;
  bool no_core = false;
  bool no_wall_time = false;
  std::optional<double> init_scale;
  std::string metrics_out;
  std::string model_out;
  std::string resume;
  int index_base = 1;
};

struct EvalArgs {
  std::string model;
  std::string data;
  int index_base = 1;
};

struct BenchArgs {
  std::string dims = "200,200,200";
  std::size_t nnz = 100000;
  std::string j_list = "4,8,16";
  std::string rcore_list = "4";
  std::string workers_list = "1";
  std::size_t epochs = 3;
  std::uint64_t seed = 0;
  std::string out;
};

struct DumpArgs {
  std::size_t order = 3;
  std::size_t parts = 2;
};

int do_gen(const GenArgs& a, std::ostream& out) {
  SyntheticConfig cfg;
  cfg.dims = parse_list(a.dims, "--dims");
  cfg.nnz = a.nnz;
  cfg.j_ranks = per_mode(a.j, cfg.dims.size(), "--j");
  cfg.r_core = a.rcore;
  cfg.noise_sigma = a.noise;
  cfg.init_scale_factor = a.scale;
  cfg.signed_truth = a.signed_truth;
  cfg.seed = a.seed;
  const auto data = generate_synthetic(cfg);
  write_coo(data.tensor, a.out, to_base(a.index_base));
  const std::string model_path = a.model_out.empty() ? a.out + ".model" : a.model_out;
  save_model(data.truth, model_path);
  out << "wrote " << data.tensor.nnz() << " entries to " << a.out << " and ground truth to " << model_path << '\n';
  return 0;
}

int do_split(const SplitArgs& a, std::ostream& out) {
  const auto base = to_base(a.index_base);
  const auto tensor = load_coo(a.data, base);
  const auto parts = split(tensor, a.test_fraction, a.seed);
  write_coo(parts.train, a.train_out, base);
  if (!parts.test.empty()) write_coo(parts.test, a.test_out, base);
  out << "train " << parts.train.nnz() << " -> " << a.train_out << ", test " << parts.test.nnz() << " -> "
      << (parts.test.empty() ? std::string("(none written)") : a.test_out) << '\n';
  return 0;
}

int do_train(TrainArgs a, std::ostream& out, std::ostream& err) {
  const auto base = to_base(a.index_base);
  DatasetSplit data;
  data.train = load_coo(a.data, base);
  data.test = a.test.empty() ? SparseTensor(data.train.dims()) : load_coo(a.test, base, data.train.dims());

  TuckerModel model;
  if (!a.resume.empty()) {
    model = load_model(a.resume);
  } else {
    ModelConfig mc;
    mc.j_ranks = per_mode(a.j, data.train.order(), "--j");
    mc.r_core = a.rcore;
    mc.init_scale_factor = a.init_scale.value_or(default_init_scale(data.train));
    mc.seed = a.config.seed;
    model = init_model(data.train.dims(), mc);
  }
  if (core_rank_exceeds_factor_ranks(model)) {
    err << "warning: R_core " << model.r_core() << " exceeds the smallest factor rank\n";
  }

  a.config.update_core = !a.no_core;
  a.config.record_wall_time = !a.no_wall_time;

  std::unique_ptr<std::ofstream> file;
  std::ostream* metrics = &out;
  if (!a.metrics_out.empty()) {
    file = std::make_unique<std::ofstream>(a.metrics_out);
    if (!*file) throw IoError("cannot open '" + a.metrics_out + "' for writing");
    metrics = file.get();
  }
  write_metrics_header(*metrics);
  train(model, data, a.config, [&](const MetricsRow& row) {
    write_metrics_row(*metrics, row);
    metrics->flush();
  });
  if (file && !*file) throw IoError("failed writing '" + a.metrics_out + "'");
  if (!a.model_out.empty()) save_model(model, a.model_out);
  return 0;
}

int do_eval(const EvalArgs& a, std::ostream& out) {
  const auto model = load_model(a.model);
  const auto data = load_coo(a.data, to_base(a.index_base), model.dims());
  const auto m = evaluate(model, data);
  char buf[128];
  std::snprintf(buf, sizeof buf, "rmse %.17g\nmae %.17g\n", m.rmse, m.mae);
  out << buf;
  return 0;
}

int do_bench(const BenchArgs& a, std::ostream& out) {
  const auto dims = parse_list(a.dims, "--dims");
  const auto js = parse_list(a.j_list, "--j-list");
  const auto rs = parse_list(a.rcore_list, "--rcore-list");
  const auto ws = parse_list(a.workers_list, "--workers-list");
  if (a.epochs == 0) throw Error("--epochs must be at least 1");

  SyntheticConfig cfg;
  cfg.dims = dims;
  cfg.nnz = a.nnz;
  cfg.j_ranks.assign(dims.size(), 4);
  cfg.r_core = 4;
  cfg.noise_sigma = 0.1;
  cfg.seed = a.seed;
  const auto data = generate_synthetic(cfg);
  const DatasetSplit ds{data.tensor, SparseTensor(dims)};

  std::unique_ptr<std::ofstream> file;
  std::ostream* csv = &out;
  if (!a.out.empty()) {
    file = std::make_unique<std::ofstream>(a.out);
    if (!*file) throw IoError("cannot open '" + a.out + "' for writing");
    csv = file.get();
  }
  *csv << "j,r_core,workers,nnz,epochs,seconds_per_epoch,train_rmse\n";
  for (const auto j : js) {
    for (const auto r : rs) {
      for (const auto w : ws) {
        ModelConfig mc{std::vector<std::size_t>(dims.size(), j), r, default_init_scale(data.tensor), a.seed};
        auto model = init_model(dims, mc);
        TrainConfig tc;
        tc.epochs = a.epochs;
        tc.workers = w;
        tc.seed = a.seed;
        tc.eval_every = a.epochs;
        const auto result = train(model, ds, tc);
        const auto& last = result.rows.back();
        char buf[256];
        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%zu,%.6f,%.17g\n", j, r, w, data.tensor.nnz(), a.epochs,
                      last.wall_seconds / static_cast<double>(a.epochs), last.train_rmse);
        *csv << buf;
        csv->flush();
      }
    }
  }
  return 0;
}

int do_dump(const DumpArgs& a, std::ostream& out) {
  print_schedule(round_schedule(a.order, a.parts), out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse Tucker decomposition with a Kruskal core, trained by SGD"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic tensor and its ground-truth model");
  gen_cmd->add_option("--dims", gen.dims, "Comma-separated mode sizes")->required();
  gen_cmd->add_option("--nnz", gen.nnz, "Number of distinct entries")->required();
  gen_cmd->add_option("--j", gen.j, "Factor ranks (one value or one per mode)");
  gen_cmd->add_option("--rcore", gen.rcore, "Kruskal core rank");
  gen_cmd->add_option("--noise", gen.noise, "Gaussian noise sigma");
  gen_cmd->add_option("--scale", gen.scale, "Ground-truth init scale factor");
  gen_cmd->add_flag("--signed", gen.signed_truth, "Draw ground-truth parameters symmetric about zero");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out, "Output COO file")->required();
  gen_cmd->add_option("--model-out", gen.model_out, "Ground-truth checkpoint (default <out>.model)");
  gen_cmd->add_option("--index-base", gen.index_base);

  SplitArgs sp;
  auto* split_cmd = app.add_subcommand("split", "Split a tensor into train and test files");
  split_cmd->add_option("--data", sp.data)->required();
  split_cmd->add_option("--test-fraction", sp.test_fraction);
  split_cmd->add_option("--seed", sp.seed);
  split_cmd->add_option("--train-out", sp.train_out)->required();
  split_cmd->add_option("--test-out", sp.test_out)->required();
  split_cmd->add_option("--index-base", sp.index_base);

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write per-epoch metrics CSV");
  train_cmd->add_option("--data", tr.data, "Training COO file")->required();
  train_cmd->add_option("--test", tr.test, "Test COO file");
  train_cmd->add_option("--j", tr.j, "Factor ranks (one value or one per mode)");
  train_cmd->add_option("--rcore", tr.rcore);
  train_cmd->add_option("--epochs", tr.config.epochs);
  train_cmd->add_option("--workers", tr.config.workers);
  train_cmd->add_option("--alpha-a", tr.config.alpha_a);
  train_cmd->add_option("--beta-a", tr.config.beta_a);
  train_cmd->add_option("--lambda-a", tr.config.lambda_a);
  train_cmd->add_option("--alpha-b", tr.config.alpha_b);
  train_cmd->add_option("--beta-b", tr.config.beta_b);
  train_cmd->add_option("--lambda-b", tr.config.lambda_b);
  train_cmd->add_flag("--no-core", tr.no_core, "Keep the core factors fixed");
  train_cmd->add_option("--core-batch-cap", tr.config.core_batch_cap);
  train_cmd->add_option("--seed", tr.config.seed);
  train_cmd->add_option("--eval-every", tr.config.eval_every);
  train_cmd->add_option("--init-scale", tr.init_scale, "Init scale (default from the data mean)");
  train_cmd->add_flag("--no-wall-time", tr.no_wall_time, "Write 0 for wall_seconds");
  train_cmd->add_option("--metrics-out", tr.metrics_out, "Metrics CSV (default stdout)");
  train_cmd->add_option("--model-out", tr.model_out, "Final checkpoint");
  train_cmd->add_option("--resume", tr.resume, "Start from this checkpoint");
  train_cmd->add_option("--index-base", tr.index_base);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Print RMSE and MAE of a model on a dataset");
  eval_cmd->add_option("--model", ev.model)->required();
  eval_cmd->add_option("--data", ev.data)->required();
  eval_cmd->add_option("--index-base", ev.index_base);

  BenchArgs be;
  auto* bench_cmd = app.add_subcommand("bench", "Time epochs over a grid of J, R_core and workers");
  bench_cmd->add_option("--dims", be.dims);
  bench_cmd->add_option("--nnz", be.nnz);
  bench_cmd->add_option("--j-list", be.j_list);
  bench_cmd->add_option("--rcore-list", be.rcore_list);
  bench_cmd->add_option("--workers-list", be.workers_list);
  bench_cmd->add_option("--epochs", be.epochs);
  bench_cmd->add_option("--seed", be.seed);
  bench_cmd->add_option("--out", be.out, "CSV output (default stdout)");

  DumpArgs du;
  auto* dump_cmd = app.add_subcommand("partition-dump", "Print the conflict-free round schedule");
  dump_cmd->add_option("--order", du.order);
  dump_cmd->add_option("--parts", du.parts);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen_cmd) return do_gen(gen, out);
    if (*split_cmd) return do_split(sp, out);
    if (*train_cmd) return do_train(tr, out, err);
    if (*eval_cmd) return do_eval(ev, out);
    if (*bench_cmd) return do_bench(be, out);
    if (*dump_cmd) return do_dump(du, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace sptucker
