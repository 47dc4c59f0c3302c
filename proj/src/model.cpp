#include "sptucker/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "sptucker/error.hpp"

namespace sptucker {

TuckerModel::TuckerModel(std::vector<std::size_t> dims, std::vector<std::size_t> j_ranks, std::size_t r_core)
    : dims_(std::move(dims)), j_ranks_(std::move(j_ranks)), r_core_(r_core) {
  if (dims_.size() < 2) throw Error("model order must be at least 2");
  if (j_ranks_.size() != dims_.size()) {
    throw Error("expected " + std::to_string(dims_.size()) + " factor ranks, got " +
                std::to_string(j_ranks_.size()));
  }
  if (r_core_ == 0) throw Error("core rank must be at least 1");
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    if (dims_[n] == 0) throw Error("mode " + std::to_string(n) + " has zero dimension");
    if (j_ranks_[n] == 0) throw Error("mode " + std::to_string(n) + " has zero factor rank");
    factors_.emplace_back(dims_[n], j_ranks_[n]);
    core_factors_t_.emplace_back(r_core_, j_ranks_[n]);
  }
}

std::size_t TuckerModel::max_rank() const {
  return j_ranks_.empty() ? 0 : *std::max_element(j_ranks_.begin(), j_ranks_.end());
}

TuckerModel init_model(const std::vector<std::size_t>& dims, const ModelConfig& config) {
  TuckerModel model(dims, config.j_ranks, config.r_core);
  if (!(config.init_scale_factor >= 0.0) || !std::isfinite(config.init_scale_factor)) {
    throw Error("init scale factor must be finite and non-negative");
  }
  std::mt19937_64 rng(config.seed);
  const double s_b = config.init_scale_factor / std::sqrt(static_cast<double>(config.r_core));
  for (std::size_t n = 0; n < model.order(); ++n) {
    const double s_a = config.init_scale_factor / std::sqrt(static_cast<double>(config.j_ranks[n]));
    std::uniform_real_distribution<double> ua(config.signed_init ? -1.0 : 0.0, 1.0);
    for (double& v : model.factor(n).data) v = s_a * ua(rng);
    for (double& v : model.core_factor_t(n).data) v = s_b * ua(rng);
  }
  return model;
}

TuckerModel clone_model(const TuckerModel& model) { return model; }

bool core_rank_exceeds_factor_ranks(const TuckerModel& model) {
  const auto& j = model.j_ranks();
  return model.r_core() > *std::min_element(j.begin(), j.end());
}

namespace {

void write_list(std::ostream& out, const char* key, const std::vector<std::size_t>& xs) {
  out << key;
  for (auto x : xs) out << ' ' << x;
  out << '\n';
}

void write_value(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw Error("model file truncated");
    return w;
  }
  void expect(const std::string& key) {
    auto w = word();
    if (w != key) throw Error("model file: expected '" + key + "', got '" + w + "'");
  }
  std::size_t count() {
    auto w = word();
    try {
      std::size_t pos = 0;
      auto v = std::stoull(w, &pos);
      if (pos != w.size()) throw Error("");
      return v;
    } catch (const std::exception&) {
      throw Error("model file: bad integer '" + w + "'");
    }
  }
  double real() {
    auto w = word();
    try {
      std::size_t pos = 0;
      double v = std::stod(w, &pos);
      if (pos != w.size() || !std::isfinite(v)) throw Error("");
      return v;
    } catch (const std::exception&) {
      throw Error("model file: bad value '" + w + "'");
    }
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_model(const TuckerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "sptucker-model 1\n";
  write_list(out, "dims", model.dims());
  write_list(out, "ranks", model.j_ranks());
  out << "rcore " << model.r_core() << '\n';
  for (std::size_t n = 0; n < model.order(); ++n) {
    const Matrix& a = model.factor(n);
    out << "factor " << n << ' ' << a.rows << ' ' << a.cols << '\n';
    for (std::size_t i = 0; i < a.rows; ++i) {
      for (std::size_t j = 0; j < a.cols; ++j) {
        if (j) out << ' ';
        write_value(out, a(i, j));
      }
      out << '\n';
    }
  }
  // Core factors in their logical J_n x R_core layout.
  for (std::size_t n = 0; n < model.order(); ++n) {
    out << "core " << n << ' ' << model.j_ranks()[n] << ' ' << model.r_core() << '\n';
    for (std::size_t j = 0; j < model.j_ranks()[n]; ++j) {
      for (std::size_t r = 0; r < model.r_core(); ++r) {
        if (r) out << ' ';
        write_value(out, model.core_entry(n, j, r));
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

TuckerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Reader rd(in);
  rd.expect("sptucker-model");
  if (rd.count() != 1) throw Error("model file: unsupported version");
  rd.expect("dims");
  // The order is implied by the dims line, so read it line-wise.
  std::string line;
  std::getline(in, line);
  std::vector<std::size_t> dims;
  std::istringstream ls(line);
  Reader line_reader(ls);
  while (ls >> std::ws && !ls.eof()) dims.push_back(line_reader.count());
  rd.expect("ranks");
  std::vector<std::size_t> ranks;
  for (std::size_t n = 0; n < dims.size(); ++n) ranks.push_back(rd.count());
  rd.expect("rcore");
  const std::size_t r_core = rd.count();
  TuckerModel model(dims, ranks, r_core);
  for (std::size_t n = 0; n < model.order(); ++n) {
    rd.expect("factor");
    if (rd.count() != n || rd.count() != dims[n] || rd.count() != ranks[n]) {
      throw Error("model file: factor " + std::to_string(n) + " header mismatch");
    }
    for (double& v : model.factor(n).data) v = rd.real();
  }
  for (std::size_t n = 0; n < model.order(); ++n) {
    rd.expect("core");
    if (rd.count() != n || rd.count() != ranks[n] || rd.count() != r_core) {
      throw Error("model file: core " + std::to_string(n) + " header mismatch");
    }
    for (std::size_t j = 0; j < ranks[n]; ++j) {
      for (std::size_t r = 0; r < r_core; ++r) model.core_factor_t(n)(r, j) = rd.real();
    }
  }
  return model;
}

}  // namespace sptucker
