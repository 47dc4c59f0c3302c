#include "sptucker/sparse_tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>

#include "sptucker/error.hpp"
#include "sptucker/kernels.hpp"

namespace sptucker {

SparseTensor::SparseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw Error("tensor order must be at least 2");
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    if (dims_[n] == 0) throw Error("mode " + std::to_string(n) + " has zero dimension");
  }
}

void SparseTensor::push_back(std::span<const std::size_t> index, double value) {
  if (index.size() != order()) {
    throw Error("entry has " + std::to_string(index.size()) + " indices, tensor order is " + std::to_string(order()));
  }
  for (std::size_t n = 0; n < order(); ++n) {
    if (index[n] >= dims_[n]) {
      throw Error("index " + std::to_string(index[n]) + " out of range for mode " + std::to_string(n) + " (dim " +
                  std::to_string(dims_[n]) + ")");
    }
  }
  if (!std::isfinite(value)) throw Error("entry value is not finite");
  indices_.insert(indices_.end(), index.begin(), index.end());
  values_.push_back(value);
}

void SparseTensor::reserve(std::size_t n) {
  indices_.reserve(n * order());
  values_.reserve(n);
}

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    if (end > pos) tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

bool parse_uint(std::string_view token, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

bool parse_real(std::string_view token, double& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::string at_line(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no) + ": ";
}

}  // namespace

SparseTensor load_coo(const std::filesystem::path& path, IndexBase base, std::optional<std::vector<std::size_t>> dims) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::size_t shift = static_cast<std::size_t>(base);

  std::optional<std::vector<std::size_t>> header_dims;
  std::vector<std::size_t> indices;
  std::vector<double> values;
  std::size_t order = 0;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> idx;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    const auto tokens = tokenize(view);
    if (tokens.empty()) continue;
    if (tokens.front().front() == '#') {
      // "# dims: I1 .. IN" (the '#' may or may not be its own token)
      std::size_t first = tokens.front() == "#" ? 1 : 0;
      std::string_view key = first < tokens.size() ? tokens[first] : std::string_view{};
      if (first == 0) key.remove_prefix(1);
      if (key == "dims:") {
        std::vector<std::size_t> d;
        for (std::size_t k = first + 1; k < tokens.size(); ++k) {
          std::size_t v = 0;
          if (!parse_uint(tokens[k], v)) throw Error(at_line(path, line_no) + "bad dims header");
          d.push_back(v);
        }
        header_dims = std::move(d);
      }
      continue;
    }
    if (tokens.size() < 3) throw Error(at_line(path, line_no) + "expected at least 2 indices and a value");
    const std::size_t line_order = tokens.size() - 1;
    if (order == 0) {
      order = line_order;
    } else if (line_order != order) {
      throw Error(at_line(path, line_no) + "inconsistent token count: expected " + std::to_string(order + 1) +
                  ", got " + std::to_string(tokens.size()));
    }
    idx.assign(order, 0);
    for (std::size_t n = 0; n < order; ++n) {
      std::size_t v = 0;
      if (!parse_uint(tokens[n], v)) {
        throw Error(at_line(path, line_no) + "malformed index '" + std::string(tokens[n]) + "'");
      }
      if (v < shift) throw Error(at_line(path, line_no) + "index " + std::to_string(v) + " below index base");
      idx[n] = v - shift;
    }
    double value = 0.0;
    if (!parse_real(tokens[order], value)) {
      throw Error(at_line(path, line_no) + "malformed value '" + std::string(tokens[order]) + "'");
    }
    if (!std::isfinite(value)) throw Error(at_line(path, line_no) + "non-finite value");
    indices.insert(indices.end(), idx.begin(), idx.end());
    values.push_back(value);
  }
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  if (values.empty()) throw Error(path.string() + ": no entries");

  std::vector<std::size_t> shape;
  if (dims) {
    shape = *dims;
  } else if (header_dims) {
    shape = *header_dims;
  } else {
    shape.assign(order, 0);
    for (std::size_t e = 0; e < values.size(); ++e) {
      for (std::size_t n = 0; n < order; ++n) shape[n] = std::max(shape[n], indices[e * order + n] + 1);
    }
  }
  if (shape.size() != order) {
    throw Error(path.string() + ": dims list has " + std::to_string(shape.size()) + " modes, entries have " +
                std::to_string(order));
  }
  SparseTensor tensor(shape);
  tensor.reserve(values.size());
  for (std::size_t e = 0; e < values.size(); ++e) {
    tensor.push_back(std::span<const std::size_t>(indices.data() + e * order, order), values[e]);
  }
  return tensor;
}

void write_coo(const SparseTensor& tensor, const std::filesystem::path& path, IndexBase base) {
  if (tensor.empty()) throw Error("refusing to write a tensor with no entries");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::size_t shift = static_cast<std::size_t>(base);
  std::fputs("# dims:", f);
  for (const auto d : tensor.dims()) std::fprintf(f, " %zu", d);
  std::fputc('\n', f);
  for (std::size_t e = 0; e < tensor.nnz(); ++e) {
    for (const auto i : tensor.index(e)) std::fprintf(f, "%zu ", i + shift);
    std::fprintf(f, "%.17g\n", tensor.value(e));
  }
  const bool ok = std::ferror(f) == 0;
  if (std::fclose(f) != 0 || !ok) throw IoError("failed writing '" + path.string() + "'");
}

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  if (!(config.noise_sigma >= 0.0)) throw Error("noise sigma must be non-negative");
  ModelConfig mc{config.j_ranks, config.r_core, config.init_scale_factor, config.seed, config.signed_truth};
  TuckerModel truth = init_model(config.dims, mc);

  std::size_t dense = 1;
  for (const auto d : config.dims) {
    if (dense > std::numeric_limits<std::size_t>::max() / d) throw Error("dense size overflows 64 bits");
    dense *= d;
  }
  if (config.nnz > dense) {
    throw Error("nnz " + std::to_string(config.nnz) + " exceeds dense size " + std::to_string(dense));
  }

  // Separate stream from the model draw so the model does not depend on nnz.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  // Floyd's sampling of nnz distinct linear indices, kept in draw order.
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(config.nnz * 2);
  std::vector<std::size_t> linear;
  linear.reserve(config.nnz);
  for (std::size_t j = dense - config.nnz; j < dense; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    const std::size_t v = chosen.insert(t).second ? t : j;
    if (v == j) chosen.insert(j);
    linear.push_back(v);
  }

  SparseTensor tensor(config.dims);
  tensor.reserve(config.nnz);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::size_t> idx(config.dims.size());
  ModeDotCache cache(truth.order(), truth.r_core());
  for (std::size_t v : linear) {
    for (std::size_t n = 0; n < idx.size(); ++n) {
      idx[n] = v % config.dims[n];
      v /= config.dims[n];
    }
    mode_dots(truth, idx, cache);
    double x = predict(cache);
    if (config.noise_sigma > 0.0) x += config.noise_sigma * noise(rng);
    tensor.push_back(idx, x);
  }
  return {std::move(tensor), std::move(truth)};
}

DatasetSplit split(const SparseTensor& tensor, double test_fraction, std::uint64_t seed) {
  if (tensor.empty()) throw Error("cannot split an empty tensor");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw Error("test fraction must be in [0, 1)");
  const std::size_t n = tensor.nnz();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test >= n) throw Error("test fraction leaves no training entries");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first n_test slots are a uniform sample.
  for (std::size_t k = 0; k < n_test; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(order[k], order[pick(rng)]);
  }
  std::vector<char> is_test(n, 0);
  for (std::size_t k = 0; k < n_test; ++k) is_test[order[k]] = 1;

  DatasetSplit out{SparseTensor(tensor.dims()), SparseTensor(tensor.dims())};
  out.train.reserve(n - n_test);
  out.test.reserve(n_test);
  for (std::size_t e = 0; e < n; ++e) (is_test[e] ? out.test : out.train).push_back(tensor.index(e), tensor.value(e));
  return out;
}

}  // namespace sptucker
