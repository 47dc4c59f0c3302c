#include "sptucker/oracle.hpp"

#include <string>

#include "sptucker/error.hpp"

namespace sptucker::oracle {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims, std::size_t cap, const char* what) {
  std::size_t p = 1;
  for (const auto d : dims) {
    if (d != 0 && p > cap / d) throw Error(std::string(what) + " exceeds the oracle size cap");
    p *= d;
  }
  if (p > cap) throw Error(std::string(what) + " exceeds the oracle size cap");
  return p;
}

// Multi-index of linear position `linear` (mode 0 fastest).
void unravel(std::size_t linear, const std::vector<std::size_t>& dims, std::vector<std::size_t>& index) {
  index.resize(dims.size());
  for (std::size_t n = 0; n < dims.size(); ++n) {
    index[n] = linear % dims[n];
    linear /= dims[n];
  }
}

// Column of the mode-n matricization holding `index`.
std::size_t unfolding_column(std::span<const std::size_t> index, const std::vector<std::size_t>& dims, std::size_t n) {
  std::size_t col = 0;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k == n) continue;
    col += index[k] * stride;
    stride *= dims[k];
  }
  return col;
}

std::size_t off_mode_size(const std::vector<std::size_t>& dims, std::size_t n) {
  std::size_t p = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k != n) p *= dims[k];
  }
  return p;
}

// Core column r of every mode except n, highest mode first.
std::vector<std::vector<double>> off_mode_core_columns(const TuckerModel& model, std::size_t n, std::size_t r) {
  std::vector<std::vector<double>> cols;
  for (std::size_t k = model.order(); k-- > 0;) {
    if (k == n) continue;
    const auto b = model.core_column(k, r);
    cols.emplace_back(b.begin(), b.end());
  }
  return cols;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  values_.assign(checked_product(dims_, kMaxDense, "dense tensor"), 0.0);
}

std::size_t DenseTensor::linear_index(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw Error("dense index has wrong length");
  std::size_t linear = 0;
  std::size_t stride = 1;
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    if (index[n] >= dims_[n]) throw Error("dense index out of range");
    linear += index[n] * stride;
    stride *= dims_[n];
  }
  return linear;
}

std::vector<double> kron_vec(std::span<const std::vector<double>> vectors, OpCounter* counter) {
  std::vector<std::size_t> lengths;
  for (const auto& v : vectors) lengths.push_back(v.size());
  checked_product(lengths, kMaxDense, "Kronecker product");
  std::vector<double> out{1.0};
  for (const auto& v : vectors) {
    std::vector<double> next(out.size() * v.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) next[i * v.size() + j] = out[i] * v[j];
    }
    if (counter) counter->mults += next.size();
    out = std::move(next);
  }
  return out;
}

Matrix kron_mat(std::span<const Matrix> matrices) {
  Matrix out(1, 1, 1.0);
  for (const auto& m : matrices) {
    if (out.rows * m.rows * out.cols * m.cols > kMaxDense) throw Error("Kronecker product exceeds the oracle size cap");
    Matrix next(out.rows * m.rows, out.cols * m.cols);
    for (std::size_t i = 0; i < out.rows; ++i) {
      for (std::size_t j = 0; j < out.cols; ++j) {
        for (std::size_t k = 0; k < m.rows; ++k) {
          for (std::size_t l = 0; l < m.cols; ++l) next(i * m.rows + k, j * m.cols + l) = out(i, j) * m(k, l);
        }
      }
    }
    out = std::move(next);
  }
  return out;
}

Matrix matricize(const DenseTensor& tensor, std::size_t n) {
  const auto& dims = tensor.dims();
  if (n >= dims.size()) throw Error("mode out of range");
  Matrix out(dims[n], off_mode_size(dims, n));
  std::vector<std::size_t> index;
  for (std::size_t l = 0; l < tensor.size(); ++l) {
    unravel(l, dims, index);
    out(index[n], unfolding_column(index, dims, n)) = tensor.values()[l];
  }
  return out;
}

DenseTensor fold(const Matrix& matrix, const std::vector<std::size_t>& dims, std::size_t n) {
  if (n >= dims.size()) throw Error("mode out of range");
  DenseTensor out(dims);
  if (matrix.rows != dims[n] || matrix.cols != off_mode_size(dims, n)) throw Error("fold: matrix shape mismatch");
  std::vector<std::size_t> index;
  for (std::size_t l = 0; l < out.size(); ++l) {
    unravel(l, dims, index);
    out.values()[l] = matrix(index[n], unfolding_column(index, dims, n));
  }
  return out;
}

std::vector<double> vectorize(const DenseTensor& tensor, std::size_t n) {
  const Matrix m = matricize(tensor, n);
  std::vector<double> out(m.rows * m.cols);
  for (std::size_t j = 0; j < m.cols; ++j) {
    for (std::size_t i = 0; i < m.rows; ++i) out[j * m.rows + i] = m(i, j);
  }
  return out;
}

DenseTensor dense_core_from_kruskal(const TuckerModel& model) {
  checked_product(model.j_ranks(), kMaxCore, "dense core");
  DenseTensor core(model.j_ranks());
  std::vector<std::size_t> index;
  for (std::size_t l = 0; l < core.size(); ++l) {
    unravel(l, model.j_ranks(), index);
    double sum = 0.0;
    for (std::size_t r = 0; r < model.r_core(); ++r) {
      double p = 1.0;
      for (std::size_t n = 0; n < model.order(); ++n) p *= model.core_entry(n, index[n], r);
      sum += p;
    }
    core.values()[l] = sum;
  }
  return core;
}

Matrix dense_core_matricized(const TuckerModel& model, std::size_t n, OpCounter* counter) {
  if (n >= model.order()) throw Error("mode out of range");
  checked_product(model.j_ranks(), kMaxCore, "dense core");
  const std::size_t jn = model.j_ranks()[n];
  Matrix out(jn, off_mode_size(model.j_ranks(), n));
  for (std::size_t r = 0; r < model.r_core(); ++r) {
    const auto cols = off_mode_core_columns(model, n, r);
    const auto k = kron_vec(cols, counter);
    const auto b = model.core_column(n, r);
    for (std::size_t i = 0; i < jn; ++i) {
      for (std::size_t j = 0; j < k.size(); ++j) out(i, j) += b[i] * k[j];
    }
    if (counter) counter->mults += jn * k.size();
  }
  return out;
}

std::vector<double> s_row(const TuckerModel& model, std::span<const std::size_t> index, std::size_t n,
                          OpCounter* counter) {
  check_index(model, index);
  if (n >= model.order()) throw Error("mode out of range");
  std::vector<std::vector<double>> rows;
  for (std::size_t k = model.order(); k-- > 0;) {
    if (k == n) continue;
    const auto a = model.factor_row(k, index[k]);
    rows.emplace_back(a.begin(), a.end());
  }
  return kron_vec(rows, counter);
}

std::vector<double> h_row(const TuckerModel& model, std::span<const std::size_t> index, std::size_t n) {
  const auto s = s_row(model, index, n);
  const auto a = model.factor_row(n, index[n]);
  const std::vector<std::vector<double>> parts{s, std::vector<double>(a.begin(), a.end())};
  return kron_vec(parts);
}

DenseTensor dense_reconstruct(const TuckerModel& model, const DenseTensor& core) {
  if (core.dims() != model.j_ranks()) throw Error("core shape does not match the model ranks");
  checked_product(model.dims(), kMaxDense, "reconstruction");
  DenseTensor current = core;
  std::vector<std::size_t> index;
  for (std::size_t n = 0; n < model.order(); ++n) {
    auto dims = current.dims();
    dims[n] = model.dims()[n];
    DenseTensor next(dims);
    const Matrix& a = model.factor(n);
    for (std::size_t l = 0; l < next.size(); ++l) {
      unravel(l, dims, index);
      const std::size_t i = index[n];
      double sum = 0.0;
      for (std::size_t j = 0; j < a.cols; ++j) {
        index[n] = j;
        sum += current.at(index) * a(i, j);
      }
      next.values()[l] = sum;
    }
    current = std::move(next);
  }
  return current;
}

std::vector<double> dense_factor_gradient(const TuckerModel& model, std::span<const std::size_t> index, double x,
                                          std::size_t n, double lambda_a, OpCounter* counter) {
  const Matrix g = dense_core_matricized(model, n, counter);
  const auto s = s_row(model, index, n, counter);
  std::vector<double> d(g.rows, 0.0);
  for (std::size_t i = 0; i < g.rows; ++i) {
    for (std::size_t j = 0; j < g.cols; ++j) d[i] += g(i, j) * s[j];
  }
  if (counter) counter->mults += g.rows * g.cols;
  const auto a = model.factor_row(n, index[n]);
  double inter = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) inter += a[j] * d[j];
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double part1 = x * d[j];
    const double part2 = lambda_a * a[j];
    const double part3 = inter * d[j];
    out[j] = -part1 + part2 + part3;
  }
  if (counter) counter->mults += 4 * a.size();
  return out;
}

std::vector<double> dense_core_gradient(const TuckerModel& model, const SparseTensor& data,
                                        std::span<const std::size_t> entry_ids, std::size_t n, std::size_t r,
                                        double lambda_b) {
  if (n >= model.order() || r >= model.r_core()) throw Error("mode or core rank out of range");
  if (entry_ids.empty()) throw Error("core gradient needs at least one sample");
  const std::size_t jn = model.j_ranks()[n];
  const std::size_t rc = model.r_core();

  std::vector<std::vector<double>> kron_b;
  for (std::size_t rr = 0; rr < rc; ++rr) kron_b.push_back(kron_vec(off_mode_core_columns(model, n, rr)));

  std::vector<double> grad(jn, 0.0);
  std::vector<std::vector<double>> q(rc, std::vector<double>(jn));
  std::vector<double> inter(rc);
  for (const std::size_t e : entry_ids) {
    const auto index = data.index(e);
    const double x = data.value(e);
    const auto s = s_row(model, index, n);
    const auto a = model.factor_row(n, index[n]);
    for (std::size_t rr = 0; rr < rc; ++rr) {
      double w = 0.0;
      for (std::size_t k = 0; k < s.size(); ++k) w += kron_b[rr][k] * s[k];
      for (std::size_t j = 0; j < jn; ++j) q[rr][j] = a[j] * w;
      const auto b = model.core_column(n, rr);
      inter[rr] = 0.0;
      for (std::size_t j = 0; j < jn; ++j) inter[rr] += b[j] * q[rr][j];
    }
    for (std::size_t j = 0; j < jn; ++j) {
      const double part1 = x * q[r][j];
      const double part3 = inter[r] * q[r][j];
      double part4 = 0.0;
      for (std::size_t rr = 0; rr < rc; ++rr) {
        if (rr != r) part4 += inter[rr] * q[r][j];
      }
      grad[j] += -part1 + part3 + part4;
    }
  }
  const auto b = model.core_column(n, r);
  for (std::size_t j = 0; j < jn; ++j) grad[j] = grad[j] / static_cast<double>(entry_ids.size()) + lambda_b * b[j];
  return grad;
}

}  // namespace sptucker::oracle
