#include "kgcl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kgcl/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kgcl {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols)
    throw ShapeError("tensor " + std::to_string(rows) + "x" + std::to_string(cols) + " given " +
                     std::to_string(data_.size()) + " values");
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace kernels {

namespace {

struct GemmDims {
  std::size_t m, n, k;
};

GemmDims check_dims(bool ta, bool tb, const Tensor& a, const Tensor& b, const Tensor& c) {
  std::size_t m = ta ? a.cols() : a.rows();
  std::size_t ka = ta ? a.rows() : a.cols();
  std::size_t kb = tb ? b.cols() : b.rows();
  std::size_t n = tb ? b.rows() : b.cols();
  if (ka != kb || c.rows() != m || c.cols() != n)
    throw ShapeError("gemm: op(A) " + std::to_string(m) + "x" + std::to_string(ka) + ", op(B) " +
                     std::to_string(kb) + "x" + std::to_string(n) + ", C " +
                     std::to_string(c.rows()) + "x" + std::to_string(c.cols()));
  return {m, n, ka};
}

// One output row. Loop order keeps the innermost access contiguous in B when
// B is not transposed.
inline void gemm_row(bool ta, bool tb, const Tensor& a, const Tensor& b, Tensor& c, double beta,
                     std::size_t i, const GemmDims& d) {
  double* ci = c.data() + i * d.n;
  if (beta == 0.0) {
    std::fill(ci, ci + d.n, 0.0);
  } else if (beta != 1.0) {
    for (std::size_t j = 0; j < d.n; ++j) ci[j] *= beta;
  }
  const double* ad = a.data();
  const double* bd = b.data();
  if (!tb) {
    for (std::size_t p = 0; p < d.k; ++p) {
      double aip = ta ? ad[p * a.cols() + i] : ad[i * a.cols() + p];
      if (aip == 0.0) continue;
      const double* bp = bd + p * b.cols();
      for (std::size_t j = 0; j < d.n; ++j) ci[j] += aip * bp[j];
    }
  } else {
    for (std::size_t j = 0; j < d.n; ++j) {
      const double* bj = bd + j * b.cols();
      double acc = 0.0;
      if (!ta) {
        const double* ai = ad + i * a.cols();
        for (std::size_t p = 0; p < d.k; ++p) acc += ai[p] * bj[p];
      } else {
        for (std::size_t p = 0; p < d.k; ++p) acc += ad[p * a.cols() + i] * bj[p];
      }
      ci[j] += acc;
    }
  }
}

}  // namespace

void gemm_serial(bool ta, bool tb, const Tensor& a, const Tensor& b, Tensor& c, double beta) {
  auto d = check_dims(ta, tb, a, b, c);
  for (std::size_t i = 0; i < d.m; ++i) gemm_row(ta, tb, a, b, c, beta, i, d);
}

void gemm_parallel(bool ta, bool tb, const Tensor& a, const Tensor& b, Tensor& c, double beta) {
  auto d = check_dims(ta, tb, a, b, c);
  const auto m = static_cast<std::ptrdiff_t>(d.m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i)
    gemm_row(ta, tb, a, b, c, beta, static_cast<std::size_t>(i), d);
}

void gemm(bool ta, bool tb, const Tensor& a, const Tensor& b, Tensor& c, double beta) {
  std::size_t m = ta ? a.cols() : a.rows();
  std::size_t k = ta ? a.rows() : a.cols();
  std::size_t n = tb ? b.rows() : b.cols();
  bool big = m * n * k >= kParallelGemmWork && m > 1;
#ifdef _OPENMP
  big = big && omp_get_max_threads() > 1 && !omp_in_parallel();
#else
  big = false;
#endif
  if (big)
    gemm_parallel(ta, tb, a, b, c, beta);
  else
    gemm_serial(ta, tb, a, b, c, beta);
}

}  // namespace kernels

}  // namespace kgcl
