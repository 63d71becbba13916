#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace kgcl {

/// Dense row-major 2-D array of doubles. Vectors are 1 x d rows.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Tensor row_vector(std::vector<double> values) {
    auto n = values.size();
    return Tensor(1, n, std::move(values));
  }
  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::vector<std::size_t> shape() const { return {rows_, cols_}; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  void fill(double v);
  bool all_finite() const noexcept;
  bool same_shape(const Tensor& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Low-level dense kernels. Each parallel variant computes the same values as
/// its serial reference; `gemm` dispatches between them by problem size.
namespace kernels {

/// C = op(A) * op(B) + beta * C, op = transpose when the flag is set.
void gemm_serial(bool trans_a, bool trans_b, const Tensor& a, const Tensor& b, Tensor& c,
                 double beta);
void gemm_parallel(bool trans_a, bool trans_b, const Tensor& a, const Tensor& b, Tensor& c,
                   double beta);
void gemm(bool trans_a, bool trans_b, const Tensor& a, const Tensor& b, Tensor& c, double beta);

/// Work (m * n * k) above which gemm uses the OpenMP kernel.
inline constexpr std::size_t kParallelGemmWork = std::size_t{1} << 18;

}  // namespace kernels

}  // namespace kgcl
