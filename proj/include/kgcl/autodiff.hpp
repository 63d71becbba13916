#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kgcl/tensor.hpp"

namespace kgcl {

/// A trainable tensor and its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {}
  void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  /// Value of a 1x1 var.
  double item() const;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so id order is a
/// topological order and backward is a single descending sweep.
///
/// A tape reads parameter values and only writes parameter gradients during
/// backward(); separate tapes may therefore run forward passes concurrently
/// over the same parameters.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var scalar(double v) { return constant(Tensor::scalar(v)); }
  /// Whole parameter; gradients accumulate into `p.grad` on backward.
  Var leaf(Parameter& p);
  /// Selected rows of a parameter table; gradients scatter-add back.
  Var gather_rows(Parameter& p, std::span<const std::uint32_t> rows);
  /// Read-only counterparts: recorded as constants, never written on backward.
  Var frozen(const Parameter& p) { return constant(p.value); }
  Var frozen_rows(const Parameter& p, std::span<const std::uint32_t> rows);

  /// Seeds d(root)/d(root) = 1 and propagates to every reachable node.
  /// Throws ShapeError if root is not 1x1.
  void backward(Var root);

  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  /// Gradient of a node after backward(); empty if the node was unreachable.
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Appends a node; throws NumericError if `value` has a non-finite entry.
  Var record(const char* op, Tensor value, BackwardFn fn);
  /// Gradient buffer of node `id`, zero-initialised on first use.
  Tensor& grad_buffer(std::uint32_t id);
  const Tensor& node_grad(std::uint32_t id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

/// Differentiable operations. Shape mismatches throw ShapeError naming both shapes.
namespace ad {

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// s * a + c, elementwise.
Var affine(Var a, double s, double c);
/// X (n x m) + b (1 x m) added to every row.
Var add_row_broadcast(Var x, Var b);
/// X (n x m) + b (n x 1) added to every column.
Var add_col_broadcast(Var x, Var b);
Var elu(Var a);
Var sigmoid(Var a);
Var log(Var a);
/// log(sigmoid(a)), stable for large |a|.
Var log_sigmoid(Var a);
Var exp(Var a);
Var clamp_min(Var a, double lo);
Var softmax_rows(Var a);
Var sum(Var a);
Var mean(Var a);
/// Elementwise mean of equally shaped vars.
Var mean_of(std::span<const Var> vs);
/// Side by side; all parts share the row count.
Var concat_cols(std::span<const Var> parts);
/// Stacked; all parts share the column count.
Var concat_rows(std::span<const Var> parts);
Var row(Var a, std::size_t r);
/// Rows `idx` of `a`, in order (repeats allowed).
Var select_rows(Var a, std::span<const std::size_t> idx);
Var col(Var a, std::size_t c);
/// Both 1 x d; result 1 x 1.
Var dot(Var a, Var b);
/// Both 1 x d; norms are clamped below at 1e-12.
Var cosine(Var a, Var b);
/// a: 1 x d, B: n x d; result 1 x n of row-wise cosines.
Var cosine_rows(Var a, Var b);
/// out[k] = sum_i a[i] * b[(i + k) mod d], both 1 x d.
Var cyclic_correlation(Var a, Var b);
/// log(sum(exp(a))) over all entries, max-shifted.
Var logsumexp(Var a);

inline constexpr double kNormFloor = 1e-12;

}  // namespace ad

/// Builds a scalar loss on the given tape from the current parameter values.
using LossFn = std::function<Var(Tape&)>;

/// Max over all parameter entries of |numeric - analytic| / max(1, |analytic|),
/// numeric gradients by central differences with step `eps`.
double finite_difference_check(const LossFn& f, std::span<Parameter* const> params,
                               double eps = 1e-5);

}  // namespace kgcl
